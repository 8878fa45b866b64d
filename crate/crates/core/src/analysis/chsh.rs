//! CHSH-style post-analysis of a correlation surface R(ξ, θ).
//!
//! R depends on the angle sum, so the canonical settings are taken in sum form:
//! a = 0, a′ = π/4, b = −π/8, b′ = −3π/8. For R ∝ cos²(ξ+θ) the derived
//! correlation is E = cos 2(ξ+θ) and S reaches 2√2.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

pub const CHSH_ANGLES: ChshAngles = ChshAngles {
    a: 0.0,
    a_prime: FRAC_PI_4,
    b: -FRAC_PI_8,
    b_prime: -3.0 * FRAC_PI_8,
};

/// `E(ξ,θ) = [R(ξ,θ) + R(ξ⊥,θ⊥) − R(ξ⊥,θ) − R(ξ,θ⊥)] / [sum of the four]`,
/// with `⊥` adding π/2.
pub fn correlation_from_r<F>(r: &F, xi: f64, theta: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let pp = r(xi, theta)?;
    let oo = r(xi + FRAC_PI_2, theta + FRAC_PI_2)?;
    let op = r(xi + FRAC_PI_2, theta)?;
    let po = r(xi, theta + FRAC_PI_2)?;
    let total = pp + oo + op + po;
    if total.abs() <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateSurface { xi, theta });
    }
    Ok((pp + oo - op - po) / total)
}

/// `S = |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|` at [`CHSH_ANGLES`].
pub fn chsh_s<E>(e: E) -> Result<f64>
where
    E: Fn(f64, f64) -> Result<f64>,
{
    let ChshAngles { a, a_prime, b, b_prime } = CHSH_ANGLES;
    Ok((e(a, b)? - e(a, b_prime)? + e(a_prime, b)? + e(a_prime, b_prime)?).abs())
}

/// [`chsh_s`] with E derived from a correlation surface.
pub fn chsh_from_r<F>(r: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    chsh_s(|xi, theta| correlation_from_r(&r, xi, theta))
}
