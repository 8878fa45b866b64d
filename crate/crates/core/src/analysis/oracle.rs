//! Closed-form predictions for the detector observables.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::Sign;
use crate::scheme::{Combiner, SchemeConfig};

/// Time-averaged powers at both PBS outputs without analyzers: `2κ²` each,
/// for any φ, time and detuning sign.
pub fn oracle_local(cfg: &SchemeConfig) -> Result<(f64, f64)> {
    if cfg.combiner != Combiner::Pbs {
        return Err(Error::WrongCombiner { expected: "PBS" });
    }
    if cfg.analyzer_xi.is_some() || cfg.analyzer_theta.is_some() {
        return Err(Error::InvalidConfig("local oracle applies without analyzers".into()));
    }
    let p = 2.0 * cfg.kappa().powi(2);
    Ok((p, p))
}

/// Instantaneous analyzed intensities:
/// `κ²(1 − sin2ξ·cos ψ)` and `κ²(1 + sin2θ·cos ψ)` with `ψ = φ + s·2π·2Δf·t`.
pub fn oracle_projected(cfg: &SchemeConfig, sign: Sign, t: f64) -> Result<(f64, f64)> {
    if cfg.combiner != Combiner::Pbs {
        return Err(Error::WrongCombiner { expected: "PBS" });
    }
    let (Some(xi), Some(theta)) = (cfg.analyzer_xi, cfg.analyzer_theta) else {
        return Err(Error::MissingAnalyzers);
    };
    let k2 = cfg.kappa().powi(2);
    let psi = cfg.phi + sign.value() * TAU * cfg.beat_hz() * t;
    Ok((
        k2 * (1.0 - (2.0 * xi).sin() * psi.cos()),
        k2 * (1.0 + (2.0 * theta).sin() * psi.cos()),
    ))
}

/// Low-pass-selected amplitude-product correlation, `R_max·cos²(ξ+θ)`.
pub fn oracle_correlation(xi: f64, theta: f64, r_max: f64) -> f64 {
    r_max * (xi + theta).cos().powi(2)
}

/// DC of the product of the two analyzed intensities, `κ⁴(1 − ½·sin2ξ·sin2θ)`.
pub fn oracle_intensity_product(xi: f64, theta: f64, kappa4: f64) -> f64 {
    kappa4 * (1.0 - 0.5 * (2.0 * xi).sin() * (2.0 * theta).sin())
}
