use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `offset + amplitude·cos(x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// `amplitude / offset`.
    pub visibility: f64,
    pub residual_rms: f64,
}

/// Linear regression on the `(1, cos x, sin x)` basis.
pub fn fringe_fit(x: &[f64], y: &[f64]) -> Result<FringeFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("{} abscissae for {} values", x.len(), y.len())));
    }
    if x.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 samples, got {}", x.len())));
    }
    let n = x.len();
    let design = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => 1.0,
        1 => x[r].cos(),
        _ => x[r].sin(),
    });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(Error::Fit("rank-deficient design (abscissae do not resolve a fringe)".into()));
    }
    let rhs = DVector::from_column_slice(y);
    let coef = svd.solve(&rhs, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    let (a, bc, bs) = (coef[0], coef[1], coef[2]);

    // b_c cos x + b_s sin x = B cos(x + c)
    let amplitude = bc.hypot(bs);
    let phase = (-bs).atan2(bc);
    if a <= 0.0 {
        return Err(Error::Fit(format!("non-positive offset {a}; visibility undefined")));
    }
    let resid = &design * &coef - rhs;
    Ok(FringeFit {
        offset: a,
        amplitude,
        phase,
        visibility: amplitude / a,
        residual_rms: (resid.norm_squared() / n as f64).sqrt(),
    })
}
