//! Sampled detector signals and the selective low-pass measurement.

mod filter;
mod trace;

pub use filter::{lowpass, windowed_sinc, FilterSpec, LowPass};
pub use trace::{fmt_f64, product_trace, AmplitudeTrace, DetectorTrace, Sample, Trace, TimeGrid};

use num_complex::Complex64;

use crate::elements::project_on_axis;
use crate::error::Result;
use crate::field::PortField;

/// `|E(t)|²` summed over both polarizations at every grid point.
pub fn synthesize_intensity(port: &PortField, grid: &TimeGrid) -> Result<DetectorTrace> {
    grid.check_nyquist(port.max_abs_offset())?;
    Ok(Trace::from_fn(*grid, |t| port.intensity_at(t)))
}

/// Complex amplitude of the field projected on the analyzer axis `(cos α, sin α)`.
pub fn synthesize_amplitude(port: &PortField, analyzer: f64, grid: &TimeGrid) -> Result<AmplitudeTrace> {
    grid.check_nyquist(port.max_abs_offset())?;
    let lines: Vec<(f64, Complex64)> = port
        .spectral_lines()
        .into_iter()
        .map(|(f, h, v)| (f, project_on_axis(h, v, analyzer)))
        .collect();
    Ok(Trace::from_fn(*grid, |t| {
        lines
            .iter()
            .map(|&(f, a)| a * Complex64::from_polar(1.0, std::f64::consts::TAU * f * t))
            .sum()
    }))
}
