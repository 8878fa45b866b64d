//! Joint (zero-delay) correlation of the two analyzed outputs.
//!
//! Two readouts are modelled. `AmplitudeProductLPF` low-passes the product of
//! the complex projected amplitudes and squares the DC; only zero-net-detuning
//! tone pairs survive, giving cos²(ξ+θ). `IntensityProductLPF` low-passes the
//! product of the two detector intensities, which gives 1 − ½·sin2ξ·sin2θ.
//! Each has a tone-domain route and a sampled-trace route.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PortField, Sign};
use crate::scheme::{scalar_tones, PropagationResult, Scheme, SchemeConfig};
use crate::signal::{
    fmt_f64, lowpass, product_trace, synthesize_amplitude, synthesize_intensity, FilterSpec, TimeGrid,
};

use super::terms::classify_product_terms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pipeline {
    AmplitudeProductLPF,
    IntensityProductLPF,
}

/// Offsets closer than this are the same spectral line.
const LINE_TOLERANCE_HZ: f64 = 1e-6;

/// Complex DC of `E_s·E_i` from the kept (zero net offset) tone pairs.
pub fn kept_amplitude(result: &PropagationResult) -> Result<Complex64> {
    let (xi, theta) = result.analyzers()?;
    let s = scalar_tones(&result.port_a, xi);
    let i = scalar_tones(&result.port_b, theta);
    let terms = classify_product_terms(result)?;
    Ok(terms
        .kept
        .iter()
        .map(|pair| {
            let a = s.iter().find(|t| t.label == pair.label_s).map_or(Complex64::new(0.0, 0.0), |t| t.amplitude);
            let b = i.iter().find(|t| t.label == pair.label_i).map_or(Complex64::new(0.0, 0.0), |t| t.amplitude);
            a * b
        })
        .sum())
}

/// Tone-domain amplitude-product correlation `|Σ_kept a_s·a_i|²`.
pub fn amplitude_product_r(result: &PropagationResult) -> Result<f64> {
    Ok(kept_amplitude(result)?.norm_sqr())
}

/// Spectrum of `|E(t)|²`: lines at every tone-pair difference frequency.
pub fn intensity_spectrum(port: &PortField) -> Vec<(f64, Complex64)> {
    let lines = port.spectral_lines();
    let mut out: Vec<(f64, Complex64)> = Vec::new();
    for (fj, hj, vj) in &lines {
        for (fk, hk, vk) in &lines {
            let f = fj - fk;
            let c = hj * hk.conj() + vj * vk.conj();
            match out.iter_mut().find(|(g, _)| (g - f).abs() <= LINE_TOLERANCE_HZ) {
                Some(line) => line.1 += c,
                None => out.push((f, c)),
            }
        }
    }
    out
}

/// Tone-domain DC of `I_s(t)·I_i(t)`.
pub fn intensity_product_dc_tones(result: &PropagationResult) -> Result<f64> {
    result.analyzers()?;
    let s = intensity_spectrum(&result.port_a);
    let i = intensity_spectrum(&result.port_b);
    let mut dc = Complex64::new(0.0, 0.0);
    for (fs, cs) in &s {
        for (fi, ci) in &i {
            if (fs + fi).abs() <= LINE_TOLERANCE_HZ {
                dc += cs * ci;
            }
        }
    }
    Ok(dc.re)
}

/// Settings of the sampled-trace route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledPipeline {
    pub grid: TimeGrid,
    pub filter: FilterSpec,
    pub beat_hz: f64,
}

impl SampledPipeline {
    /// Default grid with the ideal period-average filter.
    pub fn ideal(cfg: &SchemeConfig) -> Self {
        SampledPipeline {
            grid: TimeGrid::default_for_beat(cfg.beat_hz()),
            filter: FilterSpec::default(),
            beat_hz: cfg.beat_hz(),
        }
    }
}

/// Projected amplitudes → complex product → low-pass → mean → |·|².
pub fn sampled_amplitude_product_r(result: &PropagationResult, p: &SampledPipeline) -> Result<f64> {
    let (xi, theta) = result.analyzers()?;
    let es = synthesize_amplitude(&result.port_a, xi, &p.grid)?;
    let ei = synthesize_amplitude(&result.port_b, theta, &p.grid)?;
    let prod = product_trace(&es, &ei)?;
    Ok(lowpass(&prod, &p.filter, p.beat_hz)?.mean().norm_sqr())
}

/// Detector intensities → product → low-pass → mean.
pub fn intensity_product_dc(result: &PropagationResult, p: &SampledPipeline) -> Result<f64> {
    result.analyzers()?;
    let is = synthesize_intensity(&result.port_a, &p.grid)?;
    let ii = synthesize_intensity(&result.port_b, &p.grid)?;
    let prod = product_trace(&is, &ii)?;
    Ok(lowpass(&prod, &p.filter, p.beat_hz)?.mean())
}

/// How a correlation value is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    ToneDomain,
    Sampled(SampledPipeline),
}

/// R for one propagated shot.
pub fn evaluate(result: &PropagationResult, pipeline: Pipeline, eval: &Evaluation) -> Result<f64> {
    match (pipeline, eval) {
        (Pipeline::AmplitudeProductLPF, Evaluation::ToneDomain) => amplitude_product_r(result),
        (Pipeline::AmplitudeProductLPF, Evaluation::Sampled(p)) => sampled_amplitude_product_r(result, p),
        (Pipeline::IntensityProductLPF, Evaluation::ToneDomain) => intensity_product_dc_tones(result),
        (Pipeline::IntensityProductLPF, Evaluation::Sampled(p)) => intensity_product_dc(result, p),
    }
}

/// Propagates `scheme` with the analyzers set to (ξ, θ) and evaluates R.
pub fn correlation_at(
    scheme: &Scheme,
    xi: f64,
    theta: f64,
    sign: Sign,
    pipeline: Pipeline,
    eval: &Evaluation,
) -> Result<f64> {
    let mut s = scheme.clone();
    s.config = s.config.with_analyzers(xi, theta);
    evaluate(&s.propagate(sign)?, pipeline, eval)
}

/// R over a (ξ, θ) grid, row-major with ξ as the row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSurface {
    pub xi_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub pipeline: Pipeline,
    /// Pipeline value at ξ = θ = 0.
    #[serde(rename = "R_max")]
    pub r_max: f64,
}

impl CorrelationSurface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.theta_grid.len() + j]
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nt = self.theta_grid.len();
        self.r
            .iter()
            .enumerate()
            .map(move |(k, &r)| (self.xi_grid[k / nt], self.theta_grid[k % nt], r))
    }

    /// `R / R(0,0)`.
    pub fn normalized(&self) -> CorrelationSurface {
        CorrelationSurface {
            r: self.r.iter().map(|v| v / self.r_max).collect(),
            r_max: 1.0,
            ..self.clone()
        }
    }

    /// Largest `|R(ξ,θ) − f(ξ,θ)|` over the grid.
    pub fn max_deviation(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points().map(|(x, t, r)| (r - f(x, t)).abs()).fold(0.0, f64::max)
    }

    /// Number of singular values above `rel_tol · σ_max` of the R matrix.
    /// A separable surface f(ξ)·g(θ) has rank 1.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let m = DMatrix::from_row_slice(self.xi_grid.len(), self.theta_grid.len(), &self.r);
        let sv = m.singular_values();
        let smax = sv.max();
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    }

    /// `xi,theta,R` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["xi", "theta", "R"])?;
        for (x, t, r) in self.points() {
            out.write_record([fmt_f64(x), fmt_f64(t), fmt_f64(r)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates a surface, parallel over grid points, deterministic in order.
pub fn correlation_surface(
    cfg: &SchemeConfig,
    xi_grid: &[f64],
    theta_grid: &[f64],
    sign: Sign,
    pipeline: Pipeline,
    eval: &Evaluation,
) -> Result<CorrelationSurface> {
    surface_with(&Scheme::new(cfg.clone())?, xi_grid, theta_grid, pipeline, |scheme, xi, theta| {
        correlation_at(scheme, xi, theta, sign, pipeline, eval)
    })
}

/// Builds a surface from a per-point evaluator.
pub fn surface_with<F>(
    scheme: &Scheme,
    xi_grid: &[f64],
    theta_grid: &[f64],
    pipeline: Pipeline,
    point: F,
) -> Result<CorrelationSurface>
where
    F: Fn(&Scheme, f64, f64) -> Result<f64> + Sync,
{
    if xi_grid.is_empty() || theta_grid.is_empty() {
        return Err(Error::InvalidConfig("correlation grid is empty".into()));
    }
    let nt = theta_grid.len();
    let r = (0..xi_grid.len() * nt)
        .into_par_iter()
        .map(|k| point(scheme, xi_grid[k / nt], theta_grid[k % nt]))
        .collect::<Result<Vec<f64>>>()?;
    let r_max = point(scheme, 0.0, 0.0)?;
    Ok(CorrelationSurface {
        xi_grid: xi_grid.to_vec(),
        theta_grid: theta_grid.to_vec(),
        r,
        pipeline,
        r_max,
    })
}

/// `n` evenly spaced angles over [0, π).
pub fn half_turn_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect()
}
