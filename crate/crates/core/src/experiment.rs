//! Seeded Monte Carlo over the random, anti-correlated AOM detuning signs.
//!
//! Each shot draws one sign for arm 1 (arm 2 gets the opposite) from a
//! ChaCha20 stream keyed by the seed and selected by the shot index, so a shot's
//! sign does not depend on which thread evaluates it or in what order.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    fringe_fit, intensity_product_dc, sampled_amplitude_product_r, surface_with, CorrelationSurface, FringeFit,
    Pipeline, SampledPipeline,
};
use crate::error::{Error, Result};
use crate::field::Sign;
use crate::scheme::{gated_power, Combiner, FringePoint, PropagationResult, Scheme, SchemeConfig, ERASER_GATES};
use crate::signal::{lowpass, synthesize_intensity, FilterSpec, TimeGrid};

/// Sampling grid expressed relative to the beat period 1/(2Δf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub samples_per_beat: usize,
    pub beat_periods: usize,
    #[serde(default)]
    pub t0: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            samples_per_beat: 64,
            beat_periods: 16,
            t0: 0.0,
        }
    }
}

impl GridParams {
    pub fn resolve(&self, beat_hz: f64) -> Result<TimeGrid> {
        if self.samples_per_beat < 8 {
            return Err(Error::InvalidConfig(format!(
                "samples_per_beat must be at least 8, got {}",
                self.samples_per_beat
            )));
        }
        if self.beat_periods == 0 {
            return Err(Error::InvalidConfig("beat_periods must be at least 1".into()));
        }
        TimeGrid::for_beat(beat_hz, self.samples_per_beat, self.beat_periods, self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scan {
    None,
    Phi(Vec<f64>),
    XiTheta { xi: Vec<f64>, theta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeConfig,
    pub grid: GridParams,
    pub filter: FilterSpec,
    pub n_shots: usize,
    pub seed: u64,
    pub scan: Scan,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scheme: SchemeConfig::default(),
            grid: GridParams::default(),
            filter: FilterSpec::default(),
            n_shots: 16,
            seed: 2022,
            scan: Scan::None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        let grid = self.time_grid()?;
        crate::signal::LowPass::design(&self.filter, grid.sample_rate, self.scheme.beat_hz())?;
        if self.n_shots == 0 {
            return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
        }
        match &self.scan {
            Scan::Phi(p) if p.is_empty() => Err(Error::InvalidConfig("phi scan list is empty".into())),
            Scan::XiTheta { xi, theta } if xi.is_empty() || theta.is_empty() => {
                Err(Error::InvalidConfig("xi/theta scan list is empty".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        self.grid.resolve(self.scheme.beat_hz())
    }

    pub fn sampled_pipeline(&self) -> Result<SampledPipeline> {
        Ok(SampledPipeline {
            grid: self.time_grid()?,
            filter: self.filter,
            beat_hz: self.scheme.beat_hz(),
        })
    }
}

/// Arm-1 detuning sign for shot `shot`. Bernoulli(½), counter-based.
pub fn draw_sign(seed: u64, shot: u64) -> Sign {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    if rng.next_u32() & 1 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Sign used by shot `shot` under the configured policy.
pub fn shot_sign(cfg: &ExperimentConfig, shot: u64) -> Sign {
    match cfg.scheme.sign_policy {
        crate::scheme::SignPolicy::Fixed(s) => s,
        crate::scheme::SignPolicy::RandomPerShot => draw_sign(cfg.seed, shot),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Observables of one shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub sign: Sign,
    /// Unfiltered time-averaged port powers (tone domain).
    pub power_a: f64,
    pub power_b: f64,
    /// Mean of the low-passed sampled detector traces.
    pub filtered_a: f64,
    pub filtered_b: f64,
    /// Amplitude-product correlation, sampled route (analyzers only).
    pub r_amplitude: Option<f64>,
    /// Intensity-product DC, sampled route (analyzers only).
    pub r_intensity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and sample standard deviation, summed in index order.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub records: Vec<ShotRecord>,
    pub aggregates: BTreeMap<String, Stat>,
    pub scan: Scan,
}

impl EnsembleResult {
    pub fn stat(&self, name: &str) -> Option<Stat> {
        self.aggregates.get(name).copied()
    }

    /// Mean of the ±1 sign values.
    pub fn sign_mean(&self) -> f64 {
        self.records.iter().map(|r| r.sign.value()).sum::<f64>() / self.records.len() as f64
    }
}

fn map_shots<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    match exec {
        Execution::Serial => (0..n as u64).map(f).collect(),
        Execution::Parallel => (0..n as u64).into_par_iter().map(&f).collect(),
    }
}

fn filtered_mean(result: &PropagationResult, port_b: bool, p: &SampledPipeline) -> Result<f64> {
    let port = if port_b { &result.port_b } else { &result.port_a };
    let trace = synthesize_intensity(port, &p.grid)?;
    Ok(lowpass(&trace, &p.filter, p.beat_hz)?.mean())
}

fn observe(scheme: &Scheme, cfg: &ExperimentConfig, p: &SampledPipeline, shot: u64) -> Result<ShotRecord> {
    let sign = shot_sign(cfg, shot);
    let r = scheme.propagate(sign)?;
    let analyzed = r.analyzers().is_ok();
    Ok(ShotRecord {
        shot,
        sign,
        power_a: r.port_a.time_avg_power(),
        power_b: r.port_b.time_avg_power(),
        filtered_a: filtered_mean(&r, false, p)?,
        filtered_b: filtered_mean(&r, true, p)?,
        r_amplitude: analyzed.then(|| sampled_amplitude_product_r(&r, p)).transpose()?,
        r_intensity: analyzed.then(|| intensity_product_dc(&r, p)).transpose()?,
    })
}

/// Runs `n_shots` shots in parallel.
pub fn run_shots(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    run_shots_with(cfg, Execution::Parallel)
}

pub fn run_shots_with(cfg: &ExperimentConfig, exec: Execution) -> Result<EnsembleResult> {
    cfg.validate()?;
    let scheme = Scheme::new(cfg.scheme.clone())?;
    let p = cfg.sampled_pipeline()?;
    let records = map_shots(cfg.n_shots, exec, |shot| observe(&scheme, cfg, &p, shot))?;

    let mut aggregates = BTreeMap::new();
    type Column = (&'static str, fn(&ShotRecord) -> Option<f64>);
    let columns: [Column; 7] = [
        ("sign", |r| Some(r.sign.value())),
        ("power_a", |r| Some(r.power_a)),
        ("power_b", |r| Some(r.power_b)),
        ("filtered_a", |r| Some(r.filtered_a)),
        ("filtered_b", |r| Some(r.filtered_b)),
        ("r_amplitude", |r| r.r_amplitude),
        ("r_intensity", |r| r.r_intensity),
    ];
    for (name, get) in columns {
        let values: Option<Vec<f64>> = records.iter().map(get).collect();
        if let Some(v) = values {
            aggregates.insert(name.to_string(), Stat::of(&v));
        }
    }
    Ok(EnsembleResult {
        records,
        aggregates,
        scan: cfg.scan.clone(),
    })
}

fn shot_average(cfg: &ExperimentConfig, scheme: &Scheme, p: &SampledPipeline, pipeline: Pipeline) -> Result<f64> {
    let values = (0..cfg.n_shots as u64)
        .map(|shot| {
            let r = scheme.propagate(shot_sign(cfg, shot))?;
            match pipeline {
                Pipeline::AmplitudeProductLPF => sampled_amplitude_product_r(&r, p),
                Pipeline::IntensityProductLPF => intensity_product_dc(&r, p),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Stat::of(&values).mean)
}

/// Shot-averaged pipeline value at a single analyzer setting.
pub fn ensemble_correlation(cfg: &ExperimentConfig, pipeline: Pipeline, xi: f64, theta: f64) -> Result<f64> {
    let scheme = Scheme::new(cfg.scheme.clone().with_analyzers(xi, theta))?;
    shot_average(cfg, &scheme, &cfg.sampled_pipeline()?, pipeline)
}

/// Shot-averaged correlation surface over the configured (ξ, θ) scan.
pub fn scan_xitheta(cfg: &ExperimentConfig, pipeline: Pipeline) -> Result<CorrelationSurface> {
    cfg.validate()?;
    let Scan::XiTheta { xi, theta } = &cfg.scan else {
        return Err(Error::InvalidConfig("scan_xitheta needs an XiTheta scan".into()));
    };
    let scheme = Scheme::new(cfg.scheme.clone())?;
    let p = cfg.sampled_pipeline()?;
    surface_with(&scheme, xi, theta, pipeline, |scheme, x, t| {
        let mut s = scheme.clone();
        s.config = s.config.with_analyzers(x, t);
        shot_average(cfg, &s, &p, pipeline)
    })
}

/// Fringe table of a φ scan with per-port fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub mode: Combiner,
    pub rows: Vec<FringePoint>,
    pub fit_a: FringeFit,
    pub fit_b: FringeFit,
}

/// φ scan in the configured combiner mode.
///
/// BS mode reads the beat-synchronous gated detector (the eraser fringe);
/// PBS mode reads the mean of the low-passed detector traces.
pub fn scan_phi(cfg: &ExperimentConfig) -> Result<PhiScan> {
    cfg.validate()?;
    let Scan::Phi(phis) = &cfg.scan else {
        return Err(Error::InvalidConfig("scan_phi needs a Phi scan".into()));
    };
    let p = cfg.sampled_pipeline()?;
    let beat = cfg.scheme.beat_hz();
    let rows = phis
        .par_iter()
        .map(|&phi| {
            let scheme = Scheme::new(cfg.scheme.clone().with_phi(phi))?;
            let shots = (0..cfg.n_shots as u64)
                .map(|shot| {
                    let r = scheme.propagate(shot_sign(cfg, shot))?;
                    Ok(match cfg.scheme.combiner {
                        Combiner::Bs => (
                            gated_power(&r.port_a, beat, ERASER_GATES),
                            gated_power(&r.port_b, beat, ERASER_GATES),
                        ),
                        Combiner::Pbs => (filtered_mean(&r, false, &p)?, filtered_mean(&r, true, &p)?),
                    })
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let a: Vec<f64> = shots.iter().map(|s| s.0).collect();
            let b: Vec<f64> = shots.iter().map(|s| s.1).collect();
            Ok(FringePoint {
                phi,
                i_a: Stat::of(&a).mean,
                i_b: Stat::of(&b).mean,
            })
        })
        .collect::<Result<Vec<FringePoint>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.phi).collect();
    let ya: Vec<f64> = rows.iter().map(|r| r.i_a).collect();
    let yb: Vec<f64> = rows.iter().map(|r| r.i_b).collect();
    Ok(PhiScan {
        mode: cfg.scheme.combiner,
        fit_a: fringe_fit(&x, &ya)?,
        fit_b: fringe_fit(&x, &yb)?,
        rows,
    })
}

/// `n` evenly spaced phases over [0, 2π).
pub fn full_turn_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}
