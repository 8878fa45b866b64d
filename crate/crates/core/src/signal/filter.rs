//! Low-pass filters that remove the 2Δf beat before the DC is read out.
//!
//! `PeriodAverage` is a boxcar spanning whole beat periods, which nulls every
//! harmonic of the beat exactly. `FIR` is a Blackman-windowed sinc, the model
//! of a real electronic filter. Both drop their warm-up samples instead of
//! zero padding, so the output grid starts later and holds fewer samples.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trace::{Sample, Trace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FilterSpec {
    PeriodAverage { n_periods: usize },
    #[serde(rename = "FIR")]
    Fir { cutoff: f64, n_taps: usize },
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec::PeriodAverage { n_periods: 1 }
    }
}

impl FilterSpec {
    /// FIR with cutoff at a quarter of the beat and 257 taps.
    pub fn default_fir(beat_hz: f64) -> Self {
        FilterSpec::Fir {
            cutoff: beat_hz / 4.0,
            n_taps: 257,
        }
    }
}

/// A filter designed for a particular sample rate and beat frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum LowPass {
    /// Boxcar over `window` samples.
    Boxcar { window: usize },
    Fir { taps: Vec<f64> },
}

impl LowPass {
    pub fn design(spec: &FilterSpec, sample_rate: f64, beat_hz: f64) -> Result<Self> {
        match *spec {
            FilterSpec::PeriodAverage { n_periods } => {
                if n_periods == 0 {
                    return Err(Error::InvalidFilter("PeriodAverage needs at least one period".into()));
                }
                let per_period = sample_rate / beat_hz;
                let rounded = per_period.round();
                if rounded < 2.0 || (per_period - rounded).abs() > 1e-9 * per_period {
                    return Err(Error::InvalidFilter(format!(
                        "beat period spans {per_period} samples, not a whole number >= 2"
                    )));
                }
                Ok(LowPass::Boxcar {
                    window: n_periods * rounded as usize,
                })
            }
            FilterSpec::Fir { cutoff, n_taps } => {
                if !(cutoff > 0.0 && cutoff < beat_hz) {
                    return Err(Error::InvalidFilter(format!(
                        "FIR cutoff {cutoff} Hz must lie strictly between 0 and the beat {beat_hz} Hz"
                    )));
                }
                if cutoff >= sample_rate / 2.0 {
                    return Err(Error::InvalidFilter("FIR cutoff above Nyquist".into()));
                }
                if n_taps < 3 {
                    return Err(Error::InvalidFilter("FIR needs at least 3 taps".into()));
                }
                Ok(LowPass::Fir {
                    taps: windowed_sinc(cutoff / sample_rate, n_taps),
                })
            }
        }
    }

    /// Samples consumed before the first valid output.
    pub fn len(&self) -> usize {
        match self {
            LowPass::Boxcar { window } => *window,
            LowPass::Fir { taps } => taps.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply<T: Sample>(&self, trace: &Trace<T>) -> Result<Trace<T>> {
        let n = trace.len();
        let w = self.len();
        if w > n {
            return Err(Error::WindowTooLong { window: w, len: n });
        }
        let samples = match self {
            LowPass::Boxcar { window } => boxcar(&trace.samples, *window),
            LowPass::Fir { taps } => convolve_valid(&trace.samples, taps),
        };
        Ok(Trace {
            samples,
            grid: trace.grid.skip(w - 1),
        })
    }

    /// Complex gain at `freq` Hz.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let w = TAU * freq / sample_rate;
        match self {
            LowPass::Boxcar { window } => {
                let g = 1.0 / *window as f64;
                (0..*window).map(|k| Complex64::from_polar(g, -w * k as f64)).sum()
            }
            LowPass::Fir { taps } => taps
                .iter()
                .enumerate()
                .map(|(k, &h)| Complex64::from_polar(h, -w * k as f64))
                .sum(),
        }
    }
}

/// Designs the filter and applies it.
pub fn lowpass<T: Sample>(trace: &Trace<T>, spec: &FilterSpec, beat_hz: f64) -> Result<Trace<T>> {
    LowPass::design(spec, trace.grid.sample_rate, beat_hz)?.apply(trace)
}

/// Blackman-windowed sinc taps with unit DC gain; `cutoff` in cycles/sample.
pub fn windowed_sinc(cutoff: f64, n_taps: usize) -> Vec<f64> {
    let m = (n_taps - 1) as f64;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|k| {
            let x = k as f64 - m / 2.0;
            let sinc = if x == 0.0 {
                2.0 * cutoff
            } else {
                (TAU * cutoff * x).sin() / (PI * x)
            };
            let r = k as f64 / m;
            let window = 0.42 - 0.5 * (TAU * r).cos() + 0.08 * (2.0 * TAU * r).cos();
            sinc * window
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= sum);
    taps
}

fn boxcar<T: Sample>(x: &[T], window: usize) -> Vec<T> {
    let g = 1.0 / window as f64;
    // Each window is summed directly; blocks of `window` keep rounding local.
    let n_out = x.len() + 1 - window;
    let mut out = Vec::with_capacity(n_out);
    let mut acc = x[..window].iter().fold(T::zero(), |a, &v| a + v);
    out.push(acc * g);
    for k in 1..n_out {
        if k % window == 0 {
            acc = x[k..k + window].iter().fold(T::zero(), |a, &v| a + v);
        } else {
            acc = acc + x[k + window - 1] + x[k - 1] * -1.0;
        }
        out.push(acc * g);
    }
    out
}

fn convolve_valid<T: Sample>(x: &[T], taps: &[f64]) -> Vec<T> {
    let m = taps.len();
    (0..=x.len() - m)
        .map(|k| {
            taps.iter()
                .rev()
                .zip(&x[k..k + m])
                .fold(T::zero(), |acc, (&h, &v)| acc + v * h)
        })
        .collect()
}
