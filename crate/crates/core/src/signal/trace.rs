use std::io::Write;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Hz.
    pub sample_rate: f64,
    pub n_samples: usize,
    /// Time of the first sample, seconds.
    pub t0: f64,
}

impl TimeGrid {
    pub fn new(sample_rate: f64, n_samples: usize, t0: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("sample rate must be positive, got {sample_rate}")));
        }
        if n_samples < 2 {
            return Err(Error::InvalidConfig(format!("a grid needs at least 2 samples, got {n_samples}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidConfig("t0 must be finite".into()));
        }
        Ok(TimeGrid {
            sample_rate,
            n_samples,
            t0,
        })
    }

    /// Grid with an integer number of samples per beat period.
    pub fn for_beat(beat_hz: f64, samples_per_beat: usize, beat_periods: usize, t0: f64) -> Result<Self> {
        TimeGrid::new(beat_hz * samples_per_beat as f64, samples_per_beat * beat_periods, t0)
    }

    /// Default grid: 64 samples per beat period, 16 periods.
    pub fn default_for_beat(beat_hz: f64) -> Self {
        TimeGrid::for_beat(beat_hz, 64, 16, 0.0).expect("positive beat frequency")
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(|k| self.time(k))
    }

    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    /// Requires the rate to exceed 8x the highest beat, 2·`max_offset`.
    pub fn check_nyquist(&self, max_offset: f64) -> Result<()> {
        let beat_hz = 2.0 * max_offset.abs();
        if self.sample_rate < 8.0 * beat_hz * (1.0 - 1e-12) {
            return Err(Error::Nyquist {
                sample_rate: self.sample_rate,
                beat_hz,
            });
        }
        Ok(())
    }

    /// Grid of the trailing `n` samples after dropping `skip` leading ones.
    pub fn skip(&self, skip: usize) -> TimeGrid {
        TimeGrid {
            sample_rate: self.sample_rate,
            n_samples: self.n_samples - skip,
            t0: self.time(skip),
        }
    }
}

/// Values a trace can hold: real intensities or complex amplitudes.
pub trait Sample: Copy + Add<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn csv_header() -> &'static [&'static str];
    fn csv_fields(&self) -> Vec<f64>;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }

    fn csv_header() -> &'static [&'static str] {
        &["t", "value"]
    }

    fn csv_fields(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn csv_header() -> &'static [&'static str] {
        &["t", "re", "im"]
    }

    fn csv_fields(&self) -> Vec<f64> {
        vec![self.re, self.im]
    }
}

/// Uniformly sampled time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub samples: Vec<T>,
    pub grid: TimeGrid,
}

/// Real intensity record from one detector.
pub type DetectorTrace = Trace<f64>;
/// Complex amplitude record along an analyzer axis.
pub type AmplitudeTrace = Trace<Complex64>;

impl<T: Sample> Trace<T> {
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> T) -> Self {
        Trace {
            samples: grid.times().map(f).collect(),
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> T {
        let n = self.samples.len() as f64;
        self.samples.iter().fold(T::zero(), |acc, &x| acc + x) * (1.0 / n)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Trace {
            samples: self.samples.iter().map(|&x| f(x)).collect(),
            grid: self.grid,
        }
    }

    /// Writes `t,value` (or `t,re,im`) rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(T::csv_header())?;
        for (k, x) in self.samples.iter().enumerate() {
            let mut row = vec![fmt_f64(self.grid.time(k))];
            row.extend(x.csv_fields().into_iter().map(fmt_f64));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

impl DetectorTrace {
    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl AmplitudeTrace {
    pub fn intensity(&self) -> DetectorTrace {
        Trace {
            samples: self.samples.iter().map(|z| z.norm_sqr()).collect(),
            grid: self.grid,
        }
    }
}

/// Full double precision in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pointwise product of two traces on the same grid (zero delay).
pub fn product_trace<T: Sample>(a: &Trace<T>, b: &Trace<T>) -> Result<Trace<T>> {
    if a.grid != b.grid || a.len() != b.len() {
        return Err(Error::GridMismatch);
    }
    Ok(Trace {
        samples: a.samples.iter().zip(&b.samples).map(|(&x, &y)| x * y).collect(),
        grid: a.grid,
    })
}
