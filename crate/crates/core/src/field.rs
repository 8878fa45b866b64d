//! Multi-tone polarized fields in a frame rotating at the laser frequency.
//!
//! A [`Tone`] is one monochromatic component: a Jones pair and a frequency
//! offset from the laser line. A [`PortField`] is the set of tones present at
//! one spatial port. Static phases live in the complex amplitudes; the
//! frequency offset carries only the AOM detuning.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Neg;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Interferometer arm a tone travelled through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub fn index(self) -> u8 {
        match self {
            Arm::One => 1,
            Arm::Two => 2,
        }
    }
}

/// Linear polarization component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Sign of a detuning, or of a Monte Carlo shot's AOM choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Provenance of a tone. Pure bookkeeping: labels never enter any numeric result.
///
/// Fields stay `None` until the element that decides them has been passed:
/// the first splitter sets the arm, the AOM sets the detuning sign and the
/// polarizing combiner sets the polarization origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ToneLabel {
    pub path: Option<Arm>,
    pub pol_origin: Option<Polarization>,
    pub detuning_sign: Option<Sign>,
}

impl ToneLabel {
    pub const SOURCE: ToneLabel = ToneLabel {
        path: None,
        pol_origin: None,
        detuning_sign: None,
    };

    pub fn new(path: Arm, pol: Polarization, sign: Sign) -> Self {
        ToneLabel {
            path: Some(path),
            pol_origin: Some(pol),
            detuning_sign: Some(sign),
        }
    }
}

impl fmt::Display for ToneLabel {
    /// `V1+`, `H2-`; unresolved fields print as `?`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = match self.pol_origin {
            Some(Polarization::H) => 'H',
            Some(Polarization::V) => 'V',
            None => '?',
        };
        let path = self.path.map_or('?', |a| char::from(b'0' + a.index()));
        let sign = self.detuning_sign.map_or('0', Sign::symbol);
        write!(f, "{pol}{path}{sign}")
    }
}

/// One monochromatic polarized field component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub jones_h: Complex64,
    pub jones_v: Complex64,
    /// Offset from the laser frequency, Hz.
    pub freq_offset: f64,
    pub label: ToneLabel,
}

impl Tone {
    pub fn new(jones_h: Complex64, jones_v: Complex64, freq_offset: f64, label: ToneLabel) -> Self {
        Tone {
            jones_h,
            jones_v,
            freq_offset,
            label,
        }
    }

    /// Horizontally polarized baseband tone with a real amplitude.
    pub fn horizontal(amplitude: f64) -> Self {
        Tone::new(
            Complex64::new(amplitude, 0.0),
            Complex64::new(0.0, 0.0),
            0.0,
            ToneLabel::SOURCE,
        )
    }

    pub fn power(&self) -> f64 {
        self.jones_h.norm_sqr() + self.jones_v.norm_sqr()
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        Tone {
            jones_h: self.jones_h * factor,
            jones_v: self.jones_v * factor,
            ..self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.jones_h.is_finite() && self.jones_v.is_finite() && self.freq_offset.is_finite()
    }

    /// Jones pair at time `t` including the detuning rotation.
    pub fn jones_at(&self, t: f64) -> (Complex64, Complex64) {
        let rot = Complex64::from_polar(1.0, TAU * self.freq_offset * t);
        (self.jones_h * rot, self.jones_v * rot)
    }
}

/// The tones present at one spatial port.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PortField {
    tones: Vec<Tone>,
}

impl PortField {
    pub fn new() -> Self {
        PortField { tones: Vec::new() }
    }

    pub fn from_tones(tones: impl IntoIterator<Item = Tone>) -> Self {
        tones
            .into_iter()
            .fold(PortField::new(), |mut acc, t| {
                acc.push(t);
                acc
            })
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    /// Adds a tone, merging it into an existing tone with the same offset and label.
    pub fn push(&mut self, tone: Tone) {
        match self
            .tones
            .iter_mut()
            .find(|t| t.freq_offset == tone.freq_offset && t.label == tone.label)
        {
            Some(existing) => {
                existing.jones_h += tone.jones_h;
                existing.jones_v += tone.jones_v;
            }
            None => self.tones.push(tone),
        }
    }

    /// Coherent sum of two port fields.
    pub fn superpose(&self, other: &PortField) -> PortField {
        let mut out = self.clone();
        for &t in &other.tones {
            out.push(t);
        }
        out
    }

    pub fn map_tones(&self, f: impl FnMut(Tone) -> Tone) -> PortField {
        PortField::from_tones(self.tones.iter().copied().map(f))
    }

    pub fn scaled(&self, factor: Complex64) -> PortField {
        self.map_tones(|t| t.scaled(factor))
    }

    pub fn relabel(&self, f: impl Fn(ToneLabel) -> ToneLabel) -> PortField {
        self.map_tones(|t| Tone {
            label: f(t.label),
            ..t
        })
    }

    pub fn max_abs_offset(&self) -> f64 {
        self.tones
            .iter()
            .map(|t| t.freq_offset.abs())
            .fold(0.0, f64::max)
    }

    /// Jones pairs summed per distinct frequency, labels ignored.
    pub fn spectral_lines(&self) -> Vec<(f64, Complex64, Complex64)> {
        let mut lines: Vec<(f64, Complex64, Complex64)> = Vec::new();
        for t in &self.tones {
            // -0.0 and 0.0 are the same line
            let f = t.freq_offset + 0.0;
            match lines.iter_mut().find(|(g, _, _)| *g == f) {
                Some(line) => {
                    line.1 += t.jones_h;
                    line.2 += t.jones_v;
                }
                None => lines.push((f, t.jones_h, t.jones_v)),
            }
        }
        lines
    }

    /// Infinite-horizon time average of |E(t)|².
    ///
    /// Equal-frequency tones are added coherently before squaring; distinct
    /// frequencies contribute independently since their cross terms average out.
    pub fn time_avg_power(&self) -> f64 {
        self.spectral_lines()
            .iter()
            .map(|(_, h, v)| h.norm_sqr() + v.norm_sqr())
            .sum()
    }

    /// Total field at time `t`.
    pub fn jones_at(&self, t: f64) -> (Complex64, Complex64) {
        self.tones.iter().fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(h, v), tone| {
                let (th, tv) = tone.jones_at(t);
                (h + th, v + tv)
            },
        )
    }

    /// Instantaneous intensity |E(t)|² summed over both polarizations.
    pub fn intensity_at(&self, t: f64) -> f64 {
        let (h, v) = self.jones_at(t);
        h.norm_sqr() + v.norm_sqr()
    }

    pub fn find(&self, label: &ToneLabel) -> Option<&Tone> {
        self.tones.iter().find(|t| &t.label == label)
    }
}

impl FromIterator<Tone> for PortField {
    fn from_iter<I: IntoIterator<Item = Tone>>(iter: I) -> Self {
        PortField::from_tones(iter)
    }
}

/// Coherent sum of two port fields.
pub fn superpose(a: &PortField, b: &PortField) -> PortField {
    a.superpose(b)
}

/// See [`PortField::time_avg_power`].
pub fn time_avg_power(f: &PortField) -> f64 {
    f.time_avg_power()
}
