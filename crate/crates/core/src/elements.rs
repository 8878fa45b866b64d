//! Transfer operations of the optical elements: beam splitters, polarizers,
//! wave plates, phase shifters and acousto-optic frequency shifters.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * Beam splitter: symmetric, reflection picks up a factor `i`.
//!   `out1 = (in1 + i·in2)/√2`, `out2 = (i·in1 + in2)/√2`.
//! * Polarizing beam splitter: H is transmitted (`in1 → outB`, `in2 → outA`)
//!   with factor 1, V is reflected (`in1 → outA`, `in2 → outB`) with factor `i`.
//!
//! The relative sign of the two tones inside one output port decides whether
//! the low-pass-selected correlation goes as cos²(ξ+θ) or cos²(ξ−θ), so the
//! PBS reflection phases are exposed on [`PolarizingBeamSplitter`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{PortField, Polarization, Sign, Tone, ToneLabel};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// 2×2 complex matrix acting on (H, V) Jones components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolMatrix(pub Matrix2<Complex64>);

impl PolMatrix {
    pub fn identity() -> Self {
        PolMatrix(Matrix2::identity())
    }

    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        PolMatrix(Matrix2::new(re(m00), re(m01), re(m10), re(m11)))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn apply_jones(&self, h: Complex64, v: Complex64) -> (Complex64, Complex64) {
        let out = self.0 * Vector2::new(h, v);
        (out[0], out[1])
    }

    pub fn apply_tone(&self, tone: Tone) -> Tone {
        let (h, v) = self.apply_jones(tone.jones_h, tone.jones_v);
        Tone {
            jones_h: h,
            jones_v: v,
            ..tone
        }
    }

    pub fn apply(&self, field: &PortField) -> PortField {
        field.map_tones(|t| self.apply_tone(t))
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn determinant(&self) -> Complex64 {
        self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &PolMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> PolMatrix {
        PolMatrix(self.0.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.max_abs_diff(&(*self * *self)) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&PolMatrix::identity()) <= tol
    }
}

impl Mul for PolMatrix {
    type Output = PolMatrix;

    fn mul(self, rhs: PolMatrix) -> PolMatrix {
        PolMatrix(self.0 * rhs.0)
    }
}

/// Linear polarizer transmitting along `(cos α, sin α)`.
pub fn polarizer_projector(alpha: f64) -> PolMatrix {
    let (s, c) = alpha.sin_cos();
    PolMatrix::from_real(c * c, s * c, s * c, s * s)
}

/// Half-wave plate with fast axis at `alpha`.
pub fn hwp_matrix(alpha: f64) -> PolMatrix {
    let (s, c) = (2.0 * alpha).sin_cos();
    PolMatrix::from_real(c, s, s, -c)
}

/// Scalar amplitude of a Jones pair along the polarizer axis `(cos α, sin α)`.
pub fn project_on_axis(h: Complex64, v: Complex64, alpha: f64) -> Complex64 {
    let (s, c) = alpha.sin_cos();
    h * c + v * s
}

/// Balanced, lossless, polarization-independent beam splitter.
pub fn bs_apply(in1: &PortField, in2: &PortField) -> (PortField, PortField) {
    let t = re(FRAC_1_SQRT_2);
    let r = I * FRAC_1_SQRT_2;
    let out1 = in1.scaled(t).superpose(&in2.scaled(r));
    let out2 = in1.scaled(r).superpose(&in2.scaled(t));
    (out1, out2)
}

/// Polarizing beam splitter with explicit transmission and reflection factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizingBeamSplitter {
    /// H transmission factor (both inputs).
    pub transmit: Complex64,
    /// V reflection factor for light entering at input 1 (exits at port A).
    pub reflect_from_1: Complex64,
    /// V reflection factor for light entering at input 2 (exits at port B).
    pub reflect_from_2: Complex64,
}

impl Default for PolarizingBeamSplitter {
    fn default() -> Self {
        PolarizingBeamSplitter {
            transmit: re(1.0),
            reflect_from_1: I,
            reflect_from_2: I,
        }
    }
}

impl PolarizingBeamSplitter {
    /// Extra phase on the input-1 reflection only.
    pub fn with_port_a_reflection_shift(mut self, phase: f64) -> Self {
        self.reflect_from_1 *= Complex64::from_polar(1.0, phase);
        self
    }

    /// Splits every input tone into its H and V parts and routes them.
    /// Output tones carry their polarization origin in the label.
    pub fn apply(&self, in1: &PortField, in2: &PortField) -> (PortField, PortField) {
        let zero = Complex64::new(0.0, 0.0);
        let part = |t: &Tone, pol: Polarization, factor: Complex64| -> Tone {
            let label = ToneLabel {
                pol_origin: Some(pol),
                ..t.label
            };
            match pol {
                Polarization::H => Tone::new(t.jones_h * factor, zero, t.freq_offset, label),
                Polarization::V => Tone::new(zero, t.jones_v * factor, t.freq_offset, label),
            }
        };

        let mut out_a = PortField::new();
        let mut out_b = PortField::new();
        for t in in1.tones() {
            out_a.push(part(t, Polarization::V, self.reflect_from_1));
            out_b.push(part(t, Polarization::H, self.transmit));
        }
        for t in in2.tones() {
            out_a.push(part(t, Polarization::H, self.transmit));
            out_b.push(part(t, Polarization::V, self.reflect_from_2));
        }
        (out_a, out_b)
    }
}

/// [`PolarizingBeamSplitter::apply`] with the default convention.
pub fn pbs_apply(in1: &PortField, in2: &PortField) -> (PortField, PortField) {
    PolarizingBeamSplitter::default().apply(in1, in2)
}

/// Static phase shift `e^{iφ}` on every tone.
pub fn phase_apply(field: &PortField, phi: f64) -> PortField {
    field.scaled(Complex64::from_polar(1.0, phi))
}

/// Acousto-optic frequency shift by `sign·Δf`.
///
/// Each arm holds a single AOM, so a tone that is already detuned is rejected.
pub fn aom_apply(field: &PortField, sign: Sign, delta_f: f64) -> Result<PortField> {
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::InvalidConfig(format!("AOM detuning must be positive, got {delta_f}")));
    }
    if let Some(t) = field.tones().iter().find(|t| t.label.detuning_sign.is_some()) {
        return Err(Error::AlreadyDetuned(t.label.to_string()));
    }
    Ok(field.map_tones(|t| Tone {
        freq_offset: t.freq_offset + sign.value() * delta_f,
        label: ToneLabel {
            detuning_sign: Some(sign),
            ..t.label
        },
        ..t
    }))
}
