//! The heterodyne Mach-Zehnder eraser topology and its variants.
//!
//! Light path: laser (H polarized, entering BS1 at input 2) → BS1 → one AOM
//! per arm with opposite detuning signs → 45° preparation (polarizer or
//! half-wave plate) → static phase φ on arm 1 → combiner (PBS or BS) →
//! optional output analyzers ξ (port A) and θ (port B).

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::{
    aom_apply, bs_apply, hwp_matrix, phase_apply, polarizer_projector, project_on_axis,
    PolarizingBeamSplitter,
};
use crate::error::{Error, Result};
use crate::field::{Arm, PortField, Polarization, Sign, Tone, ToneLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combiner {
    #[serde(rename = "PBS")]
    Pbs,
    #[serde(rename = "BS")]
    Bs,
}

/// Element that gives both arms a common 45° polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerPrep {
    Polarizer45,
    #[serde(rename = "HWP225")]
    Hwp225,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignPolicy {
    Fixed(Sign),
    RandomPerShot,
}

/// `Normalized` leaves out the 50 % loss of the inner 45° polarizer, so every
/// labeled component reaches the combiner with amplitude √I₀/2.
/// `EnergyConserving` keeps it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossConvention {
    Normalized,
    EnergyConserving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// Source intensity just before the first splitter.
    #[serde(rename = "intensity_I0")]
    pub intensity_i0: f64,
    /// AOM detuning magnitude, Hz.
    pub delta_f: f64,
    /// Static phase on arm 1, radians.
    pub phi: f64,
    pub combiner: Combiner,
    pub inner_prep: InnerPrep,
    /// Port A output polarizer angle, radians.
    pub analyzer_xi: Option<f64>,
    /// Port B output polarizer angle, radians.
    pub analyzer_theta: Option<f64>,
    pub sign_policy: SignPolicy,
    pub loss_convention: LossConvention,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            intensity_i0: 1.0,
            delta_f: 10e3,
            phi: 0.0,
            combiner: Combiner::Pbs,
            inner_prep: InnerPrep::Polarizer45,
            analyzer_xi: None,
            analyzer_theta: None,
            sign_policy: SignPolicy::Fixed(Sign::Plus),
            loss_convention: LossConvention::Normalized,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.intensity_i0 > 0.0 && self.intensity_i0.is_finite()) {
            return bad(format!("intensity_I0 must be positive, got {}", self.intensity_i0));
        }
        if !(self.delta_f > 0.0 && self.delta_f.is_finite()) {
            return bad(format!("delta_f must be positive, got {}", self.delta_f));
        }
        if !self.phi.is_finite() {
            return bad("phi must be finite".into());
        }
        for (name, a) in [("analyzer_xi", self.analyzer_xi), ("analyzer_theta", self.analyzer_theta)] {
            if a.is_some_and(|a| !a.is_finite()) {
                return bad(format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    /// Amplitude of each labeled component at the combiner.
    pub fn kappa(&self) -> f64 {
        let lossless = self.intensity_i0.sqrt() / 2.0;
        match (self.loss_convention, self.inner_prep) {
            (LossConvention::EnergyConserving, InnerPrep::Polarizer45) => lossless / SQRT_2,
            _ => lossless,
        }
    }

    /// Beat frequency between the two detuned tones, 2Δf.
    pub fn beat_hz(&self) -> f64 {
        2.0 * self.delta_f
    }

    pub fn with_analyzers(mut self, xi: f64, theta: f64) -> Self {
        self.analyzer_xi = Some(xi);
        self.analyzer_theta = Some(theta);
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_combiner(mut self, combiner: Combiner) -> Self {
        self.combiner = combiner;
        self
    }
}

/// Fields at the two detectors for one shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub port_a: PortField,
    pub port_b: PortField,
    pub sign_used: Sign,
    pub analyzer_xi: Option<f64>,
    pub analyzer_theta: Option<f64>,
}

impl PropagationResult {
    pub fn analyzers(&self) -> Result<(f64, f64)> {
        match (self.analyzer_xi, self.analyzer_theta) {
            (Some(x), Some(t)) => Ok((x, t)),
            _ => Err(Error::MissingAnalyzers),
        }
    }

    /// Projected scalar tones (amplitude along the analyzer axis) at port A and B.
    pub fn projected_tones(&self) -> Result<(Vec<ScalarTone>, Vec<ScalarTone>)> {
        let (xi, theta) = self.analyzers()?;
        Ok((scalar_tones(&self.port_a, xi), scalar_tones(&self.port_b, theta)))
    }
}

/// A tone reduced to its amplitude along an analyzer axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTone {
    pub amplitude: Complex64,
    pub freq_offset: f64,
    pub label: ToneLabel,
}

pub fn scalar_tones(field: &PortField, axis: f64) -> Vec<ScalarTone> {
    field
        .tones()
        .iter()
        .map(|t| ScalarTone {
            amplitude: project_on_axis(t.jones_h, t.jones_v, axis),
            freq_offset: t.freq_offset,
            label: t.label,
        })
        .collect()
}

/// The fixed topology with a swappable PBS (used to inject convention faults).
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    pub config: SchemeConfig,
    pub pbs: PolarizingBeamSplitter,
}

impl Scheme {
    pub fn new(config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Scheme {
            config,
            pbs: PolarizingBeamSplitter::default(),
        })
    }

    pub fn with_pbs(mut self, pbs: PolarizingBeamSplitter) -> Self {
        self.pbs = pbs;
        self
    }

    /// Propagates the source to both detectors with arm 1 detuned by `sign·Δf`.
    pub fn propagate(&self, sign: Sign) -> Result<PropagationResult> {
        let cfg = &self.config;
        let source = PortField::from_tones([Tone::horizontal(cfg.intensity_i0.sqrt())]);
        let (out1, out2) = bs_apply(&PortField::new(), &source);
        let on_arm = |arm: Arm| move |l: ToneLabel| ToneLabel { path: Some(arm), ..l };
        let arm1 = aom_apply(&out1.relabel(on_arm(Arm::One)), sign, cfg.delta_f)?;
        let arm2 = aom_apply(&out2.relabel(on_arm(Arm::Two)), -sign, cfg.delta_f)?;

        let prep = match cfg.inner_prep {
            InnerPrep::Polarizer45 => polarizer_projector(FRAC_PI_4),
            InnerPrep::Hwp225 => hwp_matrix(FRAC_PI_8),
        };
        let restore = match (cfg.inner_prep, cfg.loss_convention) {
            (InnerPrep::Polarizer45, LossConvention::Normalized) => SQRT_2,
            _ => 1.0,
        };
        let prepare = |f: &PortField| prep.apply(f).scaled(Complex64::new(restore, 0.0));
        let arm1 = phase_apply(&prepare(&arm1), cfg.phi);
        let arm2 = prepare(&arm2);

        let (mut port_a, mut port_b) = match cfg.combiner {
            Combiner::Pbs => self.pbs.apply(&arm1, &arm2),
            Combiner::Bs => {
                let (o1, o2) = bs_apply(&arm1, &arm2);
                (o2, o1)
            }
        };
        if let Some(xi) = cfg.analyzer_xi {
            port_a = polarizer_projector(xi).apply(&port_a);
        }
        if let Some(theta) = cfg.analyzer_theta {
            port_b = polarizer_projector(theta).apply(&port_b);
        }
        Ok(PropagationResult {
            port_a,
            port_b,
            sign_used: sign,
            analyzer_xi: cfg.analyzer_xi,
            analyzer_theta: cfg.analyzer_theta,
        })
    }
}

/// Propagates `cfg` with the default element conventions.
pub fn propagate(cfg: &SchemeConfig, sign: Sign) -> Result<PropagationResult> {
    Scheme::new(cfg.clone())?.propagate(sign)
}

/// Intensity seen by a detector gated at the beat frequency: the mean of
/// `|E|²` at `t = k / beat_hz`, k = 0..gates.
pub fn gated_power(field: &PortField, beat_hz: f64, gates: usize) -> f64 {
    let gates = gates.max(1);
    (0..gates)
        .map(|k| field.intensity_at(k as f64 / beat_hz))
        .sum::<f64>()
        / gates as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi: f64,
    pub i_a: f64,
    pub i_b: f64,
}

/// Number of beat-synchronous gates averaged per fringe point.
pub const ERASER_GATES: usize = 8;

/// Phase scan of the BS-combined eraser.
///
/// The two arms are detuned oppositely, so the output fringe moves at 2Δf and
/// a slow detector sees nothing. Each point is the beat-synchronous gated
/// intensity, which is the static fringe `2κ²(1 ∓ cos φ)`.
pub fn eraser_fringe_scan(cfg: &SchemeConfig, phis: &[f64]) -> Result<Vec<FringePoint>> {
    if cfg.combiner != Combiner::Bs {
        return Err(Error::WrongCombiner { expected: "BS" });
    }
    if cfg.analyzer_xi.is_some() || cfg.analyzer_theta.is_some() {
        return Err(Error::InvalidConfig("eraser scan runs without analyzers".into()));
    }
    let SignPolicy::Fixed(sign) = cfg.sign_policy else {
        return Err(Error::InvalidConfig("eraser scan needs a fixed sign policy".into()));
    };
    let mut scheme = Scheme::new(cfg.clone())?;
    phis.iter()
        .map(|&phi| {
            scheme.config.phi = phi;
            let r = scheme.propagate(sign)?;
            Ok(FringePoint {
                phi,
                i_a: gated_power(&r.port_a, cfg.beat_hz(), ERASER_GATES),
                i_b: gated_power(&r.port_b, cfg.beat_hz(), ERASER_GATES),
            })
        })
        .collect()
}

/// Outcome of [`check_port_form`]: the leftover global phase of each port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortFormReport {
    pub global_phase_a: f64,
    pub global_phase_b: f64,
}

/// The reference tone structure of the two PBS outputs, before any global phase:
/// port A = (−V₁e^{iφ}·sinξ, +H₂·cosξ)κ, port B = (+H₁e^{iφ}·cosθ, +V₂·sinθ)κ.
/// Without analyzers the sin/cos factors are dropped and full Jones pairs are compared.
pub fn expected_port_form(cfg: &SchemeConfig, sign: Sign) -> [(ToneLabel, f64, Complex64); 4] {
    let k = cfg.kappa();
    let e_phi = Complex64::from_polar(k, cfg.phi);
    let k = Complex64::new(k, 0.0);
    let (sx, cx) = cfg.analyzer_xi.map_or((1.0, 1.0), f64::sin_cos);
    let (st, ct) = cfg.analyzer_theta.map_or((1.0, 1.0), f64::sin_cos);
    let df = cfg.delta_f;
    let s = sign.value();
    [
        (ToneLabel::new(Arm::One, Polarization::V, sign), s * df, -e_phi * sx),
        (ToneLabel::new(Arm::Two, Polarization::H, -sign), -s * df, k * cx),
        (ToneLabel::new(Arm::One, Polarization::H, sign), s * df, e_phi * ct),
        (ToneLabel::new(Arm::Two, Polarization::V, -sign), -s * df, k * st),
    ]
}

/// Checks a PBS-combined result tone by tone against the reference coefficients,
/// allowing one global phase per port.
pub fn check_port_form(cfg: &SchemeConfig, result: &PropagationResult) -> Result<PortFormReport> {
    if cfg.combiner != Combiner::Pbs {
        return Err(Error::WrongCombiner { expected: "PBS" });
    }
    let expected = expected_port_form(cfg, result.sign_used);
    let tol = 1e-12 * cfg.kappa().max(1.0);
    let mut problems = Vec::new();

    let mut check_port = |name: &str, field: &PortField, axis: Option<f64>, exp: &[(ToneLabel, f64, Complex64)]| {
        let amplitude = |t: &Tone, pol: Polarization| match axis {
            Some(a) => project_on_axis(t.jones_h, t.jones_v, a),
            None => match pol {
                Polarization::H => t.jones_h,
                Polarization::V => t.jones_v,
            },
        };
        let mut found = Vec::new();
        for (label, freq, want) in exp {
            match field.find(label) {
                None => problems.push(format!("port {name}: missing tone {label}")),
                Some(t) => {
                    if (t.freq_offset - freq).abs() > 1e-9 * freq.abs().max(1.0) {
                        problems.push(format!("port {name}: tone {label} at {} Hz, expected {freq} Hz", t.freq_offset));
                    }
                    let pol = label.pol_origin.unwrap();
                    if axis.is_none() {
                        let leak = match pol {
                            Polarization::H => t.jones_v,
                            Polarization::V => t.jones_h,
                        };
                        if leak.norm() > tol {
                            problems.push(format!("port {name}: tone {label} has a cross-polarized component"));
                        }
                    }
                    found.push((*label, amplitude(t, pol), *want));
                }
            }
        }
        for t in field.tones() {
            if !exp.iter().any(|(l, _, _)| *l == t.label) && t.power() > tol * tol {
                problems.push(format!("port {name}: unexpected tone {}", t.label));
            }
        }
        // global phase from the strongest expected tone
        let Some(&(_, got, want)) = found.iter().max_by(|a, b| a.2.norm().total_cmp(&b.2.norm())) else {
            return 0.0;
        };
        let g = Complex64::from_polar(1.0, (got / want).arg());
        for (label, got, want) in &found {
            if (got - g * want).norm() > tol {
                problems.push(format!(
                    "port {name}: tone {label} amplitude {got:.6} differs from {:.6} (relative sign or scale)",
                    g * want
                ));
            }
        }
        g.arg()
    };

    let phase_a = check_port("A", &result.port_a, cfg.analyzer_xi, &expected[..2]);
    let phase_b = check_port("B", &result.port_b, cfg.analyzer_theta, &expected[2..]);
    if problems.is_empty() {
        Ok(PortFormReport {
            global_phase_a: phase_a,
            global_phase_b: phase_b,
        })
    } else {
        Err(Error::FormMismatch(problems))
    }
}
