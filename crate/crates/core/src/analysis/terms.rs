//! Bookkeeping of the port-A × port-B product terms.

use serde::Serialize;

use crate::error::Result;
use crate::field::{Arm, Polarization, Sign, ToneLabel};
use crate::scheme::PropagationResult;

/// One product term `E_s(tone) · E_i(tone)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermPair {
    pub label_s: ToneLabel,
    pub label_i: ToneLabel,
    /// Sum of the two tones' offsets, Hz.
    pub net_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermClassification {
    /// Zero net detuning: survives the low-pass filter.
    pub kept: Vec<TermPair>,
    /// Beating at the net offset: removed by the filter.
    pub blocked: Vec<TermPair>,
}

/// Offsets closer to zero than this count as DC.
const DC_TOLERANCE_HZ: f64 = 1e-6;

/// Splits every port-A × port-B tone pair by whether its product is DC.
pub fn classify_product_terms(result: &PropagationResult) -> Result<TermClassification> {
    result.analyzers()?;
    let mut kept = Vec::new();
    let mut blocked = Vec::new();
    for s in result.port_a.tones() {
        for i in result.port_b.tones() {
            let pair = TermPair {
                label_s: s.label,
                label_i: i.label,
                net_offset: s.freq_offset + i.freq_offset,
            };
            if pair.net_offset.abs() <= DC_TOLERANCE_HZ {
                kept.push(pair);
            } else {
                blocked.push(pair);
            }
        }
    }
    Ok(TermClassification { kept, blocked })
}

/// A polarization/detuning combination of the two arms for one shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Pairing {
    pub path1: ToneLabel,
    pub path2: ToneLabel,
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.path1, self.path2)
    }
}

/// The four polarization pairings {V₁–V₂, V₁–H₂, H₁–H₂, H₁–V₂} crossed with the
/// two anti-correlated sign assignments.
pub fn enumerate_pairings() -> Vec<Pairing> {
    use Polarization::{H, V};
    let pols = [(V, V), (V, H), (H, H), (H, V)];
    let mut out = Vec::with_capacity(8);
    for (p1, p2) in pols {
        for s in [Sign::Plus, Sign::Minus] {
            out.push(Pairing {
                path1: ToneLabel::new(Arm::One, p1, s),
                path2: ToneLabel::new(Arm::Two, p2, -s),
            });
        }
    }
    out
}
