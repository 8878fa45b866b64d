//! Closed-form oracles, correlation pipelines, term bookkeeping, fringe
//! fitting and CHSH post-analysis.

mod chsh;
mod correlation;
mod fit;
mod oracle;
mod terms;

pub use chsh::{chsh_from_r, chsh_s, correlation_from_r, ChshAngles, CHSH_ANGLES};
pub use correlation::{
    amplitude_product_r, correlation_at, correlation_surface, evaluate, half_turn_grid, intensity_product_dc,
    intensity_product_dc_tones, intensity_spectrum, kept_amplitude, sampled_amplitude_product_r, surface_with,
    CorrelationSurface, Evaluation, Pipeline, SampledPipeline,
};
pub use fit::{fringe_fit, FringeFit};
pub use oracle::{oracle_correlation, oracle_intensity_product, oracle_local, oracle_projected};
pub use terms::{classify_product_terms, enumerate_pairings, Pairing, TermClassification, TermPair};
