//! Detector traces behind the analyzers: a 2Δf beat whose low-passed mean is κ²
//! whatever the analyzer angles.
//!
//! `cargo run --example local_traces`

use std::f64::consts::FRAC_PI_4;

use mzi_eraser::field::Sign;
use mzi_eraser::scheme::{propagate, SchemeConfig};
use mzi_eraser::signal::{lowpass, synthesize_intensity, FilterSpec, TimeGrid};

fn main() -> mzi_eraser::Result<()> {
    let base = SchemeConfig::default();
    let grid = TimeGrid::default_for_beat(base.beat_hz());
    println!("grid: {} samples at {:.0} Hz", grid.n_samples, grid.sample_rate);
    for (xi, theta) in [(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_4), (1.0, -0.3)] {
        let cfg = base.clone().with_analyzers(xi, theta).with_phi(0.7);
        let r = propagate(&cfg, Sign::Plus)?;
        let raw = synthesize_intensity(&r.port_a, &grid)?;
        let filtered = lowpass(&raw, &FilterSpec::default(), cfg.beat_hz())?;
        println!(
            "ξ = {xi:.3}: raw I_s in [{:.4}, {:.4}], low-passed mean {:.12} (κ² = {})",
            raw.min(),
            raw.max(),
            filtered.mean(),
            cfg.kappa().powi(2)
        );
    }
    Ok(())
}
