//! CHSH S from the low-pass-selected correlation surface, and from a few
//! separable surfaces for contrast.
//!
//! `cargo run --example chsh`

use mzi_eraser::analysis::{chsh_from_r, Pipeline, CHSH_ANGLES};
use mzi_eraser::experiment::{ensemble_correlation, ExperimentConfig};

fn main() -> mzi_eraser::Result<()> {
    let cfg = ExperimentConfig {
        n_shots: 4,
        ..Default::default()
    };
    println!("settings: {CHSH_ANGLES:?}");
    for pipeline in [Pipeline::AmplitudeProductLPF, Pipeline::IntensityProductLPF] {
        let s = chsh_from_r(|x, t| ensemble_correlation(&cfg, pipeline, x, t))?;
        println!("{pipeline:?}: S = {s:.6}");
    }
    println!("2√2 = {:.6}", 2.0 * std::f64::consts::SQRT_2);

    let separable: [(&str, fn(f64) -> f64); 3] = [
        ("cos²", |x| x.cos().powi(2)),
        ("1 + ½cos2x", |x| 1.0 + 0.5 * (2.0 * x).cos()),
        ("1 + sin x", |x| 1.0 + x.sin()),
    ];
    for (name, f) in separable {
        let s = chsh_from_r(|x, t| Ok(f(x) * f(t)))?;
        println!("separable f(ξ)f(θ), f = {name}: S = {s:.6}");
    }
    Ok(())
}
