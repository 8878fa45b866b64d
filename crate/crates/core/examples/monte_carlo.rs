//! Seeded ensemble over random anti-correlated detuning signs.
//!
//! The sign flips the direction of the beat but not the low-passed observables,
//! so every shot gives the same R.
//!
//! `cargo run --release --example monte_carlo`

use mzi_eraser::experiment::{run_shots, ExperimentConfig};
use mzi_eraser::scheme::SignPolicy;

fn main() -> mzi_eraser::Result<()> {
    let mut cfg = ExperimentConfig {
        n_shots: 2000,
        seed: 7,
        ..Default::default()
    };
    cfg.scheme = cfg.scheme.with_analyzers(0.2, 0.5);
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    let e = run_shots(&cfg)?;

    let plus = e.records.iter().filter(|r| r.sign.value() > 0.0).count();
    println!("{} shots, {plus} with arm-1 sign +, mean sign {:+.4}", e.records.len(), e.sign_mean());
    for (name, stat) in &e.aggregates {
        println!("  {name:<12} mean {:>+.12}  std {:.2e}", stat.mean, stat.std);
    }
    println!("expected R = κ⁴cos²(ξ+θ) = {:.12}", cfg.scheme.kappa().powi(4) * (0.7f64).cos().powi(2));
    Ok(())
}
