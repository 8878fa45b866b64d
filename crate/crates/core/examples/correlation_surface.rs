//! R(ξ, θ) from both pipelines on a 13×13 grid.
//!
//! Low-passing the product of the analyzed amplitudes keeps only the
//! zero-net-detuning terms and gives cos²(ξ+θ). Low-passing the product of the
//! detector intensities instead gives 1 − ½·sin2ξ·sin2θ.
//!
//! `cargo run --release --example correlation_surface`

use mzi_eraser::analysis::{half_turn_grid, Pipeline};
use mzi_eraser::experiment::{scan_xitheta, ExperimentConfig, Scan};

fn main() -> mzi_eraser::Result<()> {
    let g = half_turn_grid(13);
    let cfg = ExperimentConfig {
        scan: Scan::XiTheta { xi: g.clone(), theta: g },
        n_shots: 4,
        ..Default::default()
    };
    let amp = scan_xitheta(&cfg, Pipeline::AmplitudeProductLPF)?.normalized();
    let int = scan_xitheta(&cfg, Pipeline::IntensityProductLPF)?.normalized();

    let cos2 = |x: f64, t: f64| (x + t).cos().powi(2);
    println!("amplitude pipeline: max |R − cos²(ξ+θ)| = {:.2e}", amp.max_deviation(cos2));
    println!(
        "intensity pipeline: max |R − (1 − ½ sin2ξ sin2θ)| = {:.2e}, max |R − cos²(ξ+θ)| = {:.3}",
        int.max_deviation(|x, t| 1.0 - 0.5 * (2.0 * x).sin() * (2.0 * t).sin()),
        int.max_deviation(cos2)
    );
    println!("numerical rank: amplitude {}, intensity {}", amp.numerical_rank(1e-9), int.numerical_rank(1e-9));

    println!("\nnormalized amplitude surface (rows ξ, columns θ):");
    for i in 0..amp.xi_grid.len() {
        let row: Vec<String> = (0..amp.theta_grid.len()).map(|j| format!("{:.2}", amp.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
