//! φ scans with the PBS and the non-polarizing BS as combiner.
//!
//! Orthogonal polarizations at a PBS output cannot interfere, so I_A(φ) is flat.
//! Replacing the PBS by a 50:50 BS erases the which-path polarization and the
//! fringe returns with full visibility (read at the beat-synchronous gates).
//!
//! `cargo run --example eraser_fringes`

use mzi_eraser::experiment::{full_turn_grid, scan_phi, ExperimentConfig, Scan};
use mzi_eraser::scheme::Combiner;

fn main() -> mzi_eraser::Result<()> {
    for mode in [Combiner::Pbs, Combiner::Bs] {
        let mut cfg = ExperimentConfig {
            scan: Scan::Phi(full_turn_grid(12)),
            n_shots: 4,
            ..Default::default()
        };
        cfg.scheme = cfg.scheme.with_combiner(mode);
        let scan = scan_phi(&cfg)?;
        println!("{mode:?}:");
        for row in &scan.rows {
            println!("  φ = {:5.3}   I_A = {:.6}   I_B = {:.6}", row.phi, row.i_a, row.i_b);
        }
        println!(
            "  visibility A = {:.3e}, B = {:.3e}\n",
            scan.fit_a.visibility, scan.fit_b.visibility
        );
    }
    Ok(())
}
