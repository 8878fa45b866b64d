//! Which port-A × port-B product terms survive the low-pass filter.
//!
//! `cargo run --example term_bookkeeping`

use mzi_eraser::analysis::{classify_product_terms, enumerate_pairings};
use mzi_eraser::field::Sign;
use mzi_eraser::scheme::{propagate, SchemeConfig};

fn main() -> mzi_eraser::Result<()> {
    let pairings = enumerate_pairings();
    println!("{} polarization/detuning pairings:", pairings.len());
    for p in &pairings {
        println!("  {p}");
    }

    let cfg = SchemeConfig::default().with_analyzers(0.3, 0.5);
    for sign in [Sign::Plus, Sign::Minus] {
        let terms = classify_product_terms(&propagate(&cfg, sign)?)?;
        println!("\narm-1 sign {}:", sign.symbol());
        for p in &terms.kept {
            println!("  kept     {} · {}   {:+.0} Hz", p.label_s, p.label_i, p.net_offset);
        }
        for p in &terms.blocked {
            println!("  blocked  {} · {}   {:+.0} Hz", p.label_s, p.label_i, p.net_offset);
        }
    }
    Ok(())
}
