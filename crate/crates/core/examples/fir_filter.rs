//! The two low-pass filters: response at DC and at the 2Δf beat.
//!
//! `cargo run --example fir_filter`

use mzi_eraser::signal::{FilterSpec, LowPass, TimeGrid};

fn main() -> mzi_eraser::Result<()> {
    let beat = 20e3;
    let grid = TimeGrid::default_for_beat(beat);
    let specs = [
        FilterSpec::default(),
        FilterSpec::PeriodAverage { n_periods: 4 },
        FilterSpec::default_fir(beat),
        FilterSpec::Fir {
            cutoff: beat / 4.0,
            n_taps: 65,
        },
    ];
    println!("fs = {:.0} Hz, beat = {beat:.0} Hz", grid.sample_rate);
    for spec in specs {
        let f = LowPass::design(&spec, grid.sample_rate, beat)?;
        let db = |freq: f64| 20.0 * f.response(freq, grid.sample_rate).norm().log10();
        println!(
            "{spec:?}: {} taps, DC gain {:.9}, at beat {:.1} dB, at 2×beat {:.1} dB",
            f.len(),
            f.response(0.0, grid.sample_rate).norm(),
            db(beat),
            db(2.0 * beat)
        );
    }
    Ok(())
}
