//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! terminal. Reference values come from a brute-force model written here:
//! explicit Jones matrices on a four-mode (2 paths × 2 polarizations) state,
//! evaluated at sample times and averaged by Riemann sums.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use mzi_eraser::analysis::{
    chsh_from_r, classify_product_terms, enumerate_pairings, half_turn_grid, CorrelationSurface, Pipeline,
};
use mzi_eraser::elements::{bs_apply, hwp_matrix, pbs_apply, polarizer_projector, PolMatrix};
use mzi_eraser::experiment::{
    ensemble_correlation, full_turn_grid, run_shots_with, scan_phi, scan_xitheta, Execution, ExperimentConfig,
    GridParams, Scan,
};
use mzi_eraser::field::{PortField, Sign, Tone, ToneLabel};
use mzi_eraser::scheme::{propagate, Combiner, InnerPrep, LossConvention, SchemeConfig, SignPolicy};
use mzi_eraser::signal::{lowpass, synthesize_intensity, FilterSpec, LowPass, TimeGrid, Trace};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;
type Jones = Vector2<C>;

const I: C = C::new(0.0, 1.0);

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// brute-force reference model

/// Detector-plane Jones vectors (port A, port B) at time `t`.
fn brute_ports(cfg: &SchemeConfig, sign: Sign, t: f64) -> (Jones, Jones) {
    let input2 = Jones::new(c(cfg.intensity_i0.sqrt()), c(0.0));
    let input1 = Jones::zeros();
    // symmetric 50:50 splitter acting on the path index, identity on polarization
    let r = c(1.0 / SQRT_2);
    let mut arm1 = (input1 + input2 * I) * r;
    let mut arm2 = (input1 * I + input2) * r;

    let w = TAU * sign.value() * cfg.delta_f * t;
    arm1 *= C::from_polar(1.0, w);
    arm2 *= C::from_polar(1.0, -w);

    let prep: Matrix2<C> = match cfg.inner_prep {
        InnerPrep::Polarizer45 => {
            let g = if cfg.loss_convention == LossConvention::Normalized { SQRT_2 } else { 1.0 };
            Matrix2::new(c(0.5), c(0.5), c(0.5), c(0.5)) * c(g)
        }
        InnerPrep::Hwp225 => {
            let (s, k) = (FRAC_PI_4.sin(), FRAC_PI_4.cos());
            Matrix2::new(c(k), c(s), c(s), c(-k))
        }
    };
    arm1 = prep * arm1 * C::from_polar(1.0, cfg.phi);
    arm2 = prep * arm2;

    match cfg.combiner {
        // H transmits, V reflects with i
        Combiner::Pbs => (Jones::new(arm2[0], I * arm1[1]), Jones::new(arm1[0], I * arm2[1])),
        Combiner::Bs => {
            let out1 = (arm1 + arm2 * I) * r;
            let out2 = (arm1 * I + arm2) * r;
            (out2, out1)
        }
    }
}

fn project(e: &Jones, alpha: f64) -> C {
    e[0] * alpha.cos() + e[1] * alpha.sin()
}

fn beat(cfg: &SchemeConfig) -> f64 {
    2.0 * cfg.delta_f
}

/// Mean of `f` over one beat period (exact for trigonometric polynomials of
/// degree < n in the beat frequency).
fn period_mean(cfg: &SchemeConfig, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let period = 1.0 / beat(cfg);
    (0..n).map(|k| f(period * k as f64 / n as f64)).sum::<f64>() / n as f64
}

fn period_mean_c(cfg: &SchemeConfig, n: usize, f: impl Fn(f64) -> C) -> C {
    let period = 1.0 / beat(cfg);
    (0..n).map(|k| f(period * k as f64 / n as f64)).sum::<C>() / n as f64
}

/// |⟨E_s·E_i⟩|² by brute force.
fn brute_r(cfg: &SchemeConfig, sign: Sign, xi: f64, theta: f64) -> f64 {
    period_mean_c(cfg, 64, |t| {
        let (a, b) = brute_ports(cfg, sign, t);
        project(&a, xi) * project(&b, theta)
    })
    .norm_sqr()
}

/// ⟨I_s·I_i⟩ by brute force.
fn brute_intensity_product(cfg: &SchemeConfig, sign: Sign, xi: f64, theta: f64) -> f64 {
    period_mean(cfg, 64, |t| {
        let (a, b) = brute_ports(cfg, sign, t);
        project(&a, xi).norm_sqr() * project(&b, theta).norm_sqr()
    })
}

fn cos2(x: f64, t: f64) -> f64 {
    (x + t).cos().powi(2)
}

fn bare() -> SchemeConfig {
    SchemeConfig::default()
}

// ---------------------------------------------------------------------------
// criteria

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn flat_locals() -> Verdict {
    let phis = full_turn_grid(24);
    let mut worst_mean = 0.0f64;
    let mut worst_vis = 0.0f64;
    for policy in [SignPolicy::Fixed(Sign::Plus), SignPolicy::Fixed(Sign::Minus), SignPolicy::RandomPerShot] {
        let mut cfg = ExperimentConfig {
            scan: Scan::Phi(phis.clone()),
            n_shots: 4,
            ..Default::default()
        };
        cfg.scheme.sign_policy = policy;
        let scan = scan_phi(&cfg).map_err(|e| e.to_string())?;
        worst_vis = worst_vis.max(scan.fit_a.visibility).max(scan.fit_b.visibility);
        let half = cfg.scheme.intensity_i0 / 2.0;
        for row in &scan.rows {
            // brute-force time average of the same configuration
            let sc = cfg.scheme.clone().with_phi(row.phi);
            let ba = period_mean(&sc, 32, |t| brute_ports(&sc, Sign::Plus, t).0.norm_squared());
            let bb = period_mean(&sc, 32, |t| brute_ports(&sc, Sign::Plus, t).1.norm_squared());
            for v in [row.i_a, row.i_b, ba, bb] {
                worst_mean = worst_mean.max((v - half).abs());
            }
            let r = propagate(&sc, Sign::Minus).map_err(|e| e.to_string())?;
            worst_mean = worst_mean
                .max((r.port_a.time_avg_power() - half).abs())
                .max((r.port_b.time_avg_power() - half).abs());
        }
    }
    ensure(
        worst_vis <= 1e-9 && worst_mean <= 1e-12,
        format!("max visibility {worst_vis:.2e} (≤1e-9), max |mean − I0/2| {worst_mean:.2e} (≤1e-12)"),
    )
}

fn eraser_recovery() -> Verdict {
    let mut cfg = ExperimentConfig {
        scan: Scan::Phi(full_turn_grid(24)),
        n_shots: 8,
        ..Default::default()
    };
    cfg.scheme = cfg.scheme.with_combiner(Combiner::Bs);
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    let scan = scan_phi(&cfg).map_err(|e| e.to_string())?;
    let vis_err = (scan.fit_a.visibility - 1.0).abs().max((scan.fit_b.visibility - 1.0).abs());
    let sums: Vec<f64> = scan.rows.iter().map(|r| r.i_a + r.i_b).collect();
    let spread = sums.iter().cloned().fold(f64::MIN, f64::max) - sums.iter().cloned().fold(f64::MAX, f64::min);
    // the gated detector samples at beat nodes; compare against the brute model there
    let mut oracle_err = 0.0f64;
    for row in &scan.rows {
        let sc = cfg.scheme.clone().with_phi(row.phi);
        let (a, b) = brute_ports(&sc, Sign::Plus, 0.0);
        oracle_err = oracle_err.max((a.norm_squared() - row.i_a).abs()).max((b.norm_squared() - row.i_b).abs());
    }
    ensure(
        vis_err <= 1e-9 && spread <= 1e-12 && oracle_err <= 1e-12,
        format!("|V − 1| {vis_err:.2e} (≤1e-9), I_A+I_B spread {spread:.2e} (≤1e-12), brute-model error {oracle_err:.2e}"),
    )
}

fn projected_locals() -> Verdict {
    let grid = TimeGrid::default_for_beat(beat(&bare()));
    let mut pointwise = 0.0f64;
    for (xi, theta, phi) in [(0.3, -0.7, 0.0), (FRAC_PI_4, FRAC_PI_8, 1.1), (1.2, 0.4, -2.0)] {
        for sign in [Sign::Plus, Sign::Minus] {
            let sc = bare().with_analyzers(xi, theta).with_phi(phi);
            let r = propagate(&sc, sign).map_err(|e| e.to_string())?;
            let ts = synthesize_intensity(&r.port_a, &grid).map_err(|e| e.to_string())?;
            let ti = synthesize_intensity(&r.port_b, &grid).map_err(|e| e.to_string())?;
            let k2 = sc.intensity_i0 / 4.0;
            for (k, t) in grid.times().enumerate() {
                let psi = phi + sign.value() * TAU * beat(&sc) * t;
                let s = k2 * (1.0 - (2.0 * xi).sin() * psi.cos());
                let i = k2 * (1.0 + (2.0 * theta).sin() * psi.cos());
                let (a, b) = brute_ports(&sc, sign, t);
                pointwise = pointwise
                    .max((ts.samples[k] - s).abs())
                    .max((ti.samples[k] - i).abs())
                    .max((project(&a, xi).norm_sqr() - s).abs())
                    .max((project(&b, theta).norm_sqr() - i).abs());
            }
        }
    }
    let mut means = Vec::new();
    let axis: Vec<f64> = (0..5).map(|k| -1.3 + 0.65 * k as f64).collect();
    for &xi in &axis {
        for &theta in &axis {
            for &phi in &axis {
                let sc = bare().with_analyzers(xi, theta).with_phi(phi);
                let r = propagate(&sc, Sign::Plus).map_err(|e| e.to_string())?;
                for port in [&r.port_a, &r.port_b] {
                    let tr = synthesize_intensity(port, &grid).map_err(|e| e.to_string())?;
                    means.push(lowpass(&tr, &FilterSpec::default(), beat(&sc)).map_err(|e| e.to_string())?.mean());
                }
            }
        }
    }
    let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    let off = means.iter().map(|m| (m - 0.25).abs()).fold(0.0, f64::max);
    ensure(
        pointwise <= 1e-10 && spread <= 1e-9 && off <= 1e-9,
        format!(
            "pointwise error {pointwise:.2e} (≤1e-10), filtered-mean spread over 5×5×5 {spread:.2e} (≤1e-9), |mean − κ²| {off:.2e}"
        ),
    )
}

fn headline_correlation() -> Verdict {
    let start = Instant::now();
    let g = half_turn_grid(13);
    let mut cfg = ExperimentConfig {
        scan: Scan::XiTheta { xi: g.clone(), theta: g.clone() },
        n_shots: 8,
        ..Default::default()
    };
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;

    // the brute-force oracle itself reproduces cos²(ξ+θ)
    let r00 = brute_r(&cfg.scheme, Sign::Plus, 0.0, 0.0);
    let mut oracle_check = 0.0f64;
    for &x in &g {
        for &t in &g {
            for sign in [Sign::Plus, Sign::Minus] {
                oracle_check = oracle_check.max((brute_r(&cfg.scheme, sign, x, t) / r00 - cos2(x, t)).abs());
            }
        }
    }

    let ideal = scan_xitheta(&cfg, Pipeline::AmplitudeProductLPF).map_err(|e| e.to_string())?.normalized();
    let dev_ideal = ideal.max_deviation(cos2);
    let mut fir_cfg = cfg.clone();
    fir_cfg.filter = FilterSpec::default_fir(cfg.scheme.beat_hz());
    let fir = scan_xitheta(&fir_cfg, Pipeline::AmplitudeProductLPF).map_err(|e| e.to_string())?.normalized();
    let dev_fir = fir.max_deviation(cos2);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        oracle_check <= 1e-12 && dev_ideal <= 1e-9 && dev_fir <= 1e-6 && secs < 60.0,
        format!(
            "13×13: PeriodAverage {dev_ideal:.2e} (≤1e-9), FIR {dev_fir:.2e} (≤1e-6), brute oracle vs cos² {oracle_check:.2e}, {secs:.1} s (<60 s)"
        ),
    )
}

fn short(l: &ToneLabel) -> String {
    let s = l.to_string();
    s[..s.len() - 1].to_string()
}

fn term_bookkeeping() -> Verdict {
    let mut problems = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let sc = bare().with_analyzers(0.4, -0.9);
        let r = propagate(&sc, sign).map_err(|e| e.to_string())?;
        let cl = classify_product_terms(&r).map_err(|e| e.to_string())?;
        let mut kept: Vec<(String, String)> = cl.kept.iter().map(|p| (short(&p.label_s), short(&p.label_i))).collect();
        let mut blocked: Vec<(String, String)> =
            cl.blocked.iter().map(|p| (short(&p.label_s), short(&p.label_i))).collect();
        kept.sort();
        blocked.sort();
        let want_kept = vec![("H2".to_string(), "H1".to_string()), ("V1".to_string(), "V2".to_string())];
        let want_blocked = vec![("H2".to_string(), "V2".to_string()), ("V1".to_string(), "H1".to_string())];
        if kept != want_kept {
            problems.push(format!("kept {kept:?}"));
        }
        if blocked != want_blocked {
            problems.push(format!("blocked {blocked:?}"));
        }
        if cl.blocked.iter().any(|p| (p.net_offset.abs() - 2.0 * sc.delta_f).abs() > 1e-9) {
            problems.push("blocked offset ≠ ±2Δf".into());
        }
        if cl.kept.iter().any(|p| p.net_offset != 0.0) {
            problems.push("kept offset ≠ 0".into());
        }
    }
    let pairings = enumerate_pairings();
    let distinct: std::collections::HashSet<_> = pairings.iter().collect();
    if pairings.len() != 8 || distinct.len() != 8 {
        problems.push(format!("{} pairings", pairings.len()));
    }
    if problems.is_empty() {
        Ok("kept {V1·V2, H2·H1}, blocked {V1·H1, H2·V2} at |±2Δf|, 8 pairings".into())
    } else {
        Err(problems.join("; "))
    }
}

fn pipeline_inequivalence() -> Verdict {
    let g = half_turn_grid(13);
    let sc = bare();
    let closed = |x: f64, t: f64| 1.0 - 0.5 * (2.0 * x).sin() * (2.0 * t).sin();
    // first: brute time average vs closed form
    let b00 = brute_intensity_product(&sc, Sign::Plus, 0.0, 0.0);
    let mut brute_dev = 0.0f64;
    for &x in &g {
        for &t in &g {
            for sign in [Sign::Plus, Sign::Minus] {
                brute_dev = brute_dev.max((brute_intensity_product(&sc, sign, x, t) / b00 - closed(x, t)).abs());
            }
        }
    }
    let mut cfg = ExperimentConfig {
        scan: Scan::XiTheta { xi: g.clone(), theta: g },
        n_shots: 4,
        ..Default::default()
    };
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    let s: CorrelationSurface =
        scan_xitheta(&cfg, Pipeline::IntensityProductLPF).map_err(|e| e.to_string())?.normalized();
    let dev = s.max_deviation(closed);
    let gap = s.max_deviation(cos2);
    ensure(
        brute_dev <= 1e-12 && dev <= 1e-9 && gap >= 0.4,
        format!("brute oracle vs closed form {brute_dev:.2e}, surface vs 1 − ½sin2ξ·sin2θ {dev:.2e} (≤1e-9), max |· − cos²| {gap:.3} (≥0.4)"),
    )
}

fn randomness_protocol() -> Verdict {
    let mut cfg = ExperimentConfig {
        n_shots: 10_000,
        seed: 20_221,
        grid: GridParams {
            samples_per_beat: 16,
            beat_periods: 2,
            t0: 0.0,
        },
        ..Default::default()
    };
    cfg.scheme = cfg.scheme.with_analyzers(0.35, -0.2).with_phi(0.8);
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    let par = run_shots_with(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let ser = run_shots_with(&cfg, Execution::Serial).map_err(|e| e.to_string())?;
    let n = par.records.len() as f64;
    let mean = par.sign_mean();
    let sigma = 1.0 / n.sqrt();
    let r_std = par.stat("r_amplitude").map(|s| s.std).unwrap_or(f64::NAN);
    let identical = serde_json::to_string(&par).unwrap() == serde_json::to_string(&ser).unwrap();
    ensure(
        mean.abs() <= 3.0 * sigma && r_std <= 1e-12 && identical,
        format!(
            "10000 shots: sign mean {mean:+.4} (|·| ≤ {:.4}), R std {r_std:.2e} (≤1e-12), serial == parallel bytes: {identical}",
            3.0 * sigma
        ),
    )
}

fn chsh() -> Verdict {
    let mut cfg = ExperimentConfig {
        n_shots: 4,
        ..Default::default()
    };
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    let s = chsh_from_r(|x, t| ensemble_correlation(&cfg, Pipeline::AmplitudeProductLPF, x, t))
        .map_err(|e| e.to_string())?;
    let s_brute = chsh_from_r(|x, t| Ok(brute_r(&bare(), Sign::Plus, x, t))).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst = f64::MIN;
    for _ in 0..100 {
        // random non-negative profiles from a few Fourier modes
        let mut profile = || {
            let modes: Vec<(f64, f64)> = (1..=3).map(|_| (unit(), TAU * unit())).collect();
            let total: f64 = modes.iter().map(|m| m.0).sum::<f64>() + 1e-3;
            move |x: f64| {
                1.0 + modes.iter().enumerate().map(|(k, (a, p))| a * ((k + 1) as f64 * x + p).cos()).sum::<f64>() / total
            }
        };
        let f = profile();
        let g = profile();
        let v = chsh_from_r(|x, t| Ok(f(x) * g(t))).map_err(|e| e.to_string())?;
        worst = worst.max(v);
    }
    ensure(
        (s - 2.0 * SQRT_2).abs() <= 1e-6 && (s_brute - 2.0 * SQRT_2).abs() <= 1e-9 && worst <= 2.0 + 1e-9,
        format!("S = {s:.9} (brute {s_brute:.9}, 2√2 ± 1e-6), max S over 100 separable surfaces {worst:.6} (≤2)"),
    )
}

fn filter_contract() -> Verdict {
    let beat_hz = beat(&bare());
    let grid = TimeGrid::default_for_beat(beat_hz);
    let fir_spec = FilterSpec::default_fir(beat_hz);
    let fir = LowPass::design(&fir_spec, grid.sample_rate, beat_hz).map_err(|e| e.to_string())?;
    let LowPass::Fir { taps } = &fir else {
        return Err("default FIR did not design to taps".into());
    };
    // direct DTFT sums of the taps
    let dtft = |f: f64| -> f64 {
        taps.iter()
            .enumerate()
            .map(|(k, &h)| h * C::from_polar(1.0, -TAU * f * k as f64 / grid.sample_rate))
            .sum::<C>()
            .norm()
    };
    let atten_db = -20.0 * dtft(beat_hz).log10();
    let dc_err = (dtft(0.0) - 1.0).abs();

    let tone = Trace::from_fn(grid, |t| (TAU * beat_hz * t + 0.3).cos());
    let boxed = lowpass(&tone, &FilterSpec::default(), beat_hz).map_err(|e| e.to_string())?;
    let residue = boxed.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(
        atten_db >= 60.0 && dc_err <= 1e-3 && residue <= 1e-10,
        format!("FIR attenuation at 2Δf {atten_db:.1} dB (≥60), DC gain error {dc_err:.1e} (≤1e-3), PeriodAverage residue {residue:.1e} (≤1e-10)"),
    )
}

fn element_laws() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst = 0.0f64;
    let power = |f: &PortField| f.tones().iter().map(|t| t.jones_h.norm_sqr() + t.jones_v.norm_sqr()).sum::<f64>();
    for _ in 0..1000 {
        let mut jones = || C::new(2.0 * unit() - 1.0, 2.0 * unit() - 1.0);
        let (h1, v1, h2, v2) = (jones(), jones(), jones(), jones());
        let alpha = PI * (2.0 * unit() - 1.0);
        let in1 = PortField::from_tones([Tone::new(h1, v1, 0.0, ToneLabel::SOURCE)]);
        let in2 = PortField::from_tones([Tone::new(h2, v2, 0.0, ToneLabel::SOURCE)]);

        let p = polarizer_projector(alpha);
        let pp: PolMatrix = p * p;
        worst = worst.max(pp.max_abs_diff(&p));

        let hwp = hwp_matrix(alpha).apply(&in1);
        worst = worst.max((power(&hwp) - power(&in1)).abs());

        let total = power(&in1) + power(&in2);
        let (a, b) = bs_apply(&in1, &in2);
        worst = worst.max((power(&a) + power(&b) - total).abs());
        let (a, b) = pbs_apply(&in1, &in2);
        worst = worst.max((power(&a) + power(&b) - total).abs());
    }
    ensure(
        worst <= 1e-12,
        format!("1000 random inputs: max violation {worst:.2e} (≤1e-12)"),
    )
}

fn main() {
    // `cargo test -- --list` and friends: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("flat locals", flat_locals),
        ("eraser recovery", eraser_recovery),
        ("projected locals", projected_locals),
        ("headline correlation", headline_correlation),
        ("term bookkeeping", term_bookkeeping),
        ("pipeline inequivalence", pipeline_inequivalence),
        ("randomness protocol", randomness_protocol),
        ("CHSH post-analysis", chsh),
        ("filter contract", filter_contract),
        ("element laws", element_laws),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.2} s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.2} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
