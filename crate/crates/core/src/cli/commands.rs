use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rustfft::FftPlanner;
use serde::Serialize;
use serde_json::json;

use super::{say, svg, write_json, write_manifest, CliError, CliResult, CommonArgs};
use crate::analysis::{
    chsh_from_r, classify_product_terms, enumerate_pairings, half_turn_grid, oracle_correlation,
    oracle_intensity_product, CorrelationSurface, FringeFit, Pipeline,
};
use crate::experiment::{
    ensemble_correlation, full_turn_grid, run_shots, scan_phi, scan_xitheta, shot_sign, ExperimentConfig, PhiScan,
    Scan,
};
use crate::scheme::{Combiner, Scheme, SignPolicy};
use crate::signal::{fmt_f64, lowpass, synthesize_intensity, DetectorTrace, FilterSpec};

/// A named numerical check recorded in a summary.
#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

fn verdict(checks: &[Check]) -> CliResult<()> {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {:e} > {:e}", c.name, c.value, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Contract(failed.join("; ")))
    }
}

fn random_signs() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scheme.sign_policy = SignPolicy::RandomPerShot;
    cfg
}

pub(super) fn eraser_defaults() -> ExperimentConfig {
    ExperimentConfig {
        scan: Scan::Phi(full_turn_grid(24)),
        ..random_signs()
    }
}

pub(super) fn local_defaults() -> ExperimentConfig {
    let mut cfg = random_signs();
    cfg.scheme = cfg.scheme.with_analyzers(FRAC_PI_4, FRAC_PI_4);
    cfg
}

pub(super) fn correlate_defaults() -> ExperimentConfig {
    let g = half_turn_grid(13);
    ExperimentConfig {
        scan: Scan::XiTheta { xi: g.clone(), theta: g },
        ..random_signs()
    }
}

pub(super) fn terms_defaults() -> ExperimentConfig {
    let mut cfg = random_signs();
    cfg.scheme = cfg.scheme.with_analyzers(FRAC_PI_8, FRAC_PI_8);
    cfg
}

fn prepare_out(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))
}

fn require_pbs(cfg: &ExperimentConfig, command: &str) -> CliResult<()> {
    if cfg.scheme.combiner != Combiner::Pbs {
        return Err(CliError::Usage(format!("`{command}` needs scheme.combiner = PBS")));
    }
    Ok(())
}

fn write_trace(path: &Path, trace: &DetectorTrace) -> CliResult<()> {
    trace.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn write_surface(path: &Path, s: &CorrelationSurface) -> CliResult<()> {
    s.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

#[derive(Serialize)]
struct ModeSummary {
    mode: Combiner,
    fit_a: FringeFit,
    fit_b: FringeFit,
    /// max − min of `I_A + I_B` over the scan.
    sum_spread: f64,
}

impl ModeSummary {
    fn of(scan: &PhiScan) -> ModeSummary {
        let sums: Vec<f64> = scan.rows.iter().map(|r| r.i_a + r.i_b).collect();
        let (lo, hi) = sums.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        ModeSummary {
            mode: scan.mode,
            fit_a: scan.fit_a,
            fit_b: scan.fit_b,
            sum_spread: hi - lo,
        }
    }
}

/// φ scans in both combiner modes: `eraser.csv`, `eraser_summary.json`.
pub fn cmd_eraser(cfg: &ExperimentConfig, args: &CommonArgs) -> CliResult<()> {
    prepare_out(&args.out)?;
    let mut scans = Vec::with_capacity(2);
    for mode in [Combiner::Pbs, Combiner::Bs] {
        let mut c = cfg.clone();
        c.scheme.combiner = mode;
        scans.push(scan_phi(&c)?);
    }
    let (pbs, bs) = (ModeSummary::of(&scans[0]), ModeSummary::of(&scans[1]));

    let mut w = csv::Writer::from_path(args.out.join("eraser.csv")).map_err(crate::Error::from)?;
    w.write_record(["phi", "I_A", "I_B", "mode"]).map_err(crate::Error::from)?;
    for scan in &scans {
        let mode = serde_json::to_value(scan.mode)?;
        for r in &scan.rows {
            w.write_record([fmt_f64(r.phi), fmt_f64(r.i_a), fmt_f64(r.i_b), mode.as_str().unwrap_or("").to_string()])
                .map_err(crate::Error::from)?;
        }
    }
    w.flush()?;

    // The contract describes the bare interferometer; analyzers change it.
    let bare = cfg.scheme.analyzer_xi.is_none() && cfg.scheme.analyzer_theta.is_none();
    let scale = cfg.scheme.kappa().powi(2).max(1.0);
    let checks = if bare {
        vec![
            Check::at_most("pbs_visibility_a", pbs.fit_a.visibility, 1e-9),
            Check::at_most("pbs_visibility_b", pbs.fit_b.visibility, 1e-9),
            Check::at_most("bs_visibility_a_error", (bs.fit_a.visibility - 1.0).abs(), 1e-9),
            Check::at_most("bs_visibility_b_error", (bs.fit_b.visibility - 1.0).abs(), 1e-9),
            Check::at_most("bs_sum_spread", bs.sum_spread, 1e-12 * scale),
        ]
    } else {
        Vec::new()
    };
    let pass = checks.iter().all(|c| c.pass);
    write_json(
        &args.out.join("eraser_summary.json"),
        &json!({ "pbs": pbs, "bs": bs, "checks": checks, "pass": pass }),
    )?;

    let mut outputs = vec!["eraser.csv", "eraser_summary.json"];
    if args.svg {
        let series: Vec<svg::Series> = scans
            .iter()
            .flat_map(|s| {
                let x: Vec<f64> = s.rows.iter().map(|r| r.phi).collect();
                let tag = if s.mode == Combiner::Pbs { "PBS" } else { "BS" };
                [
                    svg::Series::new(format!("{tag} I_A"), x.clone(), s.rows.iter().map(|r| r.i_a).collect()),
                    svg::Series::new(format!("{tag} I_B"), x, s.rows.iter().map(|r| r.i_b).collect()),
                ]
            })
            .collect();
        fs::write(args.out.join("eraser.svg"), svg::line_plot("φ scan", "φ [rad]", "intensity", &series))?;
        outputs.push("eraser.svg");
    }
    outputs.push("manifest.json");
    write_manifest(&args.out, "eraser", cfg, &outputs)?;
    if args.json {
        say(&serde_json::to_string(&json!({ "pbs": pbs, "bs": bs, "pass": pass }))?);
    } else {
        say(&format!(
            "PBS visibility A={:.3e} B={:.3e}; BS visibility A={:.12} B={:.12}",
            pbs.fit_a.visibility, pbs.fit_b.visibility, bs.fit_a.visibility, bs.fit_b.visibility
        ));
    }
    verdict(&checks)
}

#[derive(Serialize)]
struct Spectrum {
    peak_hz: Option<f64>,
    bin_hz: f64,
    /// max − min of the raw trace.
    swing: f64,
}

/// Strongest non-DC line of a real trace; `None` when the trace is flat.
fn spectral_peak(trace: &DetectorTrace) -> Spectrum {
    let n = trace.len();
    let mean = trace.mean();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        trace.samples.iter().map(|&v| rustfft::num_complex::Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin_hz = trace.grid.sample_rate / n as f64;
    let swing = trace.max() - trace.min();
    let flat = swing <= 1e-12 * mean.abs().max(1.0);
    let peak = (1..=n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .filter(|_| !flat)
        .map(|k| k as f64 * bin_hz);
    Spectrum {
        peak_hz: peak,
        bin_hz,
        swing,
    }
}

#[derive(Serialize)]
struct LocalPreset {
    xi: f64,
    theta: f64,
    filtered_mean_s: f64,
    filtered_mean_i: f64,
}

/// Traces behind the analyzers: raw and filtered CSVs plus `local_summary.json`.
pub fn cmd_local(cfg: &ExperimentConfig, args: &CommonArgs) -> CliResult<()> {
    require_pbs(cfg, "local")?;
    let (Some(xi), Some(theta)) = (cfg.scheme.analyzer_xi, cfg.scheme.analyzer_theta) else {
        return Err(crate::Error::MissingAnalyzers.into());
    };
    prepare_out(&args.out)?;
    let grid = cfg.time_grid()?;
    let beat = cfg.scheme.beat_hz();
    let sign = shot_sign(cfg, 0);
    let r = Scheme::new(cfg.scheme.clone())?.propagate(sign)?;
    let raw_s = synthesize_intensity(&r.port_a, &grid)?;
    let raw_i = synthesize_intensity(&r.port_b, &grid)?;
    let filt_s = lowpass(&raw_s, &cfg.filter, beat)?;
    let filt_i = lowpass(&raw_i, &cfg.filter, beat)?;
    write_trace(&args.out.join("local_s.csv"), &raw_s)?;
    write_trace(&args.out.join("local_i.csv"), &raw_i)?;
    write_trace(&args.out.join("local_s_filtered.csv"), &filt_s)?;
    write_trace(&args.out.join("local_i_filtered.csv"), &filt_i)?;
    let (spec_s, spec_i) = (spectral_peak(&raw_s), spectral_peak(&raw_i));

    let k2 = cfg.scheme.kappa().powi(2);
    let settings = [(xi, theta), (0.0, FRAC_PI_4), (FRAC_PI_8, -FRAC_PI_8), (FRAC_PI_3, FRAC_PI_6)];
    let mut presets = Vec::with_capacity(settings.len());
    let mut checks = Vec::new();
    for (x, t) in settings {
        let mut c = cfg.clone();
        c.scheme = c.scheme.with_analyzers(x, t);
        let e = run_shots(&c)?;
        let stat = |k: &str| e.stat(k).map(|s| s.mean).unwrap_or(f64::NAN);
        let p = LocalPreset {
            xi: x,
            theta: t,
            filtered_mean_s: stat("filtered_a"),
            filtered_mean_i: stat("filtered_b"),
        };
        let err = (p.filtered_mean_s - k2).abs().max((p.filtered_mean_i - k2).abs());
        checks.push(Check::at_most(&format!("mean_error(xi={x:.6},theta={t:.6})"), err, 1e-9 * k2.max(1.0)));
        presets.push(p);
    }
    for (name, spec, amp) in [("s", &spec_s, (2.0 * xi).sin()), ("i", &spec_i, (2.0 * theta).sin())] {
        if amp.abs() > 1e-6 {
            let off = spec.peak_hz.map_or(f64::INFINITY, |f| (f - beat).abs());
            checks.push(Check::at_most(&format!("peak_offset_{name}"), off, spec.bin_hz / 2.0));
        } else {
            checks.push(Check::at_most(&format!("raw_swing_{name}"), spec.swing, 1e-12 * k2.max(1.0)));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let summary = json!({
        "sign": sign,
        "kappa_sq": k2,
        "beat_hz": beat,
        "spectrum_s": spec_s,
        "spectrum_i": spec_i,
        "filtered_trace_mean_s": filt_s.mean(),
        "filtered_trace_mean_i": filt_i.mean(),
        "presets": presets,
        "checks": checks,
        "pass": pass,
    });
    write_json(&args.out.join("local_summary.json"), &summary)?;

    let mut outputs = vec![
        "local_s.csv",
        "local_i.csv",
        "local_s_filtered.csv",
        "local_i_filtered.csv",
        "local_summary.json",
    ];
    if args.svg {
        let series = |name: &str, tr: &DetectorTrace| {
            svg::Series::new(name.to_string(), tr.grid.times().collect(), tr.samples.clone())
        };
        let plot = svg::line_plot(
            "detector traces",
            "t [s]",
            "intensity",
            &[series("I_s raw", &raw_s), series("I_i raw", &raw_i), series("I_s LPF", &filt_s), series("I_i LPF", &filt_i)],
        );
        fs::write(args.out.join("local.svg"), plot)?;
        outputs.push("local.svg");
    }
    outputs.push("manifest.json");
    write_manifest(&args.out, "local", cfg, &outputs)?;
    if args.json {
        say(&serde_json::to_string(&summary)?);
    } else {
        say(&format!(
            "kappa^2 = {k2}; beat peak s = {:?} Hz, i = {:?} Hz; filtered means within tolerance: {pass}",
            spec_s.peak_hz, spec_i.peak_hz
        ));
    }
    verdict(&checks)
}

fn oracle_tolerance(filter: &FilterSpec) -> f64 {
    match filter {
        FilterSpec::PeriodAverage { .. } => 1e-9,
        FilterSpec::Fir { .. } => 1e-6,
    }
}

#[derive(Serialize)]
struct PipelineSummary {
    pipeline: Pipeline,
    #[serde(rename = "R_max")]
    r_max: f64,
    /// Largest deviation of the normalized surface from this pipeline's closed form.
    oracle_residual_max: f64,
    /// Largest deviation of the normalized surface from cos²(ξ+θ).
    cos2_deviation_max: f64,
    matches_oracle: bool,
    chsh_s: f64,
}

/// Both correlation pipelines over the (ξ, θ) scan, oracle residuals and CHSH S.
pub fn cmd_correlate(cfg: &ExperimentConfig, args: &CommonArgs) -> CliResult<()> {
    require_pbs(cfg, "correlate")?;
    if !matches!(cfg.scan, Scan::XiTheta { .. }) {
        return Err(CliError::Usage("`correlate` needs an XiTheta scan".into()));
    }
    prepare_out(&args.out)?;
    let tol = oracle_tolerance(&cfg.filter);
    let cos2 = |x: f64, t: f64| oracle_correlation(x, t, 1.0);

    let mut summaries = Vec::with_capacity(2);
    let mut surfaces = Vec::with_capacity(2);
    for (pipeline, stem) in [
        (Pipeline::AmplitudeProductLPF, "surface"),
        (Pipeline::IntensityProductLPF, "surface_intensity"),
    ] {
        let surface = scan_xitheta(cfg, pipeline)?;
        let norm = surface.normalized();
        write_surface(&args.out.join(format!("{stem}.csv")), &surface)?;
        write_surface(&args.out.join(format!("{stem}_normalized.csv")), &norm)?;
        let residual = match pipeline {
            Pipeline::AmplitudeProductLPF => norm.max_deviation(cos2),
            Pipeline::IntensityProductLPF => norm.max_deviation(|x, t| oracle_intensity_product(x, t, 1.0)),
        };
        let cos2_dev = norm.max_deviation(cos2);
        let chsh_s = chsh_from_r(|x, t| ensemble_correlation(cfg, pipeline, x, t))?;
        summaries.push(PipelineSummary {
            pipeline,
            r_max: surface.r_max,
            oracle_residual_max: residual,
            cos2_deviation_max: cos2_dev,
            matches_oracle: cos2_dev <= tol,
            chsh_s,
        });
        surfaces.push((stem, norm));
    }
    let checks = vec![
        Check::at_most("amplitude_oracle_residual", summaries[0].oracle_residual_max, tol),
        Check::at_most("intensity_oracle_residual", summaries[1].oracle_residual_max, tol),
        Check::at_most("amplitude_chsh_error", (summaries[0].chsh_s - 2.0 * std::f64::consts::SQRT_2).abs(), 1e-6),
    ];
    let pass = checks.iter().all(|c| c.pass);
    let (nx, nt) = (surfaces[0].1.xi_grid.len(), surfaces[0].1.theta_grid.len());
    let summary = json!({
        "grid": [nx, nt],
        "tolerance": tol,
        "amplitude": summaries[0],
        "intensity": summaries[1],
        "checks": checks,
        "pass": pass,
    });
    write_json(&args.out.join("correlate_summary.json"), &summary)?;

    let mut outputs = vec![
        "surface.csv",
        "surface_normalized.csv",
        "surface_intensity.csv",
        "surface_intensity_normalized.csv",
        "correlate_summary.json",
    ];
    if args.svg {
        for (stem, norm) in &surfaces {
            let name = format!("{stem}.svg");
            fs::write(args.out.join(&name), svg::heatmap(&format!("{stem} (normalized)"), norm))?;
        }
        outputs.extend(["surface.svg", "surface_intensity.svg"]);
    }
    outputs.push("manifest.json");
    write_manifest(&args.out, "correlate", cfg, &outputs)?;
    if args.json {
        say(&serde_json::to_string(&summary)?);
    } else {
        for s in &summaries {
            say(&format!(
                "{:?}: residual {:.3e}, max |R - cos^2| {:.3e}, S = {:.6}",
                s.pipeline, s.oracle_residual_max, s.cos2_deviation_max, s.chsh_s
            ));
        }
    }
    verdict(&checks)
}

/// Pairings and kept/blocked product terms, to stdout.
pub fn cmd_terms(cfg: &ExperimentConfig, args: &CommonArgs) -> CliResult<()> {
    let mut scheme_cfg = cfg.scheme.clone();
    // The classification only reads labels and offsets; any analyzer angle will do.
    if scheme_cfg.analyzer_xi.is_none() || scheme_cfg.analyzer_theta.is_none() {
        scheme_cfg = scheme_cfg.with_analyzers(FRAC_PI_8, FRAC_PI_8);
    }
    let sign = shot_sign(cfg, 0);
    let result = Scheme::new(scheme_cfg)?.propagate(sign)?;
    let classes = classify_product_terms(&result)?;
    let pairings = enumerate_pairings();

    let rows: Vec<serde_json::Value> = [("kept", &classes.kept), ("blocked", &classes.blocked)]
        .into_iter()
        .flat_map(|(class, terms)| {
            terms.iter().map(move |p| {
                json!({
                    "class": class,
                    "s": p.label_s.to_string(),
                    "i": p.label_i.to_string(),
                    "net_offset_hz": p.net_offset,
                })
            })
        })
        .collect();
    let doc = json!({
        "sign": sign,
        "pairings": pairings.iter().map(|p| json!({ "path1": p.path1.to_string(), "path2": p.path2.to_string() })).collect::<Vec<_>>(),
        "terms": rows,
    });
    if args.json {
        say(&serde_json::to_string_pretty(&doc)?);
    } else {
        say(&format!("pairings (arm 1, arm 2): {}", pairings.len()));
        for p in &pairings {
            say(&format!("  {:<5} {:<5}", p.path1.to_string(), p.path2.to_string()));
        }
        say(&format!("product terms, port A x port B, arm-1 sign {}:", sign.symbol()));
        say(&format!("  {:<8} {:<5} {:<5} {:>14}", "class", "s", "i", "offset [Hz]"));
        for (class, terms) in [("kept", &classes.kept), ("blocked", &classes.blocked)] {
            for p in terms {
                say(&format!(
                    "  {:<8} {:<5} {:<5} {:>+14.3}",
                    class,
                    p.label_s.to_string(),
                    p.label_i.to_string(),
                    p.net_offset
                ));
            }
        }
    }
    if args.out != Path::new(".") {
        prepare_out(&args.out)?;
        write_json(&args.out.join("terms.json"), &doc)?;
        write_manifest(&args.out, "terms", cfg, &["terms.json", "manifest.json"])?;
    }
    Ok(())
}
