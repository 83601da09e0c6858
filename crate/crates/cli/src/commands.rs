//! One function per subcommand. Each writes its files into the output
//! directory and returns the paths written.

use std::path::PathBuf;
use std::time::Instant;

use ati_core::diagnostics::{asymmetry_metric, curve_asymmetry, event_times, intensity_scan, log_log_fit, moments, tunnel_time_stats, LineFit, MomentReport, TunnelTimeStats};
use ati_core::ensemble::{averaged_lineout, averaged_pmd_with_nodes, EnsembleMeta, FailureTally, Normalization, PMDResult};
use ati_core::phase_space::make_nodes;
use ati_core::psf::{solve_psf, PsfParams, PsfSolution};
use ati_core::{ComplexAmplitude, Event, Momentum, NodeSet, TimeWindow};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{ensure_dir, num, write_csv, write_json};
use crate::CliError;

/// Nodes lighter than this fraction of the heaviest are left out of the
/// per-node tunnel-time file; they are still in the statistics.
pub const SAMPLE_WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Serialize)]
struct Meta<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    code_version: &'static str,
    threads: usize,
    wall_time_s: f64,
    #[serde(flatten)]
    result: T,
}

fn write_meta<T: Serialize>(cfg: &RunConfig, command: &str, started: Instant, result: T) -> Result<PathBuf, CliError> {
    let path = cfg.output.dir.join(format!("{}.meta.json", command.replace('-', "_")));
    let meta = Meta {
        command,
        config: cfg,
        code_version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        wall_time_s: started.elapsed().as_secs_f64(),
        result,
    };
    write_json(&path, &meta)?;
    Ok(path)
}

/// The node set of the configured distribution, or the single node α = 0.
pub fn nodes(cfg: &RunConfig) -> Result<NodeSet, CliError> {
    match cfg.distribution()? {
        Some(d) => Ok(make_nodes(&d, cfg.scheme()?)?),
        None => Ok(NodeSet::single(ComplexAmplitude::ZERO)),
    }
}

/// Computes the PMD without writing anything.
pub fn compute_pmd(cfg: &RunConfig) -> Result<PMDResult, CliError> {
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let grid = cfg.grid()?;
    let window = cfg.window(&field, TimeWindow::unit_cell(&field))?;
    let nodes = nodes(cfg)?;
    let mut res = averaged_pmd_with_nodes(&grid, &nodes, &field, &atom, &window, cfg.job.branch_rule)?;
    res.meta.distribution = cfg.distribution()?;
    res.normalization = cfg.output.normalization;
    Ok(res)
}

#[derive(Serialize)]
struct PmdSummary<'a> {
    ensemble: &'a EnsembleMeta,
    max_yield: f64,
    asymmetry: Option<f64>,
    normalization: Normalization,
}

/// `pmd.csv` (px, py, yield, yield_norm) and `pmd.meta.json`.
pub fn run_pmd(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let res = compute_pmd(cfg)?;
    ensure_dir(&cfg.output.dir)?;
    let csv_path = cfg.output.dir.join("pmd.csv");
    let shown = res.output_values();
    write_csv(&csv_path, &["px", "py", "yield", "yield_norm"], |w| {
        for k in 0..res.grid.len() {
            let p = res.grid.momentum(k);
            w.write_record([num(p.px), num(p.py), num(res.yields[k]), num(shown[k])])?;
        }
        Ok(())
    })?;
    let asymmetry = if res.grid.is_px_symmetric() { Some(asymmetry_metric(&res)?) } else { None };
    let summary = PmdSummary { ensemble: &res.meta, max_yield: res.max(), asymmetry, normalization: res.normalization };
    let meta = write_meta(cfg, "pmd", started, summary)?;
    Ok(vec![csv_path, meta])
}

#[derive(Serialize)]
struct LineoutSummary {
    window: TimeWindow,
    moments: Option<MomentReport>,
    asymmetry: f64,
    failures: FailureTally,
}

/// `lineout.csv` (px, yield, yield_norm) along `p_y = 0`; single event I1
/// unless a window is configured.
pub fn run_lineout(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let window = cfg.window(&field, TimeWindow::event(&field, Event::I1))?;
    let px = cfg.px_samples()?;
    let line = averaged_lineout(&px, &nodes(cfg)?, &field, &atom, &window)?;
    let max = line.points.iter().map(|p| p.1).fold(0.0, f64::max);
    let norm = |y: f64| match cfg.output.normalization {
        Normalization::Max if max > 0.0 => y / max,
        _ => y,
    };
    ensure_dir(&cfg.output.dir)?;
    let csv_path = cfg.output.dir.join("lineout.csv");
    write_csv(&csv_path, &["px", "yield", "yield_norm"], |w| {
        for &(p, y) in &line.points {
            w.write_record([num(p), num(y), num(norm(y))])?;
        }
        Ok(())
    })?;
    let summary = LineoutSummary { window, moments: moments(&line.points).ok(), asymmetry: curve_asymmetry(&line.points)?, failures: line.failures };
    let meta = write_meta(cfg, "lineout", started, summary)?;
    Ok(vec![csv_path, meta])
}

#[derive(Serialize)]
struct ScanSummary {
    window: TimeWindow,
    fit: Option<LineFit>,
}

/// `scan.csv`: one `point` row per intensity, then a `fit` row for
/// `log|⟨p_x⟩|` against `log I` when there are at least three points.
pub fn run_scan(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let window = cfg.window(&field, TimeWindow::event(&field, Event::I1))?;
    if cfg.job.intensities.is_empty() {
        return Err(CliError::Config("job.intensities: empty".into()));
    }
    let res = intensity_scan(cfg.family()?, &cfg.job.intensities, cfg.scheme()?, &field, &atom, &window, &cfg.px_samples()?)?;
    ensure_dir(&cfg.output.dir)?;
    let csv_path = cfg.output.dir.join("scan.csv");
    write_csv(&csv_path, &["row", "I_w_Wcm2", "mean_px", "skew_px", "variance_px", "slope", "intercept", "r_squared"], |w| {
        for p in &res.points {
            let r = &p.report;
            w.write_record(["point", &num(p.intensity_wcm2), &num(r.mean_px), &num(r.skewness_px), &num(r.variance_px), "", "", ""])?;
        }
        if let Some(f) = &res.fit {
            w.write_record(["fit", "", "", "", "", &num(f.slope), &num(f.intercept), &num(f.r_squared)])?;
        }
        Ok(())
    })?;
    let meta = write_meta(cfg, "scan", started, ScanSummary { window, fit: res.fit })?;
    Ok(vec![csv_path, meta])
}

#[derive(Serialize)]
struct EventSummary {
    event: Event,
    variance_asymmetry: f64,
    excluded_fraction: f64,
}

#[derive(Serialize)]
struct TunnelSummary {
    node_count: usize,
    events: Vec<EventSummary>,
}

/// Husimi-weighted statistics of `Im t_sp` per event.
pub fn compute_tunnel_times(cfg: &RunConfig) -> Result<(NodeSet, Vec<TunnelTimeStats>), CliError> {
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let nodes = nodes(cfg)?;
    let px = cfg.px_samples()?;
    let stats = cfg.events()?.into_iter().map(|ev| tunnel_time_stats(&px, &nodes, &field, &atom, ev)).collect();
    Ok((nodes, stats))
}

pub fn variance_asymmetry(stats: &TunnelTimeStats) -> Result<f64, CliError> {
    let curve: Vec<(f64, f64)> = stats.points.iter().map(|p| (p.px, p.weighted_var_im)).collect();
    Ok(curve_asymmetry(&curve)?)
}

/// `tunnel_time_stats.csv` and the per-node scatter `tunnel_times.csv`.
pub fn run_tunnel_times(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let (nodes, stats) = compute_tunnel_times(cfg)?;
    ensure_dir(&cfg.output.dir)?;
    let stats_path = cfg.output.dir.join("tunnel_time_stats.csv");
    write_csv(&stats_path, &["event", "px", "mean_im_t", "var_im_t", "weight", "excluded"], |w| {
        for s in &stats {
            for p in &s.points {
                w.write_record([s.event.to_string(), num(p.px), num(p.weighted_mean_im), num(p.weighted_var_im), num(p.weight), p.excluded.to_string()])?;
            }
        }
        Ok(())
    })?;

    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let heaviest = nodes.nodes.iter().map(|n| n.1).fold(0.0, f64::max);
    let samples_path = cfg.output.dir.join("tunnel_times.csv");
    let px = cfg.px_samples()?;
    let mut summaries = Vec::new();
    write_csv(&samples_path, &["event", "px", "node", "alpha_x", "alpha_y", "weight", "im_t"], |w| {
        for s in &stats {
            let per_px: Vec<Vec<Option<f64>>> = px.par_iter().map(|&p| event_times(p, &nodes, &field, &atom, s.event)).collect();
            for (p, times) in px.iter().zip(&per_px) {
                for (k, (t, &(a, wt))) in times.iter().zip(&nodes.nodes).enumerate() {
                    if let Some(t) = t {
                        if wt >= SAMPLE_WEIGHT_FLOOR * heaviest {
                            w.write_record([s.event.to_string(), num(*p), k.to_string(), num(a.ax), num(a.ay), num(wt), num(*t)])?;
                        }
                    }
                }
            }
            summaries.push(EventSummary { event: s.event, variance_asymmetry: variance_asymmetry(s)?, excluded_fraction: s.excluded_fraction(nodes.len()) });
        }
        Ok(())
    })?;
    let meta = write_meta(cfg, "tunnel-times", started, TunnelSummary { node_count: nodes.len(), events: summaries })?;
    Ok(vec![stats_path, samples_path, meta])
}

#[derive(Serialize)]
struct PsfSlope {
    r: f64,
    slope_x: Option<f64>,
    slope_y: Option<f64>,
}

#[derive(Serialize)]
struct PsfSummary {
    converged: usize,
    failed: usize,
    g_slopes: Vec<PsfSlope>,
}

/// Solves every `(r, g)` pair of the job.
pub fn compute_psf_sweep(cfg: &RunConfig) -> Result<Vec<(f64, f64, Result<PsfSolution, ati_core::AtiError>)>, CliError> {
    let j = &cfg.job;
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    if j.psf_r.is_empty() || j.psf_g.is_empty() {
        return Err(CliError::Config("job.psf_r and job.psf_g must be non-empty".into()));
    }
    let mut base = PsfParams::new(Momentum::new(j.psf_px, j.psf_py), atom.ip, field.omega, j.psf_e_2w, j.psf_g[0], j.psf_r[0])?;
    base.periods = j.psf_periods;
    let pairs: Vec<(f64, f64)> = j.psf_r.iter().flat_map(|&r| j.psf_g.iter().map(move |&g| (r, g))).collect();
    Ok(pairs.into_par_iter().map(|(r, g)| (r, g, solve_psf(&PsfParams { r, g, ..base }))).collect())
}

/// `psf.csv` with columns r, g, |alpha_x|, |alpha_y|, residual. Rows that did
/// not converge carry empty amplitudes and the final residual.
pub fn run_psf_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let rows = compute_psf_sweep(cfg)?;
    ensure_dir(&cfg.output.dir)?;
    let path = cfg.output.dir.join("psf.csv");
    write_csv(&path, &["r", "g", "|alpha_x|", "|alpha_y|", "residual"], |w| {
        for (r, g, sol) in &rows {
            match sol {
                Ok(s) => w.write_record([num(*r), num(*g), num(s.alpha_x.norm()), num(s.alpha_y.norm()), num(s.residual_norm)])?,
                Err(ati_core::AtiError::PsfNotConverged { residual }) => {
                    log::warn!("no converged solution at r = {r}, g = {g}");
                    w.write_record([num(*r), num(*g), String::new(), String::new(), num(*residual)])?
                }
                Err(e) => return Err(CliError::Core(e.clone())),
            }
        }
        Ok(())
    })?;
    let g_slopes = cfg
        .job
        .psf_r
        .iter()
        .map(|&r| {
            let ok: Vec<&PsfSolution> = rows.iter().filter(|row| row.0 == r).filter_map(|row| row.2.as_ref().ok()).collect();
            let fit = |f: fn(&PsfSolution) -> f64| log_log_fit(&ok.iter().map(|s| (s.params.g, f(s))).collect::<Vec<_>>()).map(|l| l.slope);
            PsfSlope { r, slope_x: fit(|s| s.alpha_x.norm()), slope_y: fit(|s| s.alpha_y.norm()) }
        })
        .collect();
    let converged = rows.iter().filter(|r| r.2.is_ok()).count();
    let summary = PsfSummary { converged, failed: rows.len() - converged, g_slopes };
    let meta = write_meta(cfg, "psf-sweep", started, summary)?;
    Ok(vec![path, meta])
}
