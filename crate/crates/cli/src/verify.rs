//! Self-checks: saddle-point sums against direct quadrature, the phase
//! equivalence of weak-field phase and squeezing angle, mirror symmetry,
//! node-count convergence and the trivial zeroth-order force.

use std::f64::consts::PI;
use std::fmt;

use ati_core::diagnostics::{asymmetry_metric, check_phase_equivalence, max_relative_deviation};
use ati_core::ensemble::{averaged_pmd, averaged_pmd_with_nodes, MomentumGrid};
use ati_core::phase_space::make_nodes;
use ati_core::psf::zeroth_order_psf;
use ati_core::sfa::{oracle_amplitude, ring_radii, AmplitudeContext, BranchRule, OracleOptions};
use ati_core::{AtomSpec, ComplexAmplitude, FieldConfig, Momentum, NodeScheme, NodeSet, PhaseSpaceDist, TimeWindow};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Largest grid used for the PMD-based checks of `verify`.
pub const VERIFY_MAX_NX: usize = 41;
pub const VERIFY_MAX_NY: usize = 21;
/// Squeezing strength used when the config does not set one.
pub const DEFAULT_R: f64 = 12.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Gate { name: name.into(), passed, detail: detail.into() }
    }

    /// `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Gate::new(name, value <= limit, format!("{value:.3e} <= {limit:.0e}"))
    }

    /// `value ≥ limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Gate::new(name, value >= limit, format!("{value:.4} >= {limit}"))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Pearson correlation; `None` for fewer than two points or zero spread.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCase {
    pub alpha: ComplexAmplitude,
    pub points: usize,
    pub correlation: f64,
}

/// Correlation of `log` saddle-point yield with `log |oracle|²` on the
/// plateau: phase-matched rings up to the classical cutoff `|p| = A₀`,
/// `angles` directions per ring over `[0, π]`, keeping `|p_x| ≤ 0.8·A₀`.
/// For α = 0 the rings and window follow the 2ω period.
pub fn oracle_correlation(cfg: &FieldConfig, atom: &AtomSpec, alpha: ComplexAmplitude, rule: BranchRule, angles: usize) -> Result<OracleCase, CliError> {
    let period = if alpha == ComplexAmplitude::ZERO { 0.5 * cfg.period() } else { cfg.period() };
    let window = TimeWindow::new(0.0, period)?;
    let cutoff = cfg.a_2w();
    let radii = ring_radii(cfg, alpha, atom, period, cutoff);
    let steps = angles.max(2);
    let points: Vec<Momentum> = radii
        .iter()
        .flat_map(|&r| (0..steps).map(move |k| PI * k as f64 / (steps - 1) as f64).map(move |a| Momentum::new(r * a.cos(), r * a.sin())))
        .filter(|p| p.px.abs() <= 0.8 * cutoff)
        .collect();
    let opts = OracleOptions::default();
    let pairs: Vec<Option<(f64, f64)>> = points
        .par_iter()
        .map(|&p| {
            let spa = AmplitudeContext::new(p, alpha, cfg, atom).window_yield(&window, rule).value;
            let exact = oracle_amplitude(p, alpha, cfg, atom, &window, &opts).ok()?.value.norm_sqr();
            (spa > 0.0 && exact > 0.0).then(|| (spa.ln(), exact.ln()))
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().flatten().unzip();
    let correlation = pearson(&xs, &ys).unwrap_or(f64::NAN);
    Ok(OracleCase { alpha, points: xs.len(), correlation })
}

/// α = 0 followed by the first `draws` Monte Carlo samples of the squeezed
/// vacuum `(r, φ = 0)` with `seed`.
pub fn oracle_design(r: f64, draws: usize, seed: u64) -> Result<Vec<ComplexAmplitude>, CliError> {
    let mut out = vec![ComplexAmplitude::ZERO];
    if draws > 0 {
        let mc = make_nodes(&PhaseSpaceDist::squeezed(r, 0.0)?, NodeScheme::MonteCarlo { count: draws, seed })?;
        out.extend(mc.nodes.iter().map(|n| n.0));
    }
    Ok(out)
}

/// The grid of `cfg` with at most `VERIFY_MAX_NX × VERIFY_MAX_NY` points.
fn coarse_grid(cfg: &RunConfig) -> Result<MomentumGrid, CliError> {
    let mut c = cfg.clone();
    c.grid.nx = c.grid.nx.min(VERIFY_MAX_NX);
    c.grid.ny = c.grid.ny.min(VERIFY_MAX_NY);
    c.grid()
}

fn squeezing(cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.distribution()? {
        Some(PhaseSpaceDist { kind: ati_core::DistKind::Squeezed { r, .. }, .. }) => Ok(r),
        _ => Ok(DEFAULT_R),
    }
}

/// Runs every gate on the field and atom of `cfg`.
pub fn run_verify(cfg: &RunConfig) -> Result<Vec<Gate>, CliError> {
    let field = cfg.field_config()?;
    let atom = cfg.atom()?;
    let grid = coarse_grid(cfg)?;
    let cell = TimeWindow::unit_cell(&field);
    let r = squeezing(cfg)?;
    let order = cfg.distribution.order.max(1);
    let scheme = NodeScheme::GaussHermiteTensor { order };
    let mut gates = Vec::new();

    let cases = oracle_design(r, 3, cfg.distribution.seed)?
        .into_iter()
        .map(|a| oracle_correlation(&field, &atom, a, cfg.job.branch_rule, 24))
        .collect::<Result<Vec<_>, _>>()?;
    let worst = cases.iter().map(|c| c.correlation).fold(f64::INFINITY, f64::min);
    let listed: Vec<String> = cases.iter().map(|c| format!("{:.4}", c.correlation)).collect();
    gates.push(Gate::new("oracle correlation", worst >= 0.9, format!("min {worst:.4} >= 0.9 over [{}]", listed.join(", "))));

    let bsv0 = PhaseSpaceDist::squeezed(r, 0.0)?;
    for dphi in [0.0, PI / 3.0, -PI / 2.0, PI] {
        let dev = check_phase_equivalence(&grid, &bsv0, scheme, &field, &atom, &cell, dphi)?;
        gates.push(Gate::at_most(format!("phase equivalence dphi={dphi:.4}"), dev, 1e-6));
    }

    let mono = averaged_pmd_with_nodes(&grid, &NodeSet::single(ComplexAmplitude::ZERO), &field, &atom, &cell, BranchRule::SteepestDescent)?;
    gates.push(Gate::at_most("monochromatic symmetry", asymmetry_metric(&mono)?, 1e-8));

    let low = averaged_pmd(&grid, &bsv0, scheme, &field, &atom, &cell)?;
    let a0 = asymmetry_metric(&low)?;
    let a90 = asymmetry_metric(&averaged_pmd(&grid, &PhaseSpaceDist::squeezed(r, -PI / 2.0)?, scheme, &field, &atom, &cell)?)?;
    gates.push(Gate::at_most("squeezed phi=-pi/2 symmetry", a90, 1e-3));
    gates.push(Gate::new("squeezed phi=0 asymmetry", a0 >= 10.0 * a90, format!("{a0:.3e} >= 10 x {a90:.3e}")));

    let high = averaged_pmd(&grid, &bsv0, NodeScheme::GaussHermiteTensor { order: 2 * order }, &field, &atom, &cell)?;
    let dev = max_relative_deviation(&low.max_normalized(), &high.max_normalized());
    gates.push(Gate::at_most(format!("node doubling {order}->{}", 2 * order), dev, 1e-3));

    let (ax, ay) = zeroth_order_psf();
    gates.push(Gate::new("zeroth-order force", ax.norm() == 0.0 && ay.norm() == 0.0, format!("|alpha_x| = {}, |alpha_y| = {}", ax.norm(), ay.norm())));
    Ok(gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0], &[1.0]).is_none());
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn gate_lines() {
        assert_eq!(Gate::at_most("x", 1e-9, 1e-8).to_string(), "PASS x: 1.000e-9 <= 1e-8");
        assert!(!Gate::at_least("y", 0.5, 0.9).passed);
    }

    #[test]
    fn design_starts_at_zero() {
        let d = oracle_design(12.15, 3, 42).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d[0], ComplexAmplitude::ZERO);
        assert_eq!(d, oracle_design(12.15, 3, 42).unwrap());
    }
}
