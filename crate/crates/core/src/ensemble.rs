//! Husimi-weighted averages of per-realization yields.
//!
//! Work is split by momentum point; each point sums its nodes sequentially
//! in node order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AtiError, Result};
use crate::field::{AtomSpec, FieldConfig};
use crate::phase_space::{make_nodes, NodeScheme, NodeSet, PhaseSpaceDist};
use crate::sfa::{AmplitudeContext, BranchRule, Momentum, TimeWindow, YieldEval};

/// Fraction of node evaluations allowed to lose a saddle.
pub const FAILURE_BUDGET: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub px_min: f64,
    pub px_max: f64,
    pub nx: usize,
    pub py_min: f64,
    pub py_max: f64,
    pub ny: usize,
}

fn axis_point(min: f64, max: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        return 0.5 * (min + max);
    }
    // u is exactly antisymmetric in i ↔ n − 1 − i
    let u = (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64;
    0.5 * (min + max) + 0.5 * (max - min) * u
}

impl MomentumGrid {
    pub fn new(px_min: f64, px_max: f64, nx: usize, py_min: f64, py_max: f64, ny: usize) -> Result<Self> {
        for (name, lo, hi, n) in [("px", px_min, px_max, nx), ("py", py_min, py_max, ny)] {
            if n == 0 {
                return Err(AtiError::invalid(if name == "px" { "nx" } else { "ny" }, "need at least one point"));
            }
            let ok = lo.is_finite() && hi.is_finite() && (lo < hi || (n == 1 && lo == hi));
            if !ok {
                return Err(AtiError::invalid(if name == "px" { "px_range" } else { "py_range" }, format!("need min < max, got [{lo}, {hi}]")));
            }
        }
        Ok(MomentumGrid { px_min, px_max, nx, py_min, py_max, ny })
    }

    /// The `p_x` axis alone.
    pub fn axis(px_max: f64, nx: usize) -> Result<Self> {
        Self::new(-px_max, px_max, nx, 0.0, 0.0, 1)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn px(&self, i: usize) -> f64 {
        axis_point(self.px_min, self.px_max, self.nx, i)
    }

    pub fn py(&self, j: usize) -> f64 {
        if self.ny == 1 {
            return self.py_min;
        }
        self.py_min + (self.py_max - self.py_min) * j as f64 / (self.ny - 1) as f64
    }

    pub fn px_values(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.px(i)).collect()
    }

    /// Row-major index, `p_x` slowest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn momentum(&self, k: usize) -> Momentum {
        Momentum::new(self.px(k / self.ny), self.py(k % self.ny))
    }

    pub fn is_px_symmetric(&self) -> bool {
        self.px_min == -self.px_max
    }

    /// Index of the mirror point `p_x → −p_x`.
    pub fn mirror(&self, k: usize) -> usize {
        let (i, j) = (k / self.ny, k % self.ny);
        self.index(self.nx - 1 - i, j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FailureTally {
    pub evaluations: usize,
    /// Evaluations that lost at least one saddle.
    pub failed_evaluations: usize,
    pub lost_saddles: usize,
    pub caustics: usize,
    pub near_pole: usize,
}

impl FailureTally {
    fn record(&mut self, e: &YieldEval) {
        self.evaluations += 1;
        if e.failures > 0 {
            self.failed_evaluations += 1;
        }
        self.lost_saddles += e.failures;
        self.caustics += e.caustics;
        self.near_pole += e.near_pole as usize;
    }

    fn merge(mut self, o: &FailureTally) -> Self {
        self.evaluations += o.evaluations;
        self.failed_evaluations += o.failed_evaluations;
        self.lost_saddles += o.lost_saddles;
        self.caustics += o.caustics;
        self.near_pole += o.near_pole;
        self
    }

    pub fn check_budget(&self) -> Result<()> {
        if self.evaluations > 0 && self.failed_evaluations as f64 > FAILURE_BUDGET * self.evaluations as f64 {
            return Err(AtiError::FailureBudgetExceeded {
                failed: self.failed_evaluations,
                total: self.evaluations,
                budget_percent: 100.0 * FAILURE_BUDGET,
            });
        }
        if self.failed_evaluations > 0 {
            log::warn!("{} of {} node evaluations lost a saddle ({} saddles)", self.failed_evaluations, self.evaluations, self.lost_saddles);
        }
        if self.caustics > 0 {
            log::info!("{} caustic saddle terms dropped", self.caustics);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub field: FieldConfig,
    pub atom: AtomSpec,
    pub distribution: Option<PhaseSpaceDist>,
    pub scheme: NodeScheme,
    pub node_count: usize,
    pub window: TimeWindow,
    pub branch_rule: BranchRule,
    pub failures: FailureTally,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMDResult {
    pub grid: MomentumGrid,
    /// Raw yields in [`MomentumGrid::index`] order.
    pub yields: Vec<f64>,
    pub meta: EnsembleMeta,
    pub normalization: Normalization,
}

impl PMDResult {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.yields[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.yields.iter().copied().fold(0.0, f64::max)
    }

    /// Yields divided by their maximum; all zeros stay zero.
    pub fn max_normalized(&self) -> Vec<f64> {
        let m = self.max();
        if m > 0.0 {
            self.yields.iter().map(|y| y / m).collect()
        } else {
            self.yields.clone()
        }
    }

    pub fn output_values(&self) -> Vec<f64> {
        match self.normalization {
            Normalization::Raw => self.yields.clone(),
            Normalization::Max => self.max_normalized(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineout {
    pub points: Vec<(f64, f64)>,
    pub failures: FailureTally,
}

/// `Σᵢ wᵢ·Y_{αᵢ}(p)` over `window`.
pub fn ensemble_yield(
    p: Momentum,
    nodes: &NodeSet,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    rule: BranchRule,
) -> (f64, FailureTally) {
    let mut tally = FailureTally::default();
    let mut acc = 0.0;
    for &(alpha, w) in &nodes.nodes {
        let e = AmplitudeContext::new(p, alpha, cfg, atom).window_yield(window, rule);
        tally.record(&e);
        acc += w * e.value;
    }
    (acc, tally)
}

fn evaluate(
    points: &[Momentum],
    nodes: &NodeSet,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    rule: BranchRule,
) -> Result<(Vec<f64>, FailureTally)> {
    if nodes.is_empty() {
        return Err(AtiError::EmptyNodeScheme);
    }
    let per_point: Vec<(f64, FailureTally)> =
        points.par_iter().map(|&p| ensemble_yield(p, nodes, cfg, atom, window, rule)).collect();
    let tally = per_point.iter().fold(FailureTally::default(), |acc, (_, t)| acc.merge(t));
    tally.check_budget()?;
    Ok((per_point.into_iter().map(|(y, _)| y).collect(), tally))
}

fn meta(cfg: &FieldConfig, atom: &AtomSpec, dist: Option<&PhaseSpaceDist>, nodes: &NodeSet, window: &TimeWindow, rule: BranchRule, failures: FailureTally) -> EnsembleMeta {
    EnsembleMeta {
        field: *cfg,
        atom: *atom,
        distribution: dist.copied(),
        scheme: nodes.scheme,
        node_count: nodes.len(),
        window: *window,
        branch_rule: rule,
        failures,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

pub fn averaged_pmd_with_nodes(
    grid: &MomentumGrid,
    nodes: &NodeSet,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    rule: BranchRule,
) -> Result<PMDResult> {
    let points: Vec<Momentum> = (0..grid.len()).map(|k| grid.momentum(k)).collect();
    let (yields, tally) = evaluate(&points, nodes, cfg, atom, window, rule)?;
    Ok(PMDResult { grid: *grid, yields, meta: meta(cfg, atom, None, nodes, window, rule, tally), normalization: Normalization::Raw })
}

/// Husimi-averaged momentum distribution of `dist` sampled with `scheme`.
pub fn averaged_pmd(
    grid: &MomentumGrid,
    dist: &PhaseSpaceDist,
    scheme: NodeScheme,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    unit_cell: &TimeWindow,
) -> Result<PMDResult> {
    let nodes = make_nodes(dist, scheme)?;
    let mut res = averaged_pmd_with_nodes(grid, &nodes, cfg, atom, unit_cell, BranchRule::SteepestDescent)?;
    res.meta.distribution = Some(*dist);
    Ok(res)
}

/// Ensemble yield along `p_y = 0` restricted to `window`.
pub fn averaged_lineout(
    px_samples: &[f64],
    nodes: &NodeSet,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
) -> Result<Lineout> {
    let points: Vec<Momentum> = px_samples.iter().map(|&px| Momentum::new(px, 0.0)).collect();
    let (yields, failures) = evaluate(&points, nodes, cfg, atom, window, BranchRule::SteepestDescent)?;
    Ok(Lineout { points: px_samples.iter().copied().zip(yields).collect(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::ComplexAmplitude;
    use crate::sfa::pmd_single;

    #[test]
    fn grid_axis_is_exactly_antisymmetric() {
        let g = MomentumGrid::new(-2.5, 2.5, 201, -1.5, 1.5, 101).unwrap();
        for i in 0..g.nx {
            assert_eq!(g.px(i), -g.px(g.nx - 1 - i));
        }
        assert_eq!(g.px(100), 0.0);
        assert_eq!(g.px(0), -2.5);
        assert_eq!(g.px(200), 2.5);
        assert!(g.is_px_symmetric());
        let k = g.index(3, 7);
        assert_eq!(g.mirror(k), g.index(197, 7));
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(MomentumGrid::new(1.0, -1.0, 5, 0.0, 1.0, 3).is_err());
        assert!(MomentumGrid::new(-1.0, 1.0, 0, 0.0, 1.0, 3).is_err());
        assert!(MomentumGrid::new(0.3, 0.3, 1, 0.0, 0.0, 1).is_ok());
    }

    #[test]
    fn one_node_equals_single_yield() {
        let cfg = FieldConfig::from_strong_field(0.057, 0.0925, 1e-8, 0.0).unwrap();
        let atom = AtomSpec::helium();
        let cell = TimeWindow::unit_cell(&cfg);
        let a = ComplexAmplitude::new(1e5, 5e4);
        let grid = MomentumGrid::new(-0.5, 0.5, 3, 0.0, 0.3, 2).unwrap();
        let r = averaged_pmd_with_nodes(&grid, &NodeSet::single(a), &cfg, &atom, &cell, BranchRule::SteepestDescent).unwrap();
        for k in 0..grid.len() {
            assert_eq!(r.yields[k], pmd_single(grid.momentum(k), a, &cfg, &atom, &cell));
        }
    }

    #[test]
    fn single_point_lineout() {
        let cfg = FieldConfig::from_strong_field(0.057, 0.0925, 1e-8, 0.0).unwrap();
        let atom = AtomSpec::helium();
        let cell = TimeWindow::unit_cell(&cfg);
        let nodes = make_nodes(&PhaseSpaceDist::thermal(1e9).unwrap(), NodeScheme::GaussHermiteTensor { order: 3 }).unwrap();
        let l = averaged_lineout(&[0.2], &nodes, &cfg, &atom, &cell).unwrap();
        let (want, _) = ensemble_yield(Momentum::new(0.2, 0.0), &nodes, &cfg, &atom, &cell, BranchRule::SteepestDescent);
        assert_eq!(l.points, vec![(0.2, want)]);
    }

    #[test]
    fn budget() {
        let t = FailureTally { evaluations: 1000, failed_evaluations: 11, ..Default::default() };
        assert!(matches!(t.check_budget(), Err(AtiError::FailureBudgetExceeded { .. })));
        let t = FailureTally { evaluations: 1000, failed_evaluations: 10, ..Default::default() };
        assert!(t.check_budget().is_ok());
    }
}
