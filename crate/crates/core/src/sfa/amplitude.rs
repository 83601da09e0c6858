//! Saddle-point amplitudes and yields.
//!
//! Each saddle contributes `m = √(2πi/S'')·e^{iS}·d_x(p + A)·E` with
//! `S = S(0, t_sp)`. Over a window spanning whole ω periods the coherent
//! sum depends on where the window starts; the yield is therefore the
//! average of `|Σ m|²` over all cyclic start positions, one just before
//! each root. Windows that are not whole periods use the plain coherent sum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{AtomSpec, FieldConfig, FieldRealization};
use crate::phase_space::ComplexAmplitude;

use super::action::ActionSeries;
use super::dipole::dipole_element;
use super::saddle::{find_cell_saddles, find_saddles, Orbit, SaddleSearch, SaddleSolution, TimeWindow};
use super::Momentum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Terms with `|S''|` below this sit on a caustic and are dropped.
pub const CAUSTIC_THRESHOLD: f64 = 1e-10;

/// Square-root branch for the Gaussian prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    /// Orient the steepest-descent path through each saddle along the
    /// increasing real axis (`Re √(2πi/S'') ≥ 0`).
    #[default]
    SteepestDescent,
    /// Steepest descent with the sign of every long-orbit term flipped.
    /// Deliberately wrong; kept as a negative control.
    FlipLong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleTerm {
    pub saddle: SaddleSolution,
    pub amplitude: Complex64,
    pub near_pole: bool,
}

/// One yield evaluation with its bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct YieldEval {
    pub value: f64,
    pub saddles: usize,
    pub failures: usize,
    pub caustics: usize,
    pub near_pole: bool,
}

/// Precomputed per-(p, α) state shared by all saddles.
pub struct AmplitudeContext<'a> {
    pub cfg: &'a FieldConfig,
    pub atom: &'a AtomSpec,
    pub p: Momentum,
    pub alpha: ComplexAmplitude,
    series: ActionSeries,
    origin: Complex64,
}

impl<'a> AmplitudeContext<'a> {
    pub fn new(p: Momentum, alpha: ComplexAmplitude, cfg: &'a FieldConfig, atom: &'a AtomSpec) -> Self {
        let series = ActionSeries::new(FieldRealization::new(cfg, alpha), p, atom.ip);
        let origin = series.antiderivative(Complex64::new(0.0, 0.0));
        AmplitudeContext { cfg, atom, p, alpha, series, origin }
    }

    pub fn series(&self) -> &ActionSeries {
        &self.series
    }

    /// Phase gained by `e^{iS}` when a saddle is moved one ω period later.
    pub fn period_phase(&self) -> Complex64 {
        (I * self.series.mean_rate() * self.cfg.period()).exp()
    }

    /// `None` on a caustic.
    pub fn term(&self, sol: &SaddleSolution, rule: BranchRule) -> Option<SaddleTerm> {
        let t = sol.t_sp.to_complex();
        let (a, e) = self.series.field.potential_and_field(t);
        let vx = self.p.px + a;
        let s2 = -vx * e;
        if s2.norm() < CAUSTIC_THRESHOLD {
            return None;
        }
        let mut pref = (2.0 * std::f64::consts::PI * I / s2).sqrt();
        if pref.re < 0.0 {
            pref = -pref;
        }
        if rule == BranchRule::FlipLong && sol.orbit == Orbit::Long {
            pref = -pref;
        }
        let s = self.series.antiderivative(t) - self.origin;
        let d = dipole_element(vx, Complex64::new(self.p.py, 0.0), self.atom.lambda_eff);
        Some(SaddleTerm { saddle: *sol, amplitude: pref * (I * s).exp() * d.x * e, near_pole: d.near_pole })
    }

    fn terms(&self, search: &SaddleSearch, rule: BranchRule, eval: &mut YieldEval) -> Vec<SaddleTerm> {
        let mut out = Vec::with_capacity(search.solutions.len());
        for sol in &search.solutions {
            match self.term(sol, rule) {
                Some(t) => {
                    eval.near_pole |= t.near_pole;
                    out.push(t);
                }
                None => eval.caustics += 1,
            }
        }
        eval.saddles = out.len();
        eval.failures = search.failures;
        out
    }

    /// Yield over `window` following the rule in the module docs.
    pub fn window_yield(&self, window: &TimeWindow, rule: BranchRule) -> YieldEval {
        let mut eval = YieldEval::default();
        let period = self.cfg.period();
        let cells = (window.t_end - window.t_start) / period;
        let n_cells = cells.round();
        if n_cells >= 1.0 && (cells - n_cells).abs() < 1e-9 && window.is_halfcycle_aligned(self.cfg) {
            let search = find_cell_saddles(self.p, self.alpha, self.cfg, self.atom, window.t_start);
            let terms = self.terms(&search, rule, &mut eval);
            let m: Vec<Complex64> = terms.iter().map(|t| t.amplitude).collect();
            eval.value = cyclic_average(&m, self.period_phase(), n_cells as usize);
        } else {
            let search = find_saddles(self.p, self.alpha, self.cfg, self.atom, window);
            let terms = self.terms(&search, rule, &mut eval);
            eval.value = terms.iter().map(|t| t.amplitude).sum::<Complex64>().norm_sqr();
        }
        eval
    }
}

/// `(1/n)·Σ_k |Σ_{j=k}^{k+n·cells−1} m_j|²` with `m_{j+n} = m_j·phase`.
fn cyclic_average(m: &[Complex64], phase: Complex64, cells: usize) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    // Σ over `cells` consecutive copies of the cell sum
    let geom: Complex64 = (0..cells).map(|c| phase.powu(c as u32)).sum();
    let full: Complex64 = m.iter().sum::<Complex64>() * geom;
    let wrap = phase.powu(cells as u32);
    let mut acc = 0.0;
    let mut head = Complex64::new(0.0, 0.0);
    for k in 0..n {
        // window starting at root k: roots j ≥ k of the first cell, full middle
        // cells, then roots j < k of the cell after the last
        let sum = full - head + head * wrap;
        acc += sum.norm_sqr();
        head += m[k];
    }
    acc / n as f64
}

pub fn saddle_terms(
    p: Momentum,
    alpha: ComplexAmplitude,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    rule: BranchRule,
) -> Vec<SaddleTerm> {
    let ctx = AmplitudeContext::new(p, alpha, cfg, atom);
    let mut eval = YieldEval::default();
    let search = find_saddles(p, alpha, cfg, atom, window);
    ctx.terms(&search, rule, &mut eval)
}

/// `Y_α(p)` over one unit cell.
pub fn pmd_single(p: Momentum, alpha: ComplexAmplitude, cfg: &FieldConfig, atom: &AtomSpec, unit_cell: &TimeWindow) -> f64 {
    AmplitudeContext::new(p, alpha, cfg, atom).window_yield(unit_cell, BranchRule::SteepestDescent).value
}

/// Yield from the saddles with `Re t_sp` inside `window`.
pub fn differential_yield(p: Momentum, alpha: ComplexAmplitude, cfg: &FieldConfig, atom: &AtomSpec, window: &TimeWindow) -> f64 {
    AmplitudeContext::new(p, alpha, cfg, atom).window_yield(window, BranchRule::SteepestDescent).value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FieldConfig {
        FieldConfig::from_strong_field(0.057, 0.0925, 1e-8, 0.0).unwrap()
    }

    #[test]
    fn cyclic_average_matches_brute_force() {
        let m = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2), Complex64::new(0.1, -0.7)];
        let phase = Complex64::from_polar(1.0, 0.9);
        for cells in 1..4 {
            let n = m.len();
            let mut brute = 0.0;
            for k in 0..n {
                let s: Complex64 = (k..k + n * cells).map(|j| m[j % n] * phase.powu((j / n) as u32)).sum();
                brute += s.norm_sqr();
            }
            brute /= n as f64;
            assert!((cyclic_average(&m, phase, cells) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn on_ring_average_is_plain_sum() {
        let m = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2)];
        let plain = (m[0] + m[1]).norm_sqr();
        assert!((cyclic_average(&m, Complex64::new(1.0, 0.0), 1) - plain).abs() < 1e-14);
    }

    #[test]
    fn full_cell_window_equals_pmd_single() {
        let c = cfg();
        let atom = AtomSpec::helium();
        let cell = TimeWindow::unit_cell(&c);
        let p = Momentum::new(0.37, 0.12);
        let a = ComplexAmplitude::new(3e5, -1e5);
        assert_eq!(pmd_single(p, a, &c, &atom, &cell), differential_yield(p, a, &c, &atom, &cell));
    }

    #[test]
    fn single_event_window_is_one_term() {
        let c = cfg();
        let atom = AtomSpec::helium();
        let p = Momentum::new(0.2, 0.0);
        let w = TimeWindow::event(&c, super::super::saddle::Event::I2);
        let terms = saddle_terms(p, ComplexAmplitude::ZERO, &c, &atom, &w, BranchRule::SteepestDescent);
        assert_eq!(terms.len(), 1);
        let y = differential_yield(p, ComplexAmplitude::ZERO, &c, &atom, &w);
        assert!((y - terms[0].amplitude.norm_sqr()).abs() <= 1e-15 * y);
    }

    #[test]
    fn monochromatic_mirror_symmetry() {
        let c = cfg();
        let atom = AtomSpec::helium();
        let cell = TimeWindow::unit_cell(&c);
        for (px, py) in [(0.1, 0.0), (0.45, 0.3), (0.83, -0.2), (1.3, 0.5)] {
            let a = pmd_single(Momentum::new(px, py), ComplexAmplitude::ZERO, &c, &atom, &cell);
            let b = pmd_single(Momentum::new(-px, py), ComplexAmplitude::ZERO, &c, &atom, &cell);
            assert!(a > 0.0);
            assert!((a - b).abs() <= 1e-8 * a.max(b), "{px} {py}: {a} vs {b}");
        }
    }

    #[test]
    fn no_saddles_no_yield() {
        assert_eq!(cyclic_average(&[], Complex64::new(1.0, 0.0), 1), 0.0);
    }
}
