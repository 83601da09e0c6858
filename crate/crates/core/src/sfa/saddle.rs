//! Complex ionization times: roots of `[p + A(t)]²/2 + I_p = 0`.
//!
//! Each half-cycle `h` of the 2ω field (`t ∈ [h·π/(2ω), (h+1)·π/(2ω))`)
//! holds one physical root for a given momentum. With `κ = √(2I_p + p_y²)`
//! the root satisfies the linear branch `p_x + A(t) = s·iκ`, where
//! `s = −sign E` on that half-cycle. For the 2ω field alone the root is
//! `cos(2ωt) = (−p_x + s·iκ)/A₀`; that closed form seeds a damped Newton
//! iteration on the full two-color field, continued in `α` when the weak
//! field moves the root far from its seed.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AtiError, Result};
use crate::field::{AtomSpec, ComplexTime, FieldConfig, FieldRealization};
use crate::phase_space::ComplexAmplitude;

use super::Momentum;


pub const MAX_ITERATIONS: usize = 200;
pub const DAMPING: f64 = 0.5;
/// Relative step size at which Newton is considered converged.
pub const STEP_TOLERANCE: f64 = 1e-14;
/// Roots closer than this are the same root.
pub const DUPLICATE_DISTANCE: f64 = 1e-8;

/// Ionization event within one ω period: the half-cycle of the 2ω field
/// (counted from `t = 0`, modulo 4) that contains the ionization time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Event {
    I1,
    I2,
    I3,
    I4,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::I1, Event::I2, Event::I3, Event::I4];

    pub fn from_halfcycle(h: i64) -> Event {
        Event::ALL[h.rem_euclid(4) as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{}", self.index() + 1)
    }
}

impl std::str::FromStr for Event {
    type Err = AtiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I1" | "1" => Ok(Event::I1),
            "I2" | "2" => Ok(Event::I2),
            "I3" | "3" => Ok(Event::I3),
            "I4" | "4" => Ok(Event::I4),
            other => Err(AtiError::invalid("event", format!("unknown event label `{other}`"))),
        }
    }
}

/// Short orbits leave after the field extremum of their half-cycle, long
/// orbits before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orbit {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub t_sp: ComplexTime,
    pub event: Event,
    pub orbit: Orbit,
    /// `|[p + A(t_sp)]²/2 + I_p|`.
    pub residual: f64,
    pub halfcycle_index: i64,
    /// `s` in `p_x + A(t_sp) = s·iκ`.
    pub branch: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start: f64,
    pub t_end: f64,
}

impl TimeWindow {
    pub fn new(t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(AtiError::invalid("window", format!("need t_start < t_end, got [{t_start}, {t_end})")));
        }
        Ok(TimeWindow { t_start, t_end })
    }

    /// One ω period starting at `t = 0`: events I₁–I₄.
    pub fn unit_cell(cfg: &FieldConfig) -> Self {
        TimeWindow { t_start: 0.0, t_end: cfg.period() }
    }

    /// The half-cycle of the 2ω field holding `event` in the first ω period.
    pub fn event(cfg: &FieldConfig, event: Event) -> Self {
        let hc = cfg.half_cycle();
        let h = event.index() as f64;
        TimeWindow { t_start: h * hc, t_end: (h + 1.0) * hc }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }

    /// Half-cycle indices overlapping the window.
    pub fn halfcycles(&self, cfg: &FieldConfig) -> std::ops::Range<i64> {
        let hc = cfg.half_cycle();
        let first = (self.t_start / hc).floor() as i64;
        let last = (self.t_end / hc).ceil() as i64;
        first..last
    }

    /// Whether the window is a whole number of 2ω half-cycles aligned to `t = 0`.
    pub fn is_halfcycle_aligned(&self, cfg: &FieldConfig) -> bool {
        let hc = cfg.half_cycle();
        let on_grid = |t: f64| {
            let x = t / hc;
            (x - x.round()).abs() < 1e-9
        };
        on_grid(self.t_start) && on_grid(self.t_end)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SaddleSearch {
    pub solutions: Vec<SaddleSolution>,
    /// Half-cycles where Newton did not converge to a physical root.
    pub failures: usize,
    pub duplicates: usize,
}

fn kappa(p: Momentum, ip: f64) -> f64 {
    (2.0 * ip + p.py * p.py).sqrt()
}

/// Branch sign `s` for half-cycle `h`: even half-cycles have `E > 0`.
fn branch_of(h: i64) -> i8 {
    if h.rem_euclid(2) == 0 {
        -1
    } else {
        1
    }
}

/// Closed-form root for the 2ω field alone in half-cycle `h`.
pub fn monochromatic_seed(cfg: &FieldConfig, p: Momentum, ip: f64, h: i64) -> Option<Complex64> {
    let a0 = cfg.a_2w();
    if a0 <= 0.0 {
        return None;
    }
    let s = branch_of(h) as f64;
    let z = Complex64::new(-p.px, s * kappa(p, ip)) / a0;
    let w = z.acos();
    let two_omega = 2.0 * cfg.omega;
    let phase = if s < 0.0 {
        w + 2.0 * std::f64::consts::PI * h.div_euclid(2) as f64
    } else {
        -w + 2.0 * std::f64::consts::PI * (h + 1).div_euclid(2) as f64
    };
    Some(phase / two_omega)
}

/// Damped Newton iteration on `p_x + A(t) − target = 0`.
fn newton(field: &FieldRealization, px: f64, target: Complex64, t0: Complex64, scale: f64) -> Option<Complex64> {
    let mut t = t0;
    let (a, mut e) = field.potential_and_field(t);
    let mut res = px + a - target;
    let res_tol = 4.0 * f64::EPSILON * scale;
    for _ in 0..MAX_ITERATIONS {
        if res.norm() <= res_tol {
            return Some(t);
        }
        // d/dt (p_x + A) = −E
        let step = res / e;
        if !step.is_finite() {
            return None;
        }
        let mut lam = 1.0;
        let (mut tn, mut en, mut resn);
        loop {
            tn = t + step * lam;
            let (an, e_new) = field.potential_and_field(tn);
            en = e_new;
            resn = px + an - target;
            if resn.norm() < res.norm() || lam < 1e-6 {
                break;
            }
            lam *= DAMPING;
        }
        let moved = (tn - t).norm();
        t = tn;
        e = en;
        res = resn;
        if moved < STEP_TOLERANCE * t.norm().max(1.0) {
            return Some(t);
        }
    }
    None
}

/// Root for half-cycle `h` of the field with amplitude `alpha`.
pub fn solve_halfcycle(
    cfg: &FieldConfig,
    atom: &AtomSpec,
    p: Momentum,
    alpha: ComplexAmplitude,
    h: i64,
) -> Option<SaddleSolution> {
    let seed = monochromatic_seed(cfg, p, atom.ip, h)?;
    let s = branch_of(h);
    let k = kappa(p, atom.ip);
    let target = Complex64::new(0.0, s as f64 * k);
    let scale = p.px.abs() + cfg.a_2w() + k + 2.0 * cfg.g_w * alpha.norm() / cfg.omega;
    let hc = cfg.half_cycle();

    let full = FieldRealization::new(cfg, alpha);
    let physical = |t: Complex64| t.im > 0.0 && t.is_finite();

    let mut root = newton(&full, p.px, target, seed, scale)
        .filter(|&t| physical(t) && (t - seed).norm() <= 0.25 * hc);
    if root.is_none() {
        // continuation in α from the monochromatic root
        for steps in [8usize, 64] {
            let mut t = seed;
            let mut ok = true;
            for j in 1..=steps {
                let lam = j as f64 / steps as f64;
                let field = FieldRealization::new(cfg, ComplexAmplitude::new(alpha.ax * lam, alpha.ay * lam));
                match newton(&field, p.px, target, t, scale) {
                    Some(tn) if physical(tn) && (tn - t).norm() <= 0.25 * hc => t = tn,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                root = Some(t);
                break;
            }
        }
    }
    let t = root?;
    let v = p.px + full.vector_potential(t);
    let residual = (0.5 * (v * v + p.py * p.py) + atom.ip).norm();
    Some(label(t, residual, s, hc))
}

fn label(t: Complex64, residual: f64, branch: i8, hc: f64) -> SaddleSolution {
    let h = (t.re / hc).floor() as i64;
    let extremum = (h as f64 + 0.5) * hc;
    SaddleSolution {
        t_sp: t.into(),
        event: Event::from_halfcycle(h),
        orbit: if t.re >= extremum { Orbit::Short } else { Orbit::Long },
        residual,
        halfcycle_index: h,
        branch,
    }
}

/// Same root moved by `shift` (a whole number of ω periods).
pub(crate) fn shifted(sol: &SaddleSolution, shift: f64, hc: f64) -> SaddleSolution {
    let t = sol.t_sp.to_complex() + shift;
    label(t, sol.residual, sol.branch, hc)
}

/// All physical roots with `Re t_sp` inside `window`.
pub fn find_saddles(
    p: Momentum,
    alpha: ComplexAmplitude,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
) -> SaddleSearch {
    let mut out = SaddleSearch::default();
    let inside = window.halfcycles(cfg);
    // roots may drift out of their seed half-cycle, so look one further on each side
    for h in (inside.start - 1)..(inside.end + 1) {
        match solve_halfcycle(cfg, atom, p, alpha, h) {
            Some(sol) => {
                if !window.contains(sol.t_sp.tr) {
                    continue;
                }
                push_unique(&mut out, sol);
            }
            None if inside.contains(&h) => out.failures += 1,
            None => {}
        }
    }
    out.solutions.sort_by(|a, b| a.t_sp.tr.total_cmp(&b.t_sp.tr));
    if out.failures > 0 {
        log::debug!("{} saddle(s) lost at p = ({}, {}), alpha = ({:e}, {:e})", out.failures, p.px, p.py, alpha.ax, alpha.ay);
    }
    out
}

fn push_unique(out: &mut SaddleSearch, sol: SaddleSolution) {
    let t = sol.t_sp.to_complex();
    if out.solutions.iter().any(|o| (o.t_sp.to_complex() - t).norm() < DUPLICATE_DISTANCE) {
        out.duplicates += 1;
    } else {
        out.solutions.push(sol);
    }
}

/// Roots of one ω period starting at `t_start`, each folded into
/// `[t_start, t_start + T)`; sorted by `Re t_sp`.
pub fn find_cell_saddles(
    p: Momentum,
    alpha: ComplexAmplitude,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    t_start: f64,
) -> SaddleSearch {
    let hc = cfg.half_cycle();
    let period = cfg.period();
    let h0 = (t_start / hc).round() as i64;
    let mut out = SaddleSearch::default();
    for h in h0..h0 + 4 {
        match solve_halfcycle(cfg, atom, p, alpha, h) {
            Some(sol) => {
                let n = ((sol.t_sp.tr - t_start) / period).floor();
                let sol = if n != 0.0 { shifted(&sol, -n * period, hc) } else { sol };
                push_unique(&mut out, sol);
            }
            None => out.failures += 1,
        }
    }
    out.solutions.sort_by(|a, b| a.t_sp.tr.total_cmp(&b.t_sp.tr));
    out
}
