//! Photon-statistics-force saddles: the joint stationary point in the ionization
//! time `t'` and the complex weak-field amplitude `(α_x, α_y)` of a
//! squeezed-vacuum weighted transition amplitude.
//!
//! The three conditions are
//!
//! ```text
//! ½[(p_x + A_α(t'))² + p_y²] + I_p = 0
//! −(g/ω)·∫_{t'}^{t} (p_x + A_α) cos ωτ dτ + iα_x·c_− + α_y·tanh r = 0
//! −(g/ω)·∫_{t'}^{t} (p_x + A_α) sin ωτ dτ + iα_y·c_+ + α_x·tanh r = 0
//! ```
//!
//! with `c_∓ = 2/(e^{∓r} cosh r) + 1` and `A_α = A_0 cos 2ωt +
//! (2g/ω)(α_x cos ωt + α_y sin ωt)`. The detection time `t` is real and sits
//! a whole number of ω periods after `Re t'`, so the system is not
//! holomorphic in `t'`; it is solved by Newton iteration on the six real
//! unknowns.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{log_log_fit, LineFit};
use crate::error::{AtiError, Result};
use crate::field::{FieldConfig, FieldRealization};
use crate::sfa::saddle::monochromatic_seed;
use crate::sfa::Momentum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Accepted max-norm of the complex residuals.
pub const PSF_RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Which form of the hyperbolic coefficients enters the amplitude equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientForm {
    #[default]
    Exact,
    /// Large-`r` truncation in terms of the squeezed intensity.
    Taylor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsfParams {
    pub p: Momentum,
    pub ip: f64,
    pub omega: f64,
    pub e_2w: f64,
    pub g: f64,
    pub r: f64,
    /// Whole ω periods between `Re t'` and the detection time.
    pub periods: u32,
    /// Half-cycle whose ionization saddle seeds the search.
    pub halfcycle: i64,
    pub coefficients: CoefficientForm,
}

impl PsfParams {
    pub fn new(p: Momentum, ip: f64, omega: f64, e_2w: f64, g: f64, r: f64) -> Result<Self> {
        let params = PsfParams { p, ip, omega, e_2w, g, r, periods: 4, halfcycle: 0, coefficients: CoefficientForm::Exact };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(AtiError::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        pos("ip", self.ip)?;
        pos("omega", self.omega)?;
        pos("e_2w", self.e_2w)?;
        pos("g", self.g)?;
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(AtiError::invalid("r", format!("must be non-negative, got {}", self.r)));
        }
        if self.periods == 0 {
            return Err(AtiError::invalid("periods", "must be at least 1"));
        }
        if !(self.p.px.is_finite() && self.p.py.is_finite()) {
            return Err(AtiError::invalid("p", "must be finite"));
        }
        Ok(())
    }

    fn field_config(&self) -> FieldConfig {
        FieldConfig::from_strong_field(self.omega, self.e_2w, self.g, 0.0).expect("validated parameters")
    }

    /// `(c_−, c_+, tanh r)`.
    fn coefficients(&self) -> (f64, f64, f64) {
        let (em, ep) = match self.coefficients {
            CoefficientForm::Exact => (exp_cosh_minus(self.r), exp_cosh_plus(self.r)),
            CoefficientForm::Taylor => {
                let s2 = self.r.sinh().powi(2);
                (0.5 + 1.0 / (8.0 * s2), 2.0 * s2)
            }
        };
        (2.0 / em + 1.0, 2.0 / ep + 1.0, self.r.tanh())
    }
}

/// `e^{−r} cosh r`.
pub fn exp_cosh_minus(r: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * r).exp())
}

/// `e^{r} cosh r`.
pub fn exp_cosh_plus(r: f64) -> f64 {
    0.5 * ((2.0 * r).exp() + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsfSolution {
    pub t_sp: Complex64,
    pub alpha_x: Complex64,
    pub alpha_y: Complex64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub params: PsfParams,
}

/// Primitives of `cos ωτ·(p_x + A_α(τ))` and `sin ωτ·(p_x + A_α(τ))`, split
/// into the α-independent part and the coefficients multiplying `α_x`,
/// `α_y` (without the `2g/ω` factor).
struct Primitives {
    c0: Complex64,
    cx: Complex64,
    cy: Complex64,
    s0: Complex64,
    sx: Complex64,
    sy: Complex64,
}

fn primitives(px: f64, a0: f64, w: f64, t: Complex64) -> Primitives {
    let (s1, c1) = ((w * t).sin(), (w * t).cos());
    let (s2, c2) = ((2.0 * w * t).sin(), (2.0 * w * t).cos());
    let (s3, c3) = ((3.0 * w * t).sin(), (3.0 * w * t).cos());
    Primitives {
        c0: px * s1 / w + 0.5 * a0 * (s3 / (3.0 * w) + s1 / w),
        cx: 0.5 * t + s2 / (4.0 * w),
        cy: -c2 / (4.0 * w),
        s0: -px * c1 / w + 0.5 * a0 * (-c3 / (3.0 * w) + c1 / w),
        sx: -c2 / (4.0 * w),
        sy: 0.5 * t - s2 / (4.0 * w),
    }
}

/// The residuals and their derivatives in the complex unknowns
/// `(t', α_x, α_y)`; `dt_end` holds the extra dependence on `Re t'` through
/// the detection time.
struct Eval {
    f: [Complex64; 3],
    jac: [[Complex64; 3]; 3],
    dt_end: [Complex64; 3],
}

struct System {
    params: PsfParams,
    cfg: FieldConfig,
    cm: f64,
    cp: f64,
    th: f64,
}

impl System {
    fn new(params: PsfParams) -> Self {
        let (cm, cp, th) = params.coefficients();
        System { cfg: params.field_config(), params, cm, cp, th }
    }

    fn detection_time(&self, t: Complex64) -> f64 {
        t.re + self.params.periods as f64 * self.cfg.period()
    }

    fn eval(&self, t: Complex64, ax: Complex64, ay: Complex64) -> Eval {
        let prm = &self.params;
        let w = prm.omega;
        let a0 = self.cfg.a_2w();
        let k = 2.0 * prm.g / w;
        let pre = -prm.g / w;
        let field = FieldRealization::with_components(&self.cfg, ax, ay);

        let (a_tp, e_tp) = field.potential_and_field(t);
        let v_tp = prm.p.px + a_tp;
        let t_end = Complex64::new(self.detection_time(t), 0.0);
        let v_end = prm.p.px + field.vector_potential(t_end);

        let lo = primitives(prm.p.px, a0, w, t);
        let hi = primitives(prm.p.px, a0, w, t_end);
        let jc = (hi.c0 - lo.c0) + k * (ax * (hi.cx - lo.cx) + ay * (hi.cy - lo.cy));
        let js = (hi.s0 - lo.s0) + k * (ax * (hi.sx - lo.sx) + ay * (hi.sy - lo.sy));

        let (cos_tp, sin_tp) = ((w * t).cos(), (w * t).sin());
        let (cos_end, sin_end) = ((w * t_end).cos(), (w * t_end).sin());

        let f = [
            0.5 * (v_tp * v_tp + prm.p.py * prm.p.py) + prm.ip,
            pre * jc + I * self.cm * ax + self.th * ay,
            pre * js + I * self.cp * ay + self.th * ax,
        ];
        let th = Complex64::new(self.th, 0.0);
        let jac = [
            [-v_tp * e_tp, v_tp * k * cos_tp, v_tp * k * sin_tp],
            [-pre * v_tp * cos_tp, pre * k * (hi.cx - lo.cx) + I * self.cm, pre * k * (hi.cy - lo.cy) + th],
            [-pre * v_tp * sin_tp, pre * k * (hi.sx - lo.sx) + th, pre * k * (hi.sy - lo.sy) + I * self.cp],
        ];
        let dt_end = [Complex64::new(0.0, 0.0), pre * v_end * cos_end, pre * v_end * sin_end];
        Eval { f, jac, dt_end }
    }
}

fn max_norm(f: &[Complex64; 3]) -> f64 {
    f.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Newton iteration from the α = 0 ionization saddle of the seeding
/// half-cycle. Fails with [`AtiError::PsfNotConverged`] when the residual
/// stays above [`PSF_RESIDUAL_TOLERANCE`].
pub fn solve_psf(params: &PsfParams) -> Result<PsfSolution> {
    params.validate()?;
    let sys = System::new(*params);
    let seed = monochromatic_seed(&sys.cfg, params.p, params.ip, params.halfcycle)
        .ok_or_else(|| AtiError::invalid("e_2w", "no ionization saddle without a strong field"))?;
    let mut x = SVector::<f64, 6>::from([seed.re, seed.im, 0.0, 0.0, 0.0, 0.0]);
    let unpack = |x: &SVector<f64, 6>| {
        (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]), Complex64::new(x[4], x[5]))
    };
    let (t, ax, ay) = unpack(&x);
    let mut ev = sys.eval(t, ax, ay);
    let mut res = max_norm(&ev.f);
    let mut iterations = 0;
    while res > PSF_RESIDUAL_TOLERANCE * 1e-3 && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jr = SMatrix::<f64, 6, 6>::zeros();
        let mut fr = SVector::<f64, 6>::zeros();
        for row in 0..3 {
            fr[2 * row] = ev.f[row].re;
            fr[2 * row + 1] = ev.f[row].im;
            for col in 0..3 {
                // ∂/∂(Re z) = D, ∂/∂(Im z) = iD for a holomorphic dependence
                let mut d_re = ev.jac[row][col];
                let d_im = I * ev.jac[row][col];
                if col == 0 {
                    d_re += ev.dt_end[row];
                }
                jr[(2 * row, 2 * col)] = d_re.re;
                jr[(2 * row + 1, 2 * col)] = d_re.im;
                jr[(2 * row, 2 * col + 1)] = d_im.re;
                jr[(2 * row + 1, 2 * col + 1)] = d_im.im;
            }
        }
        let Some(step) = jr.lu().solve(&fr) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = x - lambda * step;
            let (t, ax, ay) = unpack(&trial);
            let tev = sys.eval(t, ax, ay);
            let tres = max_norm(&tev.f);
            if tres.is_finite() && tres < res {
                x = trial;
                ev = tev;
                res = tres;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res > PSF_RESIDUAL_TOLERANCE {
        return Err(AtiError::PsfNotConverged { residual: res });
    }
    let (t_sp, alpha_x, alpha_y) = unpack(&x);
    Ok(PsfSolution { t_sp, alpha_x, alpha_y, residual_norm: res, iterations, params: *params })
}

/// Amplitude equations with all integrals dropped and `r → ∞`: the linear
/// system `[[5i, 1], [1, i]]·α = 0`, solved by Cramer's rule.
pub fn zeroth_order_psf() -> (Complex64, Complex64) {
    let m = [[5.0 * I, Complex64::new(1.0, 0.0)], [Complex64::new(1.0, 0.0), I]];
    let b = [Complex64::new(0.0, 0.0); 2];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let ax = (b[0] * m[1][1] - m[0][1] * b[1]) / det;
    let ay = (m[0][0] * b[1] - b[0] * m[1][0]) / det;
    (ax, ay)
}

/// First order in `g`: the integrals are evaluated at α = 0 along the
/// α = 0 saddle and the remaining 2×2 linear system is solved exactly.
pub fn first_order_psf(params: &PsfParams) -> Result<(Complex64, Complex64)> {
    params.validate()?;
    let sys = System::new(*params);
    let seed = monochromatic_seed(&sys.cfg, params.p, params.ip, params.halfcycle)
        .ok_or_else(|| AtiError::invalid("e_2w", "no ionization saddle without a strong field"))?;
    let zero = Complex64::new(0.0, 0.0);
    let ev = sys.eval(seed, zero, zero);
    // f2 = b_x + i c_− α_x + tanh·α_y, f3 = b_y + tanh·α_x + i c_+ α_y
    let (bx, by) = (ev.f[1], ev.f[2]);
    let m00 = I * sys.cm;
    let m01 = Complex64::new(sys.th, 0.0);
    let m11 = I * sys.cp;
    let det = m00 * m11 - m01 * m01;
    let ax = (-bx * m11 + m01 * by) / det;
    let ay = (-m00 * by + bx * m01) / det;
    Ok((ax, ay))
}

/// Exact and truncated forms of the hyperbolic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub exact_minus: f64,
    pub exact_plus: f64,
    pub approx_minus: f64,
    pub approx_plus: f64,
    pub rel_err_minus: f64,
    pub rel_err_plus: f64,
}

/// Compares `e^{∓r} cosh r` with `½ + g²/(8I)` and `2I/g²`, where `I` is the
/// squeezed intensity.
pub fn taylor_coefficients(r: f64, g: f64, i_squ: f64) -> TaylorReport {
    let exact_minus = exp_cosh_minus(r);
    let exact_plus = exp_cosh_plus(r);
    let approx_minus = 0.5 + g * g / (8.0 * i_squ);
    let approx_plus = 2.0 * i_squ / (g * g);
    TaylorReport {
        exact_minus,
        exact_plus,
        approx_minus,
        approx_plus,
        rel_err_minus: (approx_minus - exact_minus).abs() / exact_minus,
        rel_err_plus: (approx_plus - exact_plus).abs() / exact_plus,
    }
}

/// Solves at each coupling and fits `log|α| = slope·log g + c` for both
/// components.
pub fn g_sweep(base: &PsfParams, couplings: &[f64]) -> Result<(Vec<PsfSolution>, Option<LineFit>, Option<LineFit>)> {
    let sols = couplings
        .iter()
        .map(|&g| solve_psf(&PsfParams { g, ..*base }))
        .collect::<Result<Vec<_>>>()?;
    let fx: Vec<(f64, f64)> = sols.iter().map(|s| (s.params.g, s.alpha_x.norm())).collect();
    let fy: Vec<(f64, f64)> = sols.iter().map(|s| (s.params.g, s.alpha_y.norm())).collect();
    Ok((sols, log_log_fit(&fx), log_log_fit(&fy)))
}
