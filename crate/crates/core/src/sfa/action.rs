//! Closed-form semiclassical action.
//!
//! Sign convention: `S(p, t, t') = −∫_{t'}^{t} ([p + A(τ)]²/2 + I_p) dτ`, so
//! that `∂S/∂t' = [p + A(t')]²/2 + I_p` and a saddle with `Im t' > 0`
//! carries `|e^{iS}| = e^{−Im S} < 1`. This is the complex conjugate
//! orientation of `I_p(t − t') + ½∫[p + A]²`; yields are unaffected.

use num_complex::Complex64;

use crate::field::{AtomSpec, FieldConfig, FieldRealization};
use crate::phase_space::ComplexAmplitude;

use super::Momentum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fourier coefficients `c_k`, `k = −4..=4`, of
/// `L(τ) = [p + A(τ)]²/2 + I_p` together with the field they came from.
#[derive(Debug, Clone, Copy)]
pub struct ActionSeries {
    pub field: FieldRealization,
    pub p: Momentum,
    pub ip: f64,
    coeff: [Complex64; 9],
}

impl ActionSeries {
    pub fn new(field: FieldRealization, p: Momentum, ip: f64) -> Self {
        let a = field.coefficients();
        let mut c = [Complex64::new(0.0, 0.0); 9];
        // ½A²
        for (i, ai) in a.iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                c[i + j] += 0.5 * ai * aj;
            }
        }
        // p_x·A
        for (j, aj) in a.iter().enumerate() {
            c[j + 2] += p.px * aj;
        }
        c[4] += 0.5 * (p.px * p.px + p.py * p.py) + ip;
        ActionSeries { field, p, ip, coeff: c }
    }

    /// Mean of `L` over a cycle, i.e. `I_p + p²/2 + ⟨A²⟩/2`.
    pub fn mean_rate(&self) -> Complex64 {
        self.coeff[4]
    }

    /// Antiderivative `F` of `L` with `F(t) = c₀t + Σ_{k≠0} c_k e^{ikωt}/(ikω)`.
    pub fn antiderivative(&self, t: Complex64) -> Complex64 {
        let w = self.field.omega;
        let z = (I * w * t).exp();
        let zi = (-I * w * t).exp();
        let mut acc = self.coeff[4] * t;
        let (mut zp, mut zm) = (z, zi);
        for k in 1..=4 {
            let kw = I * (k as f64 * w);
            acc += self.coeff[4 + k] * zp / kw - self.coeff[4 - k] * zm / kw;
            zp *= z;
            zm *= zi;
        }
        acc
    }

    /// `S(p, t, t') = F(t') − F(t)`.
    pub fn action(&self, t: Complex64, t_prime: Complex64) -> Complex64 {
        self.antiderivative(t_prime) - self.antiderivative(t)
    }

    /// `∂S/∂t' = [p + A(t')]²/2 + I_p`.
    pub fn d_action(&self, t_prime: Complex64) -> Complex64 {
        let v = self.p.px + self.field.vector_potential(t_prime);
        0.5 * (v * v + self.p.py * self.p.py) + self.ip
    }

    /// `∂²S/∂t'² = [p + A(t')]·dA/dt' = −[p + A(t')]·E(t')`.
    pub fn second_derivative(&self, t_prime: Complex64) -> Complex64 {
        let (a, e) = self.field.potential_and_field(t_prime);
        -(self.p.px + a) * e
    }
}

/// Semiclassical action for one field realization.
pub fn action(
    p: Momentum,
    t: Complex64,
    t_prime: Complex64,
    alpha: ComplexAmplitude,
    cfg: &FieldConfig,
    atom: &AtomSpec,
) -> Complex64 {
    ActionSeries::new(FieldRealization::new(cfg, alpha), p, atom.ip).action(t, t_prime)
}
