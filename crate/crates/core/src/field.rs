//! Two-color field `E_α(t)` and vector potential `A_α(t)` for one sampled
//! amplitude `α` of the weak mode, plus unit conversions.
//!
//! Both colors are continuous-wave and linearly polarized along x. The field
//! is a trigonometric polynomial in `ωt`, so everything is carried as
//! Fourier coefficients in `z = e^{iωt}`: products, antiderivatives and the
//! continuation to complex time are then exact.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AtiError, Result};
use crate::phase_space::{wrap_angle, ComplexAmplitude};

/// W/cm² corresponding to a field amplitude of 1 a.u.
pub const AU_INTENSITY_WCM2: f64 = 3.509_45e16;

/// `2πc·a₀` in nm·a.u.: photon energy in a.u. is this over the wavelength in nm.
pub const NM_HARTREE: f64 = 45.563_352_5;

pub const DEFAULT_COUPLING: f64 = 1e-8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Ionization potential (a.u.).
    pub ip: f64,
    /// Effective nuclear charge of the 1s-like orbital.
    pub lambda_eff: f64,
}

impl AtomSpec {
    pub fn new(ip: f64, lambda_eff: f64) -> Result<Self> {
        if !(ip.is_finite() && ip > 0.0) {
            return Err(AtiError::invalid("Ip", format!("must be > 0, got {ip}")));
        }
        if !(lambda_eff.is_finite() && lambda_eff > 0.0) {
            return Err(AtiError::invalid("lambda", format!("must be > 0, got {lambda_eff}")));
        }
        Ok(AtomSpec { ip, lambda_eff })
    }

    /// Helium 1s.
    pub fn helium() -> Self {
        AtomSpec { ip: 0.904, lambda_eff: 1.6875 }
    }
}

/// Parameters of the bichromatic field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Fundamental angular frequency ω (a.u.).
    pub omega: f64,
    /// Coupling `g(ω)` of the weak mode (a.u.).
    pub g_w: f64,
    /// Coupling `g(2ω)` of the strong mode (a.u.).
    pub g_2w: f64,
    /// Real coherent amplitude of the 2ω mode.
    pub alpha_2w: f64,
    /// Temporal phase θ of the ω component, wrapped to `(−π, π]`.
    pub theta: f64,
}

impl FieldConfig {
    pub fn new(omega: f64, g_w: f64, g_2w: f64, alpha_2w: f64, theta: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(AtiError::invalid("omega", format!("must be > 0, got {omega}")));
        }
        if !(g_w.is_finite() && g_w >= 0.0) {
            return Err(AtiError::invalid("g_w", format!("must be >= 0, got {g_w}")));
        }
        if !(g_2w.is_finite() && g_2w >= 0.0) {
            return Err(AtiError::invalid("g_2w", format!("must be >= 0, got {g_2w}")));
        }
        if !(alpha_2w.is_finite() && alpha_2w >= 0.0) {
            return Err(AtiError::invalid("alpha_2w", format!("must be >= 0, got {alpha_2w}")));
        }
        if !theta.is_finite() {
            return Err(AtiError::invalid("theta", "not finite"));
        }
        Ok(FieldConfig { omega, g_w, g_2w, alpha_2w, theta: wrap_angle(theta) })
    }

    /// Builds a config from the 2ω peak field. `g(2ω) = √2·g(ω)` since `g ∝ √ω`.
    pub fn from_strong_field(omega: f64, e_2w: f64, g_w: f64, theta: f64) -> Result<Self> {
        let g_2w = std::f64::consts::SQRT_2 * g_w;
        if !(g_2w > 0.0) {
            return Err(AtiError::invalid("g_w", "must be > 0 to carry the strong field"));
        }
        if !(e_2w.is_finite() && e_2w >= 0.0) {
            return Err(AtiError::invalid("E_2w", format!("must be >= 0, got {e_2w}")));
        }
        FieldConfig::new(omega, g_w, g_2w, e_2w / (2.0 * g_2w), theta)
    }

    /// Peak field of the 2ω component, `2·g(2ω)·α_2ω`.
    pub fn e_2w(&self) -> f64 {
        2.0 * self.g_2w * self.alpha_2w
    }

    /// Vector-potential amplitude of the 2ω component, `E_2ω/(2ω)`.
    pub fn a_2w(&self) -> f64 {
        self.g_2w * self.alpha_2w / self.omega
    }

    pub fn with_theta(&self, theta: f64) -> FieldConfig {
        FieldConfig { theta: wrap_angle(theta), ..*self }
    }

    /// Period of the ω field, `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Half-cycle of the 2ω field, `π/(2ω)`.
    pub fn half_cycle(&self) -> f64 {
        0.5 * PI / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    pub tr: f64,
    pub ti: f64,
}

impl ComplexTime {
    pub fn new(tr: f64, ti: f64) -> Self {
        ComplexTime { tr, ti }
    }

    pub fn real(tr: f64) -> Self {
        ComplexTime { tr, ti: 0.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.tr, self.ti)
    }
}

impl From<Complex64> for ComplexTime {
    fn from(z: Complex64) -> Self {
        ComplexTime { tr: z.re, ti: z.im }
    }
}

/// Fourier coefficients `a_k`, `k = −2..=2`, of `A(t) = Σ a_k e^{ikωt}` for
/// one realization of the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRealization {
    pub omega: f64,
    coeff: [Complex64; 5],
}

impl FieldRealization {
    pub fn new(cfg: &FieldConfig, alpha: ComplexAmplitude) -> Self {
        Self::with_components(cfg, Complex64::new(alpha.ax, 0.0), Complex64::new(alpha.ay, 0.0))
    }

    /// Analytic continuation in the amplitude: `α_x`, `α_y` may be complex
    /// and `α*` is replaced by `α_x − iα_y`.
    pub fn with_components(cfg: &FieldConfig, ax: Complex64, ay: Complex64) -> Self {
        let gw = cfg.g_w / cfg.omega;
        let a2 = 0.5 * cfg.a_2w();
        let eth = Complex64::from_polar(1.0, cfg.theta);
        let plus = gw * (ax - I * ay) * eth.conj();
        let minus = gw * (ax + I * ay) * eth;
        FieldRealization {
            omega: cfg.omega,
            coeff: [a2.into(), minus, Complex64::new(0.0, 0.0), plus, a2.into()],
        }
    }

    #[inline]
    fn powers(&self, t: Complex64) -> [Complex64; 5] {
        let z = (I * self.omega * t).exp();
        let zi = (-I * self.omega * t).exp();
        [zi * zi, zi, Complex64::new(1.0, 0.0), z, z * z]
    }

    pub fn vector_potential(&self, t: Complex64) -> Complex64 {
        let zp = self.powers(t);
        (0..5).map(|j| self.coeff[j] * zp[j]).sum()
    }

    pub fn electric_field(&self, t: Complex64) -> Complex64 {
        self.potential_and_field(t).1
    }

    /// `(A(t), E(t))` with `E = −dA/dt`.
    #[inline]
    pub fn potential_and_field(&self, t: Complex64) -> (Complex64, Complex64) {
        let zp = self.powers(t);
        let mut a = Complex64::new(0.0, 0.0);
        let mut e = Complex64::new(0.0, 0.0);
        for j in 0..5 {
            let k = j as f64 - 2.0;
            let term = self.coeff[j] * zp[j];
            a += term;
            e -= I * (k * self.omega) * term;
        }
        (a, e)
    }

    /// Cycle average of `A²`.
    pub fn mean_square_potential(&self) -> Complex64 {
        (0..5).map(|j| self.coeff[j] * self.coeff[4 - j]).sum()
    }

    pub(crate) fn coefficients(&self) -> &[Complex64; 5] {
        &self.coeff
    }
}

pub fn electric_field(cfg: &FieldConfig, alpha: ComplexAmplitude, t: ComplexTime) -> Complex64 {
    FieldRealization::new(cfg, alpha).electric_field(t.to_complex())
}

/// Zero-mean antiderivative of `−E`.
pub fn vector_potential(cfg: &FieldConfig, alpha: ComplexAmplitude, t: ComplexTime) -> Complex64 {
    FieldRealization::new(cfg, alpha).vector_potential(t.to_complex())
}

/// Peak field amplitude (a.u.) of a wave with intensity `intensity` W/cm².
pub fn intensity_to_amplitude(intensity: f64) -> Result<f64> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(AtiError::invalid("intensity", format!("must be finite and >= 0, got {intensity}")));
    }
    Ok((intensity / AU_INTENSITY_WCM2).sqrt())
}

/// Squeezing strength of a squeezed vacuum with intensity `I_squ = g²·sinh²r`.
pub fn squeezing_from_intensity(i_squ: f64, g: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(AtiError::invalid("g", format!("coupling must be > 0, got {g}")));
    }
    if !(i_squ.is_finite() && i_squ >= 0.0) {
        return Err(AtiError::invalid("I_squ", format!("must be finite and >= 0, got {i_squ}")));
    }
    Ok((i_squ.sqrt() / g).asinh())
}

pub fn intensity_from_squeezing(r: f64, g: f64) -> f64 {
    (g * r.sinh()).powi(2)
}

/// Mean photon number of the weak mode whose coherent-state counterpart has
/// peak field `√(I/I_au)`: `N = E²/(4g²)`. Coherent, squeezed and thermal
/// weak fields are compared at equal `N`.
pub fn photon_number_for_intensity(intensity: f64, g: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(AtiError::invalid("g_w", format!("coupling must be > 0, got {g}")));
    }
    let e = intensity_to_amplitude(intensity)?;
    Ok((e / (2.0 * g)).powi(2))
}

pub fn omega_from_wavelength_nm(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
        return Err(AtiError::invalid("wavelength_nm", format!("must be > 0, got {lambda_nm}")));
    }
    Ok(NM_HARTREE / lambda_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_cfg(theta: f64) -> FieldConfig {
        FieldConfig::from_strong_field(0.057, 0.106, 1e-8, theta).unwrap()
    }

    #[test]
    fn pure_two_omega_field() {
        let cfg = reference_cfg(0.3);
        let t = 12.345;
        let e = electric_field(&cfg, ComplexAmplitude::ZERO, ComplexTime::real(t));
        assert_relative_eq!(e.re, 0.106 * (2.0 * 0.057 * t).sin(), max_relative = 1e-13);
        assert!(e.im.abs() < 1e-16);
        // quarter of the 2ω period: 2ωt = π/2
        let tq = PI / 0.057 / 4.0;
        let e = electric_field(&cfg, ComplexAmplitude::ZERO, ComplexTime::real(tq));
        assert_relative_eq!(e.re, 0.106, max_relative = 1e-14);
        let a = vector_potential(&cfg, ComplexAmplitude::ZERO, ComplexTime::real(t));
        assert_relative_eq!(a.re, cfg.g_2w * cfg.alpha_2w / 0.057 * (2.0 * 0.057 * t).cos(), max_relative = 1e-13);
    }

    #[test]
    fn field_vanishes_at_origin_for_real_alpha() {
        let cfg = reference_cfg(0.0);
        let e = electric_field(&cfg, ComplexAmplitude::new(3.0e5, 0.0), ComplexTime::real(0.0));
        assert!(e.norm() < 1e-18);
    }

    #[test]
    fn weak_component_closed_form() {
        let cfg = reference_cfg(0.7);
        let alpha = ComplexAmplitude::new(2.0e5, -1.5e5);
        let t = 33.0;
        let psi = cfg.omega * t - cfg.theta;
        let want = 2.0 * cfg.g_w * (alpha.ax * psi.sin() - alpha.ay * psi.cos()) + cfg.e_2w() * (2.0 * cfg.omega * t).sin();
        let e = electric_field(&cfg, alpha, ComplexTime::real(t));
        assert_relative_eq!(e.re, want, max_relative = 1e-12);
    }

    #[test]
    fn finite_difference_derivative() {
        let cfg = reference_cfg(0.2);
        let f = FieldRealization::new(&cfg, ComplexAmplitude::new(1e5, 4e5));
        let h = 1e-6;
        for &t in &[Complex64::new(3.0, 0.0), Complex64::new(40.0, 9.0), Complex64::new(-7.0, 2.5)] {
            let fd = (f.vector_potential(t + h) - f.vector_potential(t - h)) / (2.0 * h);
            let e = f.electric_field(t);
            assert!((fd + e).norm() < 1e-8 * e.norm().max(1e-3));
        }
    }

    #[test]
    fn zero_cycle_average() {
        let cfg = reference_cfg(1.1);
        let f = FieldRealization::new(&cfg, ComplexAmplitude::new(-3e5, 2e5));
        let n = 4096;
        let dt = cfg.period() / n as f64;
        // rectangle rule is exact for trigonometric polynomials of low degree
        let avg: Complex64 = (0..n).map(|j| f.vector_potential(Complex64::new(j as f64 * dt, 0.0))).sum::<Complex64>() / n as f64;
        assert!(avg.norm() < 1e-12);
    }

    #[test]
    fn conversions() {
        assert_eq!(intensity_to_amplitude(0.0).unwrap(), 0.0);
        assert_relative_eq!(intensity_to_amplitude(AU_INTENSITY_WCM2).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(intensity_to_amplitude(3e14).unwrap(), (3e14 / 3.50945e16f64).sqrt(), max_relative = 1e-15);
        assert!((intensity_to_amplitude(3e14).unwrap() - 0.0925).abs() < 5e-4);
        assert!(intensity_to_amplitude(-1.0).is_err());

        assert_eq!(squeezing_from_intensity(0.0, 1e-8).unwrap(), 0.0);
        assert!(squeezing_from_intensity(1.0, 0.0).is_err());
        let g = 1e-8;
        let i = intensity_from_squeezing(12.15, g);
        assert_relative_eq!(i, (1e-8 * 12.15f64.sinh()).powi(2), max_relative = 1e-15);
        assert!((squeezing_from_intensity(i, g).unwrap() - 12.15).abs() < 1e-12);

        assert_relative_eq!(omega_from_wavelength_nm(800.0).unwrap(), 0.05695, max_relative = 1e-3);
    }

    #[test]
    fn strong_field_amplitude() {
        let cfg = reference_cfg(0.0);
        assert_relative_eq!(cfg.e_2w(), 0.106, max_relative = 1e-15);
        assert_relative_eq!(cfg.a_2w(), 0.106 / (2.0 * 0.057), max_relative = 1e-15);
    }
}
