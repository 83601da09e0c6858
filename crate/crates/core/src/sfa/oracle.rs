//! Direct quadrature of the transition amplitude along real ionization
//! times, used to validate the saddle-point sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{AtomSpec, FieldConfig, FieldRealization};
use crate::phase_space::ComplexAmplitude;
use crate::quad::{self, QuadResult};

use super::action::ActionSeries;
use super::dipole::dipole_element;
use super::saddle::TimeWindow;
use super::Momentum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Multiplies the dipole element.
    pub dipole_scale: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { abs_tol: 1e-10, max_intervals: 4000, dipole_scale: 1.0 }
    }
}

/// `∫_window e^{iS(0, t')}·E(t')·d_x(p + A(t')) dt'`, same phase origin as
/// the saddle-point terms.
pub fn oracle_amplitude(
    p: Momentum,
    alpha: ComplexAmplitude,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    opts: &OracleOptions,
) -> Result<QuadResult> {
    let series = ActionSeries::new(FieldRealization::new(cfg, alpha), p, atom.ip);
    let origin = series.antiderivative(Complex64::new(0.0, 0.0));
    let py = Complex64::new(p.py, 0.0);
    let integrand = |t: f64| {
        let tc = Complex64::new(t, 0.0);
        let (a, e) = series.field.potential_and_field(tc);
        let d = dipole_element(p.px + a, py, atom.lambda_eff);
        let s = series.antiderivative(tc) - origin;
        (I * s).exp() * e * d.x * opts.dipole_scale
    };
    // about one piece per oscillation of the phase
    let rate = series.mean_rate().re.abs().max(cfg.omega);
    let pieces = (((window.t_end - window.t_start) * rate / (2.0 * std::f64::consts::PI)).ceil() as usize).clamp(4, 512);
    quad::integrate(integrand, window.t_start, window.t_end, pieces, opts.abs_tol, opts.max_intervals)
}

/// Radii `|p|` at which the phase gained over `period` is a multiple of 2π.
/// With `period` the field period, the period integral has no endpoint
/// contributions on these rings and the cell-averaged saddle yield equals
/// the coherent one.
pub fn ring_radii(cfg: &FieldConfig, alpha: ComplexAmplitude, atom: &AtomSpec, period: f64, max_radius: f64) -> Vec<f64> {
    let quantum = 2.0 * std::f64::consts::PI / period;
    let field = FieldRealization::new(cfg, alpha);
    let floor = atom.ip + 0.5 * field.mean_square_potential().re;
    let k0 = (floor / quantum).ceil() as i64;
    let mut out = Vec::new();
    for k in k0.. {
        let e = k as f64 * quantum - floor;
        let r = (2.0 * e).sqrt();
        if r > max_radius {
            break;
        }
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero() {
        let cfg = FieldConfig::new(0.057, 0.0, 0.0, 0.0, 0.0).unwrap();
        let w = TimeWindow::unit_cell(&cfg);
        let r = oracle_amplitude(Momentum::new(0.3, 0.1), ComplexAmplitude::ZERO, &cfg, &AtomSpec::helium(), &w, &OracleOptions::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn linear_in_dipole_scale() {
        let cfg = FieldConfig::from_strong_field(0.057, 0.0925, 1e-8, 0.0).unwrap();
        let atom = AtomSpec::helium();
        let w = TimeWindow::unit_cell(&cfg);
        let p = Momentum::new(0.25, 0.1);
        let one = oracle_amplitude(p, ComplexAmplitude::ZERO, &cfg, &atom, &w, &OracleOptions::default()).unwrap();
        let two = oracle_amplitude(p, ComplexAmplitude::ZERO, &cfg, &atom, &w, &OracleOptions { dipole_scale: 2.0, ..Default::default() }).unwrap();
        assert!((two.value - 2.0 * one.value).norm() <= 1e-12 * one.value.norm().max(1e-300) + 4e-10);
    }

    #[test]
    fn rings_are_phase_matched() {
        let cfg = FieldConfig::from_strong_field(0.057, 0.0925, 1e-8, 0.0).unwrap();
        let atom = AtomSpec::helium();
        let alpha = ComplexAmplitude::new(1e5, 2e5);
        let radii = ring_radii(&cfg, alpha, &atom, cfg.period(), 1.0);
        assert!(radii.len() >= 3);
        for r in radii {
            let s = ActionSeries::new(FieldRealization::new(&cfg, alpha), Momentum::new(r * 0.6, r * 0.8), atom.ip);
            let phase = s.mean_rate().re * cfg.period() / (2.0 * std::f64::consts::PI);
            assert!((phase - phase.round()).abs() < 1e-9);
        }
    }
}
