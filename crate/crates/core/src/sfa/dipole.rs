use std::f64::consts::PI;

use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Threshold on `|λ² + v·v|` below which the dipole is flagged as near its pole.
pub const POLE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleValue {
    pub x: Complex64,
    pub y: Complex64,
    pub near_pole: bool,
}

/// Bound–free dipole `⟨p + A|r|g⟩` of a hydrogen-like 1s orbital with
/// effective charge `lambda_eff`, at (possibly complex) kinetic momentum
/// `v = p + A`:
/// `d(v) = i·√(λ³/2)·(16λ/π)·(−v)/(λ² + v²)³`.
pub fn dipole_element(vx: Complex64, vy: Complex64, lambda_eff: f64) -> DipoleValue {
    let l2 = lambda_eff * lambda_eff;
    let denom = l2 + vx * vx + vy * vy;
    let near_pole = denom.norm() < POLE_THRESHOLD;
    let pref = I * (lambda_eff.powi(3) / 2.0).sqrt() * (16.0 * lambda_eff / PI) / (denom * denom * denom);
    DipoleValue { x: -vx * pref, y: -vy * pref, near_pole }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_velocity() {
        let d = dipole_element(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 1.6875);
        assert_eq!(d.x, Complex64::new(0.0, 0.0));
        assert_eq!(d.y, Complex64::new(0.0, 0.0));
        assert!(!d.near_pole);
    }

    #[test]
    fn helium_unit_velocity() {
        let l = 1.6875_f64;
        let d = dipole_element(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), l);
        let want = (l.powi(3) / 2.0).sqrt() * 16.0 * l / PI / (l * l + 1.0).powi(3);
        assert!((d.x.norm() - want).abs() < 1e-14 * want);
        assert!((d.x.norm() - 0.233_870_675_651_957_3).abs() < 1e-12);
        assert!(d.x.re.abs() < 1e-16, "purely imaginary for real v");
    }

    #[test]
    fn odd_parity() {
        let v = (Complex64::new(0.3, 1.2), Complex64::new(-0.4, 0.0));
        let a = dipole_element(v.0, v.1, 1.3);
        let b = dipole_element(-v.0, -v.1, 1.3);
        assert_eq!(a.x, -b.x);
        assert_eq!(a.y, -b.y);
    }

    #[test]
    fn flags_pole() {
        // λ² + v² = 0 at v = iλ
        let d = dipole_element(Complex64::new(0.0, 1.5), Complex64::new(0.0, 0.0), 1.5);
        assert!(d.near_pole);
    }
}
