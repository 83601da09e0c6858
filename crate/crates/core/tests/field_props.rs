use ati_core::field::{FieldConfig, FieldRealization};
use ati_core::sfa::ActionSeries;
use ati_core::{AtomSpec, Complex64, ComplexAmplitude, Momentum};
use proptest::prelude::*;

fn cfg(theta: f64) -> FieldConfig {
    FieldConfig::from_strong_field(0.057, 0.0925, 4.89e-8, theta).unwrap()
}

fn amplitude() -> impl Strategy<Value = ComplexAmplitude> {
    (-2e5f64..2e5, -2e5f64..2e5).prop_map(|(x, y)| ComplexAmplitude::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn potential_is_real_on_the_real_axis(alpha in amplitude(), theta in -3.0f64..3.0, t in -200.0f64..200.0) {
        let f = FieldRealization::new(&cfg(theta), alpha);
        let (a, e) = f.potential_and_field(Complex64::new(t, 0.0));
        prop_assert!(a.im.abs() <= 1e-14 * (1.0 + a.norm()));
        prop_assert!(e.im.abs() <= 1e-14 * (1.0 + e.norm()));
    }

    #[test]
    fn potential_is_periodic(alpha in amplitude(), t in -200.0f64..200.0, ti in 0.0f64..20.0) {
        let c = cfg(0.4);
        let f = FieldRealization::new(&c, alpha);
        let z = Complex64::new(t, ti);
        let a = f.vector_potential(z);
        let b = f.vector_potential(z + c.period());
        prop_assert!((a - b).norm() <= 1e-11 * (1.0 + a.norm()));
    }

    #[test]
    fn amplitude_phase_equals_temporal_phase(alpha in amplitude(), theta in -3.0f64..3.0, chi in -3.0f64..3.0, t in 0.0f64..200.0) {
        let lhs = FieldRealization::new(&cfg(theta), alpha.rotate(chi));
        let rhs = FieldRealization::new(&cfg(theta + chi), alpha);
        let z = Complex64::new(t, 0.0);
        let (a1, e1) = lhs.potential_and_field(z);
        let (a2, e2) = rhs.potential_and_field(z);
        prop_assert!((a1 - a2).norm() <= 1e-12 * (1.0 + a1.norm()));
        prop_assert!((e1 - e2).norm() <= 1e-12 * (1.0 + e1.norm()));
    }

    #[test]
    fn field_is_minus_time_derivative(alpha in amplitude(), t in 0.0f64..110.0, ti in 0.0f64..10.0) {
        let f = FieldRealization::new(&cfg(0.0), alpha);
        let z = Complex64::new(t, ti);
        let h = 1e-6;
        let fd = (f.vector_potential(z + h) - f.vector_potential(z - h)) / (2.0 * h);
        let e = f.electric_field(z);
        prop_assert!((fd + e).norm() <= 1e-6 * (1.0 + e.norm()));
    }
}

/// Central differences of the action against the analytic derivative at 100
/// fixed pseudo-random points.
#[test]
fn action_gradient_matches_finite_differences() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
    let atom = AtomSpec::helium();
    let c = cfg(0.7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = ComplexAmplitude::new(rng.random_range(-2e5..2e5), rng.random_range(-2e5..2e5));
        let p = Momentum::new(rng.random_range(-1.5..1.5), rng.random_range(0.0..1.5));
        let tp = Complex64::new(rng.random_range(0.0..110.0), rng.random_range(0.0..15.0));
        let s = ActionSeries::new(FieldRealization::new(&c, alpha), p, atom.ip);
        let t_end = Complex64::new(300.0, 0.0);
        let h = 1e-5;
        let fd = (s.action(t_end, tp + h) - s.action(t_end, tp - h)) / (2.0 * h);
        let exact = s.d_action(tp);
        worst = worst.max((fd - exact).norm() / exact.norm().max(1.0));
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}
