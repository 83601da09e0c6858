use ati_core::diagnostics::{curve_asymmetry, log_log_fit, moments, weighted_mean_var};
use proptest::collection::vec;
use proptest::prelude::*;

fn lineout() -> impl Strategy<Value = Vec<(f64, f64)>> {
    vec((-2.0f64..2.0, 1e-6f64..10.0), 3..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn moments_ignore_power_of_two_weight_scaling(points in lineout(), k in -20i32..20) {
        let c = 2f64.powi(k);
        let scaled: Vec<(f64, f64)> = points.iter().map(|&(p, y)| (p, c * y)).collect();
        let a = moments(&points).unwrap();
        let b = moments(&scaled).unwrap();
        prop_assert_eq!(a.mean_px.to_bits(), b.mean_px.to_bits());
        prop_assert_eq!(a.variance_px.to_bits(), b.variance_px.to_bits());
        prop_assert_eq!(a.skewness_px.to_bits(), b.skewness_px.to_bits());
    }

    #[test]
    fn mirrored_lineout_flips_mean_and_skew(points in lineout()) {
        let mirrored: Vec<(f64, f64)> = points.iter().map(|&(p, y)| (-p, y)).collect();
        let a = moments(&points).unwrap();
        let b = moments(&mirrored).unwrap();
        prop_assert!((a.mean_px + b.mean_px).abs() <= 1e-12);
        prop_assert!((a.variance_px - b.variance_px).abs() <= 1e-12 * (1.0 + a.variance_px));
        prop_assert!((a.skewness_px + b.skewness_px).abs() <= 1e-8 * (1.0 + a.skewness_px.abs()));
    }

    #[test]
    fn fit_slope_is_shift_invariant(slope in -3.0f64..3.0, amp in -5.0f64..5.0, noise in vec(-0.1f64..0.1, 6), shift in -10.0f64..10.0) {
        let xs: [f64; 6] = [3e10, 1e11, 3e11, 1e12, 2e12, 3e12];
        let pts: Vec<(f64, f64)> = xs.iter().zip(&noise).map(|(&x, n)| (x, (amp + slope * x.ln() + n).exp())).collect();
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y * shift.exp())).collect();
        let a = log_log_fit(&pts).unwrap();
        let b = log_log_fit(&moved).unwrap();
        prop_assert!((a.slope - b.slope).abs() <= 1e-10);
        prop_assert!((a.intercept + shift - b.intercept).abs() <= 1e-8);
    }

    #[test]
    fn weighted_variance_matches_replicated_samples(samples in vec((-50.0f64..50.0, 1u32..6), 1..30)) {
        let weighted: Vec<(f64, f64)> = samples.iter().map(|&(x, w)| (x, w as f64)).collect();
        let flat: Vec<f64> = samples.iter().flat_map(|&(x, w)| std::iter::repeat_n(x, w as usize)).collect();
        let n = flat.len() as f64;
        let mean = flat.iter().sum::<f64>() / n;
        let var = flat.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let (m, v, w) = weighted_mean_var(&weighted);
        prop_assert_eq!(w, n);
        prop_assert!((m - mean).abs() <= 1e-10 * (1.0 + mean.abs()));
        prop_assert!((v - var).abs() <= 1e-9 * (1.0 + var));
    }

    #[test]
    fn symmetric_curve_has_no_asymmetry(ys in vec(0.0f64..5.0, 1..20)) {
        let n = ys.len();
        let mut pts: Vec<(f64, f64)> = (0..n).map(|i| (-(n as f64) + i as f64, ys[i])).collect();
        pts.extend((0..n).rev().map(|i| ((n - i) as f64, ys[i])));
        prop_assert_eq!(curve_asymmetry(&pts).unwrap(), 0.0);
    }
}
