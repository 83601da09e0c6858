//! Husimi Q distributions of the weak field mode.
//!
//! Squeezed vacuum, coherent and thermal states all have Gaussian Q
//! functions, so every distribution is carried in one canonical form: a mean
//! and a covariance given by its principal axes. The state family is kept
//! for labelling and for the closed-form density.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AtiError, Result};

/// Coherent amplitude `α = ax + i·ay` of the weak mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub ax: f64,
    pub ay: f64,
}

impl ComplexAmplitude {
    pub const ZERO: ComplexAmplitude = ComplexAmplitude { ax: 0.0, ay: 0.0 };

    pub fn new(ax: f64, ay: f64) -> Self {
        debug_assert!(ax.is_finite() && ay.is_finite(), "non-finite amplitude");
        ComplexAmplitude { ax, ay }
    }

    pub fn try_new(ax: f64, ay: f64) -> Result<Self> {
        if ax.is_finite() && ay.is_finite() {
            Ok(ComplexAmplitude { ax, ay })
        } else {
            Err(AtiError::invalid("alpha", format!("({ax}, {ay}) is not finite")))
        }
    }

    pub fn from_polar(modulus: f64, arg: f64) -> Self {
        let (s, c) = arg.sin_cos();
        ComplexAmplitude::new(modulus * c, modulus * s)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.ax, self.ay)
    }

    pub fn norm(self) -> f64 {
        self.ax.hypot(self.ay)
    }

    /// `α·e^{iχ}`.
    pub fn rotate(self, chi: f64) -> Self {
        let (s, c) = chi.sin_cos();
        ComplexAmplitude::new(self.ax * c - self.ay * s, self.ax * s + self.ay * c)
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(z: Complex64) -> Self {
        ComplexAmplitude::new(z.re, z.im)
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    /// Squeezed vacuum `ξ = r·e^{iφ}`.
    Squeezed { r: f64, phi: f64 },
    Coherent { alpha0: ComplexAmplitude },
    Thermal { nbar: f64 },
}

/// Gaussian Husimi distribution in the `(α_x, α_y)` plane.
///
/// The covariance is stored as principal variances `var_major` along the
/// direction `axis_angle` and `var_minor` perpendicular to it. Large
/// squeezing makes the two differ by ~`e^{4r}`, so the matrix form is only
/// built on request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDist {
    pub kind: DistKind,
    pub mean: ComplexAmplitude,
    pub axis_angle: f64,
    pub var_major: f64,
    pub var_minor: f64,
}

/// `(1 + e^{-2r})/4`, the variance along the squeezed quadrature.
fn squeezed_variance(r: f64) -> f64 {
    0.25 * (1.0 + (-2.0 * r).exp())
}

/// `(1 + e^{2r})/4`, the variance along the anti-squeezed quadrature.
fn antisqueezed_variance(r: f64) -> f64 {
    0.25 * (1.0 + (2.0 * r).exp())
}

impl PhaseSpaceDist {
    pub fn squeezed(r: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(AtiError::invalid("r", format!("squeezing strength must be finite and >= 0, got {r}")));
        }
        if !phi.is_finite() {
            return Err(AtiError::invalid("phi", "squeezing angle is not finite"));
        }
        let phi = wrap_angle(phi);
        Ok(PhaseSpaceDist {
            kind: DistKind::Squeezed { r, phi },
            mean: ComplexAmplitude::ZERO,
            axis_angle: 0.5 * phi,
            var_major: squeezed_variance(r),
            var_minor: antisqueezed_variance(r),
        })
    }

    pub fn coherent(alpha0: ComplexAmplitude) -> Result<Self> {
        let alpha0 = ComplexAmplitude::try_new(alpha0.ax, alpha0.ay)?;
        Ok(PhaseSpaceDist {
            kind: DistKind::Coherent { alpha0 },
            mean: alpha0,
            axis_angle: 0.0,
            var_major: 0.5,
            var_minor: 0.5,
        })
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(AtiError::invalid("nbar", format!("mean photon number must be finite and >= 0, got {nbar}")));
        }
        let v = 0.5 * (1.0 + nbar);
        Ok(PhaseSpaceDist {
            kind: DistKind::Thermal { nbar },
            mean: ComplexAmplitude::ZERO,
            axis_angle: 0.0,
            var_major: v,
            var_minor: v,
        })
    }

    /// Covariance matrix `[[σxx, σxy], [σxy, σyy]]` over `(α_x, α_y)`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.axis_angle.sin_cos();
        let (a, b) = (self.var_major, self.var_minor);
        let xx = a * c * c + b * s * s;
        let yy = a * s * s + b * c * c;
        let xy = (a - b) * s * c;
        [[xx, xy], [xy, yy]]
    }

    /// Coordinates of `α − mean` along the two principal axes.
    fn principal_coords(&self, alpha: ComplexAmplitude) -> (f64, f64) {
        let (s, c) = self.axis_angle.sin_cos();
        let dx = alpha.ax - self.mean.ax;
        let dy = alpha.ay - self.mean.ay;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Mean photon number of the state, `⟨|α|²⟩_Q − 1`.
    pub fn mean_photon_number(&self) -> f64 {
        match self.kind {
            DistKind::Squeezed { r, .. } => r.sinh().powi(2),
            DistKind::Coherent { alpha0 } => alpha0.ax * alpha0.ax + alpha0.ay * alpha0.ay,
            DistKind::Thermal { nbar } => nbar,
        }
    }
}

/// Evaluates the Husimi function `Q(α)`.
pub fn husimi_eval(dist: &PhaseSpaceDist, alpha: ComplexAmplitude) -> f64 {
    match dist.kind {
        DistKind::Squeezed { r, .. } => {
            // −|α|² − (tanh r/2)(e^{−iφ}α² + c.c.) written in the frame rotated by φ/2,
            // where it is −(1 + tanh r)·u² − (1 − tanh r)·v².
            let (u, v) = dist.principal_coords(alpha);
            let e2 = (-2.0 * r).exp();
            let one_plus = 2.0 / (1.0 + e2);
            let one_minus = 2.0 * e2 / (1.0 + e2);
            FRAC_1_PI / r.cosh() * (-(one_plus * u * u) - one_minus * v * v).exp()
        }
        DistKind::Coherent { alpha0 } => {
            let dx = alpha.ax - alpha0.ax;
            let dy = alpha.ay - alpha0.ay;
            FRAC_1_PI * (-(dx * dx + dy * dy)).exp()
        }
        DistKind::Thermal { nbar } => {
            let n1 = 1.0 + nbar;
            let m2 = alpha.ax * alpha.ax + alpha.ay * alpha.ay;
            FRAC_1_PI / n1 * (-m2 / n1).exp()
        }
    }
}

/// Returns the distribution `Q'(α) = Q(α·e^{−iΔφ/2})`.
///
/// For a squeezed state this is a shift of the squeezing angle by `Δφ`.
pub fn rotate_dist(dist: &PhaseSpaceDist, delta_phi: f64) -> PhaseSpaceDist {
    match dist.kind {
        DistKind::Squeezed { r, phi } => PhaseSpaceDist::squeezed(r, phi + delta_phi).expect("valid squeezed state"),
        DistKind::Coherent { alpha0 } => {
            PhaseSpaceDist::coherent(alpha0.rotate(0.5 * delta_phi)).expect("valid coherent state")
        }
        DistKind::Thermal { .. } => *dist,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum NodeScheme {
    GaussHermiteTensor { order: usize },
    MonteCarlo { count: usize, seed: u64 },
    /// Concatenation of several node sets; only produced by [`NodeSet::mixture`].
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub nodes: Vec<(ComplexAmplitude, f64)>,
    pub scheme: NodeScheme,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }

    /// Convex combination `w·first + (1 − w)·second` as one concatenated set.
    pub fn mixture(first: &NodeSet, weight: f64, second: &NodeSet) -> Result<NodeSet> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(AtiError::invalid("weight", format!("mixture weight {weight} outside [0, 1]")));
        }
        let nodes = first
            .nodes
            .iter()
            .map(|&(a, w)| (a, weight * w))
            .chain(second.nodes.iter().map(|&(a, w)| (a, (1.0 - weight) * w)))
            .collect();
        Ok(NodeSet { nodes, scheme: NodeScheme::Mixture })
    }

    /// Maps every node `α → α·e^{iΔφ/2}`, weights unchanged.
    pub fn rotated(&self, delta_phi: f64) -> NodeSet {
        NodeSet {
            nodes: self.nodes.iter().map(|&(a, w)| (a.rotate(0.5 * delta_phi), w)).collect(),
            scheme: self.scheme,
        }
    }

    pub fn single(alpha: ComplexAmplitude) -> NodeSet {
        NodeSet { nodes: vec![(alpha, 1.0)], scheme: NodeScheme::GaussHermiteTensor { order: 1 } }
    }
}

/// Gauss–Hermite rule for the weight `e^{−x²}` on the real line.
///
/// Nodes are returned in decreasing order; weights sum to `√π`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // π^{-1/4}
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Builds quadrature or sampling nodes for `∫ Q(α) f(α) d²α`.
pub fn make_nodes(dist: &PhaseSpaceDist, scheme: NodeScheme) -> Result<NodeSet> {
    let (s, c) = dist.axis_angle.sin_cos();
    let sd_major = dist.var_major.sqrt();
    let sd_minor = dist.var_minor.sqrt();
    let place = |u: f64, v: f64| {
        // u, v in units of the principal standard deviations
        let du = u * sd_major;
        let dv = v * sd_minor;
        ComplexAmplitude::new(dist.mean.ax + c * du - s * dv, dist.mean.ay + s * du + c * dv)
    };
    let nodes = match scheme {
        NodeScheme::GaussHermiteTensor { order } => {
            if order == 0 {
                return Err(AtiError::EmptyNodeScheme);
            }
            let (x, w) = gauss_hermite(order);
            let scale = std::f64::consts::SQRT_2;
            let mut nodes = Vec::with_capacity(order * order);
            for (xi, wi) in x.iter().zip(&w) {
                for (xj, wj) in x.iter().zip(&w) {
                    nodes.push((place(scale * xi, scale * xj), wi * wj * FRAC_1_PI));
                }
            }
            nodes
        }
        NodeScheme::MonteCarlo { count, seed } => {
            if count == 0 {
                return Err(AtiError::EmptyNodeScheme);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = 1.0 / count as f64;
            (0..count)
                .map(|_| {
                    let u: f64 = StandardNormal.sample(&mut rng);
                    let v: f64 = StandardNormal.sample(&mut rng);
                    (place(u, v), w)
                })
                .collect()
        }
        NodeScheme::Mixture => {
            return Err(AtiError::invalid("scheme", "mixtures are built with NodeSet::mixture"));
        }
    };
    Ok(NodeSet { nodes, scheme })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_density(cov: [[f64; 2]; 2], mean: (f64, f64), x: (f64, f64)) -> f64 {
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let (dx, dy) = (x.0 - mean.0, x.1 - mean.1);
        let q = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dy + cov[0][0] * dy * dy) / det;
        (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
    }

    #[test]
    fn closed_form_values_at_special_points() {
        let r = 1.3;
        let d = PhaseSpaceDist::squeezed(r, 0.4).unwrap();
        assert_relative_eq!(husimi_eval(&d, ComplexAmplitude::ZERO), 1.0 / (PI * r.cosh()), max_relative = 1e-15);

        let a0 = ComplexAmplitude::new(0.7, -2.0);
        let d = PhaseSpaceDist::coherent(a0).unwrap();
        assert_relative_eq!(husimi_eval(&d, a0), 1.0 / PI, max_relative = 1e-15);

        let d = PhaseSpaceDist::thermal(3.0).unwrap();
        assert_relative_eq!(husimi_eval(&d, ComplexAmplitude::ZERO), 1.0 / (PI * 4.0), max_relative = 1e-15);
    }

    #[test]
    fn squeezed_density_matches_bivariate_gaussian() {
        let t = 1.0_f64.tanh();
        let cov = [[1.0 / (2.0 * (1.0 + t)), 0.0], [0.0, 1.0 / (2.0 * (1.0 - t))]];
        let d = PhaseSpaceDist::squeezed(1.0, 0.0).unwrap();
        let alpha = ComplexAmplitude::new(0.5, 0.0);
        let expect = gaussian_density(cov, (0.0, 0.0), (0.5, 0.0));
        assert_relative_eq!(husimi_eval(&d, alpha), expect, max_relative = 1e-13);
        // off-axis point as well
        let alpha = ComplexAmplitude::new(0.5, -0.8);
        let expect = gaussian_density(cov, (0.0, 0.0), (0.5, -0.8));
        assert_relative_eq!(husimi_eval(&d, alpha), expect, max_relative = 1e-13);
    }

    #[test]
    fn squeezed_covariance_eigenvalues_and_axis() {
        let r = 2.0_f64;
        let t = r.tanh();
        let d = PhaseSpaceDist::squeezed(r, 1.0).unwrap();
        assert_relative_eq!(d.var_major, 1.0 / (2.0 * (1.0 + t)), max_relative = 1e-14);
        assert_relative_eq!(d.var_minor, 1.0 / (2.0 * (1.0 - t)), max_relative = 1e-12);
        let cov = d.covariance();
        let tr = cov[0][0] + cov[1][1];
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[0][1];
        assert_relative_eq!(tr, d.var_major + d.var_minor, max_relative = 1e-14);
        assert_relative_eq!(det, d.var_major * d.var_minor, max_relative = 1e-12);
        assert_relative_eq!(d.axis_angle, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let d = PhaseSpaceDist::squeezed(0.8, 0.0).unwrap();
        let rot = rotate_dist(&d, -PI / 2.0);
        assert_eq!(rot.kind, DistKind::Squeezed { r: 0.8, phi: -PI / 2.0 });

        let th = PhaseSpaceDist::thermal(2.0).unwrap();
        assert_eq!(rotate_dist(&th, 1.234), th);

        let a0 = ComplexAmplitude::new(1.0, 0.5);
        let c = rotate_dist(&PhaseSpaceDist::coherent(a0).unwrap(), 0.6);
        let want = a0.to_complex() * Complex64::from_polar(1.0, 0.3);
        assert_relative_eq!(c.mean.ax, want.re, epsilon = 1e-15);
        assert_relative_eq!(c.mean.ay, want.im, epsilon = 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(wrap_angle(7.0), 7.0 - 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn zero_squeezing_is_vacuum() {
        let vac = PhaseSpaceDist::coherent(ComplexAmplitude::ZERO).unwrap();
        for phi in [-3.0, -1.0, 0.0, 0.5, 2.5] {
            let sq = PhaseSpaceDist::squeezed(0.0, phi).unwrap();
            assert_eq!(sq.var_major, 0.5);
            assert_eq!(sq.var_minor, 0.5);
            for a in [(0.3, -0.2), (1.5, 0.7), (0.0, 0.0)] {
                let a = ComplexAmplitude::new(a.0, a.1);
                assert_relative_eq!(husimi_eval(&sq, a), husimi_eval(&vac, a), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn gauss_hermite_moments() {
        for n in [1usize, 2, 5, 16, 32, 64] {
            let (x, w) = gauss_hermite(n);
            let s0: f64 = w.iter().sum();
            assert_relative_eq!(s0, PI.sqrt(), max_relative = 1e-13);
            // ∫ x² e^{−x²} = √π/2
            if n >= 2 {
                let s2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                assert_relative_eq!(s2, 0.5 * PI.sqrt(), max_relative = 1e-12);
            }
            // ∫ x⁴ e^{−x²} = 3√π/4
            if n >= 3 {
                let s4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
                assert_relative_eq!(s4, 0.75 * PI.sqrt(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn node_weights_and_moments() {
        let r = 1.7_f64;
        let d = PhaseSpaceDist::squeezed(r, 0.0).unwrap();
        let ns = make_nodes(&d, NodeScheme::GaussHermiteTensor { order: 8 }).unwrap();
        assert!((ns.total_weight() - 1.0).abs() < 1e-12);

        let ns = make_nodes(&d, NodeScheme::GaussHermiteTensor { order: 16 }).unwrap();
        let m2: f64 = ns.nodes.iter().map(|(a, w)| w * a.ax * a.ax).sum();
        assert_relative_eq!(m2, 1.0 / (2.0 * (1.0 + r.tanh())), epsilon = 1e-10);

        let a0 = ComplexAmplitude::new(-1.25, 3.0);
        let c = PhaseSpaceDist::coherent(a0).unwrap();
        let ns = make_nodes(&c, NodeScheme::GaussHermiteTensor { order: 6 }).unwrap();
        let m1: f64 = ns.nodes.iter().map(|(a, w)| w * a.ax).sum();
        assert_relative_eq!(m1, a0.ax, epsilon = 1e-10);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let d = PhaseSpaceDist::thermal(4.0).unwrap();
        let a = make_nodes(&d, NodeScheme::MonteCarlo { count: 100, seed: 7 }).unwrap();
        let b = make_nodes(&d, NodeScheme::MonteCarlo { count: 100, seed: 7 }).unwrap();
        assert_eq!(a, b);
        assert!(a.nodes.iter().all(|(_, w)| *w == 0.01));
        let c = make_nodes(&d, NodeScheme::MonteCarlo { count: 100, seed: 8 }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_schemes() {
        let d = PhaseSpaceDist::thermal(0.0).unwrap();
        assert!(make_nodes(&d, NodeScheme::GaussHermiteTensor { order: 0 }).is_err());
        assert!(make_nodes(&d, NodeScheme::MonteCarlo { count: 0, seed: 1 }).is_err());
        assert!(PhaseSpaceDist::squeezed(-0.1, 0.0).is_err());
        assert!(PhaseSpaceDist::thermal(f64::NAN).is_err());
    }
}
