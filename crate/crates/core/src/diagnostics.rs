//! Observables derived from lineouts, momentum maps and saddle times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{averaged_lineout, averaged_pmd_with_nodes, MomentumGrid, PMDResult};
use crate::error::{AtiError, Result};
use crate::field::{photon_number_for_intensity, AtomSpec, FieldConfig};
use crate::phase_space::{make_nodes, rotate_dist, ComplexAmplitude, NodeScheme, NodeSet, PhaseSpaceDist};
use crate::sfa::{find_saddles, BranchRule, Event, Momentum, TimeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_px: f64,
    pub variance_px: f64,
    pub skewness_px: f64,
    pub total_weight: f64,
}

/// Yield-weighted mean, variance and skewness of `p_x`.
pub fn moments(lineout: &[(f64, f64)]) -> Result<MomentReport> {
    let total: f64 = lineout.iter().map(|&(_, y)| y).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(AtiError::EmptyLineout);
    }
    let mean = lineout.iter().map(|&(p, y)| p * y).sum::<f64>() / total;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &(p, y) in lineout {
        let d = p - mean;
        m2 += y * d * d;
        m3 += y * d * d * d;
    }
    let variance = m2 / total;
    let skew = if variance > 0.0 { (m3 / total) / variance.powf(1.5) } else { 0.0 };
    Ok(MomentReport { mean_px: mean, variance_px: variance, skewness_px: skew, total_weight: total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Unweighted least squares of `ln y` against `ln x`; needs three points.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Weak-field states parameterized by mean intensity. All members of a
/// family at intensity `I` carry `N = E²/(4g²)` photons on average, `E` the
/// peak field of intensity `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistFamily {
    /// `α₀ = √N·e^{i·phase}`.
    Coherent { phase: f64 },
    /// Squeezed vacuum with `sinh²r = N`.
    Squeezed { phi: f64 },
    Thermal,
}

impl DistFamily {
    pub fn at_intensity(&self, intensity_wcm2: f64, g_w: f64) -> Result<PhaseSpaceDist> {
        let n = photon_number_for_intensity(intensity_wcm2, g_w)?;
        match *self {
            DistFamily::Coherent { phase } => PhaseSpaceDist::coherent(ComplexAmplitude::from_polar(n.sqrt(), phase)),
            DistFamily::Squeezed { phi } => PhaseSpaceDist::squeezed(n.sqrt().asinh(), phi),
            DistFamily::Thermal => PhaseSpaceDist::thermal(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub intensity_wcm2: f64,
    pub dist: PhaseSpaceDist,
    pub report: MomentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// Fit of `|⟨p_x⟩|` against intensity.
    pub fit: Option<LineFit>,
}

/// Lineout moments over a range of mean intensities of the weak field.
#[allow(clippy::too_many_arguments)]
pub fn intensity_scan(
    family: DistFamily,
    intensities: &[f64],
    scheme: NodeScheme,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    px_samples: &[f64],
) -> Result<ScanResult> {
    let mut points = Vec::with_capacity(intensities.len());
    for &i in intensities {
        let dist = family.at_intensity(i, cfg.g_w)?;
        let nodes = make_nodes(&dist, scheme)?;
        let lineout = averaged_lineout(px_samples, &nodes, cfg, atom, window)?;
        points.push(ScanPoint { intensity_wcm2: i, dist, report: moments(&lineout.points)? });
    }
    let fit = log_log_fit(&points.iter().map(|p| (p.intensity_wcm2, p.report.mean_px.abs())).collect::<Vec<_>>());
    Ok(ScanResult { points, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelTimePoint {
    pub px: f64,
    pub weighted_mean_im: f64,
    pub weighted_var_im: f64,
    /// Weight of the nodes that kept the event's saddle.
    pub weight: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelTimeStats {
    pub event: Event,
    pub points: Vec<TunnelTimePoint>,
}

impl TunnelTimeStats {
    pub fn excluded_fraction(&self, nodes: usize) -> f64 {
        let total = (self.points.len() * nodes) as f64;
        if total == 0.0 {
            return 0.0;
        }
        self.points.iter().map(|p| p.excluded).sum::<usize>() as f64 / total
    }
}

/// `Im t_sp` of `event` at `(p_x, 0)` for every node; `None` where the root was lost.
pub fn event_times(px: f64, nodes: &NodeSet, cfg: &FieldConfig, atom: &AtomSpec, event: Event) -> Vec<Option<f64>> {
    let window = TimeWindow::event(cfg, event);
    nodes
        .nodes
        .iter()
        .map(|&(alpha, _)| {
            find_saddles(Momentum::new(px, 0.0), alpha, cfg, atom, &window)
                .solutions
                .iter()
                .find(|s| s.event == event)
                .map(|s| s.t_sp.ti)
        })
        .collect()
}

/// Husimi-weighted mean and variance of `Im t_sp` for one event.
pub fn tunnel_time_stats(px_samples: &[f64], nodes: &NodeSet, cfg: &FieldConfig, atom: &AtomSpec, event: Event) -> TunnelTimeStats {
    let points = px_samples
        .par_iter()
        .map(|&px| {
            let times = event_times(px, nodes, cfg, atom, event);
            let mut kept = Vec::with_capacity(times.len());
            let mut excluded = 0;
            for (t, &(_, w)) in times.iter().zip(&nodes.nodes) {
                match t {
                    Some(t) => kept.push((*t, w)),
                    None => excluded += 1,
                }
            }
            let (mean, var, weight) = weighted_mean_var(&kept);
            TunnelTimePoint { px, weighted_mean_im: mean, weighted_var_im: var, weight, excluded }
        })
        .collect();
    TunnelTimeStats { event, points }
}

/// Two-pass weighted mean and variance; zeros for no weight.
pub fn weighted_mean_var(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let w: f64 = samples.iter().map(|s| s.1).sum();
    if w <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    // deviations from the first sample keep constant data exactly constant
    let pivot = samples[0].0;
    let shift = samples.iter().map(|s| (s.0 - pivot) * s.1).sum::<f64>() / w;
    let var = samples.iter().map(|s| (s.0 - pivot - shift).powi(2) * s.1).sum::<f64>() / w;
    (pivot + shift, var, w)
}

/// `Σ|Y(p) − Y(Rp)| / Σ(Y(p) + Y(Rp))` with `R: p_x → −p_x`.
pub fn asymmetry_metric(pmd: &PMDResult) -> Result<f64> {
    if !pmd.grid.is_px_symmetric() {
        return Err(AtiError::AsymmetricGrid);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &y) in pmd.yields.iter().enumerate() {
        let m = pmd.yields[pmd.grid.mirror(k)];
        num += (y - m).abs();
        den += y + m;
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// The same metric for a curve sampled on a mirror-symmetric set of `p_x`.
pub fn curve_asymmetry(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len();
    if (0..n).any(|i| points[i].0 != -points[n - 1 - i].0) {
        return Err(AtiError::AsymmetricGrid);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let (a, b) = (points[i].1, points[n - 1 - i].1);
        num += (a - b).abs();
        den += a + b;
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// `max|Y₁ − Y₂| / max Y₁`.
pub fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().copied().fold(0.0, f64::max);
    let dev = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

/// Compares `Y(p; θ, φ + Δφ)` with `Y(p; θ + Δφ/2, φ)`. Returns the largest
/// deviation relative to the map maximum.
pub fn check_phase_equivalence(
    grid: &MomentumGrid,
    dist: &PhaseSpaceDist,
    scheme: NodeScheme,
    cfg: &FieldConfig,
    atom: &AtomSpec,
    window: &TimeWindow,
    delta_phi: f64,
) -> Result<f64> {
    let rotated = make_nodes(&rotate_dist(dist, delta_phi), scheme)?;
    let lhs = averaged_pmd_with_nodes(grid, &rotated, cfg, atom, window, BranchRule::SteepestDescent)?;
    let shifted = cfg.with_theta(cfg.theta + 0.5 * delta_phi);
    let base = make_nodes(dist, scheme)?;
    let rhs = averaged_pmd_with_nodes(grid, &base, &shifted, atom, window, BranchRule::SteepestDescent)?;
    Ok(max_relative_deviation(&lhs.yields, &rhs.yields))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_lineout_has_no_odd_moments() {
        let l: Vec<(f64, f64)> = (-10..=10).map(|i| (0.1 * i as f64, (-(0.1 * i as f64).powi(2)).exp())).collect();
        let m = moments(&l).unwrap();
        assert!(m.mean_px.abs() < 1e-12);
        assert!(m.skewness_px.abs() < 1e-12);
    }

    #[test]
    fn two_point_mean() {
        let m = moments(&[(-1.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(m.mean_px, 0.5);
        assert_eq!(m.total_weight, 4.0);
        assert!(matches!(moments(&[(0.0, 0.0)]), Err(AtiError::EmptyLineout)));
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 10.0, 30.0].iter().map(|&x: &f64| (x, 2.0 * x.powf(0.5))).collect();
        let f = log_log_fit(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(log_log_fit(&pts[..2]).is_none());
    }

    #[test]
    fn weighted_variance_special_cases() {
        assert_eq!(weighted_mean_var(&[(0.7, 2.0)]).1, 0.0);
        assert_eq!(weighted_mean_var(&[(0.7, 2.0), (0.7, 1.0)]).1, 0.0);
    }

    #[test]
    fn curve_asymmetry_extremes() {
        let sym = [(-1.0, 2.0), (0.0, 5.0), (1.0, 2.0)];
        assert_eq!(curve_asymmetry(&sym).unwrap(), 0.0);
        let one_sided = [(-1.0, 0.0), (0.0, 0.0), (1.0, 2.0)];
        assert_eq!(curve_asymmetry(&one_sided).unwrap(), 1.0);
        assert!(curve_asymmetry(&[(-1.0, 1.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn family_intensity_convention() {
        let g = 4.89e-8;
        let d = DistFamily::Squeezed { phi: 0.0 }.at_intensity(3e12, g).unwrap();
        match d.kind {
            crate::phase_space::DistKind::Squeezed { r, .. } => assert!((r - 12.15).abs() < 0.01, "{r}"),
            _ => unreachable!(),
        }
    }
}
