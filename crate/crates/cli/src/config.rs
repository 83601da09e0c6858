//! Run configuration: a TOML file with seven sections, every key optional.
//!
//! ```toml
//! [field]        # omega | wavelength_nm, e_2w | intensity_2w_wcm2, g_w, theta
//! [atom]         # ip, lambda
//! [distribution] # kind, r, phi, intensity_wcm2, alpha0, phase, nbar, scheme, order, count, seed
//! [grid]         # px_max, nx, py_min, py_max, ny
//! [window]       # event | t_start + t_end
//! [job]          # intensities, events, branch_rule, psf_*
//! [output]       # dir, normalization
//! ```
//!
//! Unknown keys are rejected. Command-line flags override file values.

use std::path::{Path, PathBuf};

use ati_core::diagnostics::DistFamily;
use ati_core::ensemble::{MomentumGrid, Normalization};
use ati_core::field::{intensity_to_amplitude, omega_from_wavelength_nm, photon_number_for_intensity};
use ati_core::sfa::BranchRule;
use ati_core::{AtiError, AtomSpec, ComplexAmplitude, Event, FieldConfig, NodeScheme, PhaseSpaceDist, TimeWindow};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Coupling that maps 3×10¹² W/cm² of squeezed vacuum to `r = 12.15`.
pub const DEFAULT_G_W: f64 = 4.89e-8;
pub const DEFAULT_OMEGA: f64 = 0.057;
pub const DEFAULT_INTENSITY_2W: f64 = 3e14;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSection,
    pub atom: AtomSection,
    pub distribution: DistributionSection,
    pub grid: GridSection,
    pub window: WindowSection,
    pub job: JobSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    pub omega: Option<f64>,
    pub wavelength_nm: Option<f64>,
    /// Peak field of the 2ω component (a.u.).
    pub e_2w: Option<f64>,
    pub intensity_2w_wcm2: Option<f64>,
    pub g_w: f64,
    pub theta: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection { omega: None, wavelength_nm: None, e_2w: None, intensity_2w_wcm2: None, g_w: DEFAULT_G_W, theta: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomSection {
    pub ip: f64,
    pub lambda: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        let he = AtomSpec::helium();
        AtomSection { ip: he.ip, lambda: he.lambda_eff }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DistName {
    /// No ω field: the monochromatic 2ω reference.
    #[default]
    None,
    Coherent,
    Squeezed,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    GaussHermite,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionSection {
    pub kind: DistName,
    /// Squeezing strength; alternative to `intensity_wcm2`.
    pub r: Option<f64>,
    pub phi: f64,
    /// Mean intensity of the ω field; fixes `r`, `alpha0` or `nbar`.
    pub intensity_wcm2: Option<f64>,
    pub alpha0: Option<f64>,
    pub phase: f64,
    pub nbar: Option<f64>,
    pub scheme: SchemeName,
    pub order: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for DistributionSection {
    fn default() -> Self {
        DistributionSection {
            kind: DistName::None,
            r: None,
            phi: 0.0,
            intensity_wcm2: None,
            alpha0: None,
            phase: 0.0,
            nbar: None,
            scheme: SchemeName::GaussHermite,
            order: 32,
            count: 1024,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// `p_x` runs over `[−px_max, px_max]`.
    pub px_max: f64,
    pub nx: usize,
    pub py_min: f64,
    pub py_max: f64,
    pub ny: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { px_max: 1.5, nx: 201, py_min: 0.0, py_max: 1.5, ny: 101 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub event: Option<String>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobSection {
    /// Mean ω intensities (W/cm²) for `scan`.
    pub intensities: Vec<f64>,
    /// Events for `tunnel-times`.
    pub events: Vec<String>,
    pub branch_rule: BranchRule,
    pub psf_r: Vec<f64>,
    pub psf_g: Vec<f64>,
    pub psf_e_2w: f64,
    pub psf_px: f64,
    pub psf_py: f64,
    pub psf_periods: u32,
}

impl Default for JobSection {
    fn default() -> Self {
        JobSection {
            intensities: vec![3e10, 1e11, 3e11, 1e12, 3e12],
            events: Event::ALL.iter().map(|e| e.to_string()).collect(),
            branch_rule: BranchRule::SteepestDescent,
            psf_r: vec![4.0, 8.0, 12.0, 15.0],
            psf_g: vec![1e-9, 3e-9, 1e-8, 3e-8, 1e-7],
            psf_e_2w: 0.106,
            psf_px: 0.0,
            psf_py: 0.0,
            psf_periods: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Which values go into the `yield_norm` column.
    pub normalization: Normalization,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), normalization: Normalization::Max }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<DistName>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub intensity: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Restrict to one ionization event (I1–I4).
    #[arg(long)]
    pub event: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the `config` object of a `*.meta.json` sidecar.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if let Some(c) = v.get_mut("config") {
                v = c.take();
            }
            return serde_json::from_value(v).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
        if let Some(v) = o.theta {
            self.field.theta = v;
        }
        if let Some(v) = o.kind {
            self.distribution.kind = v;
        }
        if let Some(v) = o.r {
            self.distribution.r = Some(v);
            self.distribution.intensity_wcm2 = None;
        }
        if let Some(v) = o.phi {
            self.distribution.phi = v;
        }
        if let Some(v) = o.intensity {
            self.distribution.intensity_wcm2 = Some(v);
            self.distribution.r = None;
            self.distribution.alpha0 = None;
            self.distribution.nbar = None;
        }
        if let Some(v) = o.order {
            self.distribution.order = v;
        }
        if let Some(v) = o.seed {
            self.distribution.seed = v;
        }
        if let Some(v) = o.nx {
            self.grid.nx = v;
        }
        if let Some(v) = o.ny {
            self.grid.ny = v;
        }
        if let Some(v) = &o.event {
            self.window.event = Some(v.clone());
            self.window.t_start = None;
            self.window.t_end = None;
        }
    }

    pub fn field_config(&self) -> Result<FieldConfig, CliError> {
        let f = &self.field;
        let omega = match (f.omega, f.wavelength_nm) {
            (Some(_), Some(_)) => return Err(conflict("field", "omega", "wavelength_nm")),
            (Some(w), None) => w,
            (None, Some(l)) => omega_from_wavelength_nm(l).map_err(|e| keyed("field", e))?,
            (None, None) => DEFAULT_OMEGA,
        };
        let e_2w = match (f.e_2w, f.intensity_2w_wcm2) {
            (Some(_), Some(_)) => return Err(conflict("field", "e_2w", "intensity_2w_wcm2")),
            (Some(e), None) => e,
            (None, Some(i)) => intensity_to_amplitude(i).map_err(|e| keyed("field", e))?,
            (None, None) => intensity_to_amplitude(DEFAULT_INTENSITY_2W).expect("positive default"),
        };
        if !(e_2w > 0.0) {
            return Err(CliError::Config("field.e_2w: the 2ω field must be positive".into()));
        }
        FieldConfig::from_strong_field(omega, e_2w, f.g_w, f.theta).map_err(|e| keyed("field", e))
    }

    pub fn atom(&self) -> Result<AtomSpec, CliError> {
        AtomSpec::new(self.atom.ip, self.atom.lambda).map_err(|e| keyed("atom", e))
    }

    /// `None` for the monochromatic reference.
    pub fn distribution(&self) -> Result<Option<PhaseSpaceDist>, CliError> {
        let d = &self.distribution;
        let g = self.field.g_w;
        let photons = |i: f64| photon_number_for_intensity(i, g).map_err(|e| keyed("distribution", e));
        let dist = match d.kind {
            DistName::None => return Ok(None),
            DistName::Squeezed => {
                let r = match (d.r, d.intensity_wcm2) {
                    (Some(_), Some(_)) => return Err(conflict("distribution", "r", "intensity_wcm2")),
                    (Some(r), None) => r,
                    (None, Some(i)) => photons(i)?.sqrt().asinh(),
                    (None, None) => return Err(missing("distribution", "r or intensity_wcm2")),
                };
                PhaseSpaceDist::squeezed(r, d.phi)
            }
            DistName::Coherent => {
                let a = match (d.alpha0, d.intensity_wcm2) {
                    (Some(_), Some(_)) => return Err(conflict("distribution", "alpha0", "intensity_wcm2")),
                    (Some(a), None) => a,
                    (None, Some(i)) => photons(i)?.sqrt(),
                    (None, None) => return Err(missing("distribution", "alpha0 or intensity_wcm2")),
                };
                PhaseSpaceDist::coherent(ComplexAmplitude::from_polar(a, d.phase))
            }
            DistName::Thermal => {
                let n = match (d.nbar, d.intensity_wcm2) {
                    (Some(_), Some(_)) => return Err(conflict("distribution", "nbar", "intensity_wcm2")),
                    (Some(n), None) => n,
                    (None, Some(i)) => photons(i)?,
                    (None, None) => return Err(missing("distribution", "nbar or intensity_wcm2")),
                };
                PhaseSpaceDist::thermal(n)
            }
        };
        dist.map(Some).map_err(|e| keyed("distribution", e))
    }

    /// Family used by `scan`; the intensity comes from the job.
    pub fn family(&self) -> Result<DistFamily, CliError> {
        match self.distribution.kind {
            DistName::Coherent => Ok(DistFamily::Coherent { phase: self.distribution.phase }),
            DistName::Squeezed => Ok(DistFamily::Squeezed { phi: self.distribution.phi }),
            DistName::Thermal => Ok(DistFamily::Thermal),
            DistName::None => Err(CliError::Config("distribution.kind: a scan needs coherent, squeezed or thermal".into())),
        }
    }

    pub fn scheme(&self) -> Result<NodeScheme, CliError> {
        let d = &self.distribution;
        match d.scheme {
            SchemeName::GaussHermite if d.order == 0 => Err(CliError::Config("distribution.order: must be at least 1".into())),
            SchemeName::GaussHermite => Ok(NodeScheme::GaussHermiteTensor { order: d.order }),
            SchemeName::MonteCarlo if d.count == 0 => Err(CliError::Config("distribution.count: must be at least 1".into())),
            SchemeName::MonteCarlo => Ok(NodeScheme::MonteCarlo { count: d.count, seed: d.seed }),
        }
    }

    pub fn grid(&self) -> Result<MomentumGrid, CliError> {
        let g = &self.grid;
        if g.nx == 0 || g.ny == 0 {
            return Err(CliError::Config("grid: nx and ny must be at least 1".into()));
        }
        let (px_lo, px_hi) = if g.nx == 1 { (0.0, 0.0) } else { (-g.px_max, g.px_max) };
        let (py_lo, py_hi) = if g.ny == 1 { (g.py_min, g.py_min) } else { (g.py_min, g.py_max) };
        MomentumGrid::new(px_lo, px_hi, g.nx, py_lo, py_hi, g.ny).map_err(|e| keyed("grid", e))
    }

    /// The `p_x` axis of the grid, used for lineouts.
    pub fn px_samples(&self) -> Result<Vec<f64>, CliError> {
        Ok(self.grid()?.px_values())
    }

    /// Explicit window, else `fallback`.
    pub fn window(&self, cfg: &FieldConfig, fallback: TimeWindow) -> Result<TimeWindow, CliError> {
        let w = &self.window;
        match (&w.event, w.t_start, w.t_end) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(conflict("window", "event", "t_start/t_end")),
            (Some(ev), None, None) => Ok(TimeWindow::event(cfg, parse_event(ev)?)),
            (None, Some(a), Some(b)) => TimeWindow::new(a, b).map_err(|e| keyed("window", e)),
            (None, None, None) => Ok(fallback),
            _ => Err(missing("window", "both t_start and t_end")),
        }
    }

    pub fn events(&self) -> Result<Vec<Event>, CliError> {
        if self.job.events.is_empty() {
            return Err(CliError::Config("job.events: empty".into()));
        }
        self.job.events.iter().map(|e| parse_event(e)).collect()
    }
}

pub fn parse_event(s: &str) -> Result<Event, CliError> {
    s.parse().map_err(|e: AtiError| keyed("window", e))
}

fn keyed(section: &str, e: AtiError) -> CliError {
    match e {
        AtiError::InvalidParameter { name, reason } => CliError::Config(format!("{section}.{name}: {reason}")),
        other => CliError::Config(format!("{section}: {other}")),
    }
}

fn conflict(section: &str, a: &str, b: &str) -> CliError {
    CliError::Config(format!("{section}: give either `{a}` or `{b}`, not both"))
}

fn missing(section: &str, what: &str) -> CliError {
    CliError::Config(format!("{section}: needs {what}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        let f = c.field_config().unwrap();
        assert!((f.e_2w() - 0.0925).abs() < 1e-4);
        assert!(c.distribution().unwrap().is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("[grid]\nnz = 3\n").unwrap_err();
        assert!(err.to_string().contains("nz"), "{err}");
        assert!(RunConfig::from_toml("[extra]\n").is_err());
    }

    #[test]
    fn squeezing_from_reference_intensity() {
        let c = RunConfig::from_toml("[distribution]\nkind = \"squeezed\"\nintensity_wcm2 = 3e12\n").unwrap();
        match c.distribution().unwrap().unwrap().kind {
            ati_core::DistKind::Squeezed { r, .. } => assert!((r - 12.15).abs() < 0.01, "{r}"),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::from_toml("[distribution]\nkind = \"squeezed\"\nr = 3.0\norder = 8\n").unwrap();
        c.apply(&Overrides { r: Some(5.0), order: Some(4), ..Default::default() });
        assert_eq!(c.distribution.r, Some(5.0));
        assert_eq!(c.distribution.order, 4);
    }

    #[test]
    fn conflicting_keys_are_config_errors() {
        let c = RunConfig::from_toml("[field]\nomega = 0.057\nwavelength_nm = 800.0\n").unwrap();
        assert!(matches!(c.field_config(), Err(CliError::Config(_))));
        let c = RunConfig::from_toml("[distribution]\nkind = \"squeezed\"\n").unwrap();
        assert!(c.distribution().unwrap_err().to_string().contains("distribution"));
        let c = RunConfig::from_toml("[atom]\nip = -1.0\n").unwrap();
        assert!(c.atom().unwrap_err().to_string().contains("atom.Ip"));
    }

    #[test]
    fn single_point_grid() {
        let c = RunConfig::from_toml("[grid]\nnx = 1\nny = 1\n").unwrap();
        assert_eq!(c.grid().unwrap().len(), 1);
    }
}
