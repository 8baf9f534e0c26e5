//! TOML experiment configuration.
//!
//! ```toml
//! [model]
//! c1 = 1          # +1 focusing, -1 defocusing
//! c2 = 1.0        # loss in units of the normalised length
//! kind = "integrable"   # model evolved by `simulate`
//!
//! [grid]
//! t_min = -40.0
//! t_max = 40.0
//! n = 2048
//!
//! [solver]
//! dz = 1e-3
//! z_end = 1.0
//! snapshot_every = 10
//!
//! [initial]
//! kind = "gaussian"
//! amplitude = 1.0
//! width = 1.0
//!
//! [bounds]
//! epsilon = 0.1
//!
//! [output]
//! formats = ["csv", "json", "svg"]
//! ```
//!
//! Every section is optional at parse time; each subcommand asks for the ones
//! it needs. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nlse_core::bounds::Variant;
use nlse_core::models::{Coefficient, CoefficientFamily, Derivatives, DimensionlessParams};
use nlse_core::transform::{self, MapParams};
use nlse_core::{ComplexField, Grid, Interpolation, Model, Sign, SplitStepConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelSpec>,
    pub grid: Option<GridSpec>,
    pub solver: Option<SolverSpec>,
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub bounds: BoundSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub output: OutputSpec,
    pub painleve: Option<PainleveSpec>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dissipative,
    #[default]
    Integrable,
    Cubic,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub c1: Sign,
    pub c2: f64,
    /// Defaults to `c1`.
    pub rho: Option<Sign>,
    #[serde(default)]
    pub kind: ModelKind,
}

impl ModelSpec {
    pub fn rho(&self) -> Sign {
        self.rho.unwrap_or(self.c1)
    }

    pub fn params(&self) -> DimensionlessParams {
        DimensionlessParams {
            c1: self.c1,
            c2: self.c2,
            rho: self.rho(),
        }
    }

    pub fn model(&self, kind: ModelKind) -> Model {
        match kind {
            ModelKind::Dissipative => Model::Dissipative {
                c1: self.c1,
                c2: self.c2,
            },
            ModelKind::Integrable => Model::Integrable {
                c1: self.c1,
                c2: self.c2,
            },
            ModelKind::Cubic => Model::Cubic { rho: self.rho() },
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dz: f64,
    pub z_end: f64,
    #[serde(default = "one")]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Gaussian { amplitude: f64, width: f64 },
    /// The cubic soliton `a √2 sech(a T)` carried to the integrable model at
    /// `z = 0` (a chirp `e^{iC₂t²/4}`); the cubic model uses it unchirped.
    Soliton { a: f64 },
    /// `t,re,im` CSV sampled on the configured grid.
    File { path: PathBuf },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Fixed moment bound; when absent it is set to `0.9 δ_max`.
    pub delta: Option<f64>,
    #[serde(default)]
    pub variant: Variant,
    /// Verified interval as a fraction of `L(ε)`.
    #[serde(default = "default_l_fraction")]
    pub l_fraction: f64,
    /// Overrides for the measured constants (sweep only).
    pub k: Option<f64>,
    pub c_tilde: Option<f64>,
    /// Propagation distance for the reverse reading of the sweep.
    pub l_bar: Option<f64>,
    #[serde(default = "default_max_rescale")]
    pub max_rescale: usize,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_l_fraction() -> f64 {
    0.5
}

fn default_max_rescale() -> usize {
    32
}

impl Default for BoundSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            delta: None,
            variant: Variant::default(),
            l_fraction: default_l_fraction(),
            k: None,
            c_tilde: None,
            l_bar: None,
            max_rescale: default_max_rescale(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    /// Number of step sizes, each half the previous one.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    4
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            levels: default_levels(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDump {
    None,
    /// First and last snapshot of every trajectory.
    #[default]
    Ends,
    All,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Used when `--out` is not given.
    pub dir: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub fields: FieldDump,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            formats: all_formats(),
            fields: FieldDump::default(),
        }
    }
}

impl OutputSpec {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Const { value: f64 },
    Exp { scale: f64, rate: f64 },
    Samples { z: Vec<f64>, values: Vec<f64> },
    /// `z,value` CSV.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Exact,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZRange {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

/// Coefficients of `i v_z + f v_tt + g|v|²v + V₂t²v + i h v = 0`. Without this
/// section, `painleve-check` uses `f = 1`, `g = C₁e^{-C₂z}` and `V₂ = C₂²/4`
/// from `[model]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PainleveSpec {
    pub f: CoefficientSpec,
    pub g: CoefficientSpec,
    pub h: Option<CoefficientSpec>,
    /// When absent, computed from `f` and `g`.
    pub v2: Option<CoefficientSpec>,
    pub z: ZRange,
    #[serde(default)]
    pub derivatives: DerivativeMode,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-8
}

fn invalid(path: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a positive number, got {x}")))
    }
}

fn nonnegative(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a nonnegative number, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| HarnessError::ConfigSyntax {
            message: e.to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            HarnessError::ConfigSyntax { message } => HarnessError::ConfigSyntax {
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    /// Checks every numeric constraint the experiments rely on.
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.model {
            positive("model.c2", m.c2)?;
        }
        if let Some(g) = &self.grid {
            Grid::new(g.t_min, g.t_max, g.n).map_err(|e| invalid("grid", e.to_string()))?;
        }
        if let Some(s) = &self.solver {
            positive("solver.dz", s.dz)?;
            nonnegative("solver.z_end", s.z_end)?;
            if s.snapshot_every == 0 {
                return Err(invalid("solver.snapshot_every", "must be at least 1"));
            }
        }
        match &self.initial {
            Some(InitialSpec::Gaussian { amplitude, width }) => {
                if !amplitude.is_finite() {
                    return Err(invalid("initial.amplitude", "must be finite"));
                }
                positive("initial.width", *width)?;
            }
            Some(InitialSpec::Soliton { a }) => {
                positive("initial.a", *a)?;
                if let Some(m) = &self.model {
                    if m.rho() != Sign::Plus {
                        return Err(invalid(
                            "initial.kind",
                            "bright solitons need a focusing model (c1 = rho = 1)",
                        ));
                    }
                }
            }
            Some(InitialSpec::File { .. }) | None => {}
        }
        let b = &self.bounds;
        positive("bounds.epsilon", b.epsilon)?;
        if let Some(d) = b.delta {
            nonnegative("bounds.delta", d)?;
        }
        if !(b.l_fraction > 0.0 && b.l_fraction <= 1.0) {
            return Err(invalid("bounds.l_fraction", format!("must lie in (0, 1], got {}", b.l_fraction)));
        }
        if let Some(k) = b.k {
            nonnegative("bounds.k", k)?;
        }
        if let Some(c) = b.c_tilde {
            nonnegative("bounds.c_tilde", c)?;
        }
        if let Some(l) = b.l_bar {
            positive("bounds.l_bar", l)?;
        }
        if b.max_rescale == 0 {
            return Err(invalid("bounds.max_rescale", "must be at least 1"));
        }
        if self.convergence.levels == 0 {
            return Err(invalid("convergence.levels", "must be at least 1"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "must name at least one of csv, json, svg"));
        }
        if let Some(p) = &self.painleve {
            if !(p.z.start.is_finite() && p.z.end.is_finite() && p.z.end > p.z.start) {
                return Err(invalid("painleve.z", "end must exceed start"));
            }
            if p.z.points < 5 {
                return Err(invalid("painleve.z.points", "need at least 5 points"));
            }
            positive("painleve.tolerance", p.tolerance)?;
            for (name, spec) in [("painleve.f", Some(&p.f)), ("painleve.g", Some(&p.g)), ("painleve.h", p.h.as_ref()), ("painleve.v2", p.v2.as_ref())] {
                if let Some(CoefficientSpec::Samples { z, values }) = spec {
                    if z.len() != values.len() {
                        return Err(invalid(name, "z and values must have the same length"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn require_model(&self) -> Result<&ModelSpec> {
        self.model.as_ref().ok_or_else(|| invalid("model", "section is required"))
    }

    pub fn require_grid(&self) -> Result<Arc<Grid>> {
        let g = self.grid.as_ref().ok_or_else(|| invalid("grid", "section is required"))?;
        Grid::new(g.t_min, g.t_max, g.n).map_err(|e| invalid("grid", e.to_string()))
    }

    pub fn require_solver(&self) -> Result<&SolverSpec> {
        self.solver.as_ref().ok_or_else(|| invalid("solver", "section is required"))
    }

    pub fn split_step(&self) -> Result<SplitStepConfig> {
        let s = self.require_solver()?;
        SplitStepConfig::new(s.dz, s.snapshot_every).map_err(|e| invalid("solver", e.to_string()))
    }

    fn require_initial(&self) -> Result<&InitialSpec> {
        self.initial.as_ref().ok_or_else(|| invalid("initial", "section is required"))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Initial datum for `kind`. The soliton carries the chirp of the map for
    /// the two lossy models.
    pub fn initial_field(&self, kind: ModelKind) -> Result<ComplexField> {
        let grid = self.require_grid()?;
        match self.require_initial()? {
            InitialSpec::Gaussian { amplitude, width } => Ok(ComplexField::gaussian(grid, *amplitude, *width)?),
            InitialSpec::Soliton { a } => {
                let m = self.require_model()?;
                let q0 = transform::soliton(*a, m.rho(), 0.0, &grid)?;
                if kind == ModelKind::Cubic {
                    return Ok(q0);
                }
                let q = |_: f64, t: f64| transform::soliton_value(*a, 0.0, t);
                let p = MapParams::new(m.c2)?;
                Ok(transform::forward_map(transform::CubicSource::Analytic(&q), 0.0, &grid, p)?)
            }
            InitialSpec::File { path } => Ok(ComplexField::load_csv(grid, 0.0, &self.resolve(path))?),
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        Interpolation::Trigonometric
    }

    pub fn coefficient(&self, spec: &CoefficientSpec) -> Result<Coefficient> {
        Ok(match spec {
            CoefficientSpec::Const { value } => Coefficient::Const(*value),
            CoefficientSpec::Exp { scale, rate } => Coefficient::Exp {
                scale: *scale,
                rate: *rate,
            },
            CoefficientSpec::Samples { z, values } => Coefficient::Samples {
                z: z.clone(),
                values: values.clone(),
            },
            CoefficientSpec::File { path } => Coefficient::load_samples(&self.resolve(path))?,
        })
    }

    /// Coefficient family, z-grid and derivative mode for `painleve-check`.
    pub fn painleve_family(&self) -> Result<(CoefficientFamily, Option<Coefficient>, Vec<f64>, Derivatives, f64)> {
        match &self.painleve {
            Some(p) => {
                let family = CoefficientFamily {
                    f: self.coefficient(&p.f)?,
                    g: self.coefficient(&p.g)?,
                    h: p.h.as_ref().map(|h| self.coefficient(h)).transpose()?.unwrap_or_default(),
                    ..CoefficientFamily::default()
                };
                let v2 = p.v2.as_ref().map(|v| self.coefficient(v)).transpose()?;
                let z = linspace(p.z.start, p.z.end, p.z.points);
                let mode = match p.derivatives {
                    DerivativeMode::Exact => Derivatives::Exact,
                    DerivativeMode::FiniteDifference => Derivatives::FiniteDifference,
                };
                Ok((family, v2, z, mode, p.tolerance))
            }
            None => {
                let m = self.require_model()?;
                let family = CoefficientFamily {
                    f: Coefficient::Const(1.0),
                    g: Coefficient::Exp {
                        scale: m.c1.value(),
                        rate: -m.c2,
                    },
                    ..CoefficientFamily::default()
                };
                let z_end = self.solver.map(|s| s.z_end).filter(|&z| z > 0.0).unwrap_or(1.0);
                let v2 = Coefficient::Const(m.c2 * m.c2 / 4.0);
                Ok((family, Some(v2), linspace(0.0, z_end, 256), Derivatives::Exact, default_tolerance()))
            }
        }
    }
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    let h = (end - start) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { end } else { start + h * i as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
c1 = 1
c2 = 1.0

[grid]
t_min = -20.0
t_max = 20.0
n = 256

[solver]
dz = 0.01
z_end = 0.5

[initial]
kind = "gaussian"
amplitude = 0.5
width = 1.0
"#;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("."))
    }

    #[test]
    fn parses_defaults() {
        let cfg = parse(BASE).unwrap();
        assert_eq!(cfg.bounds.epsilon, 0.1);
        assert_eq!(cfg.bounds.variant, Variant::Squared);
        assert_eq!(cfg.solver.unwrap().snapshot_every, 1);
        assert_eq!(cfg.model.unwrap().rho(), Sign::Plus);
        assert_eq!(cfg.output.formats.len(), 3);
        let v0 = cfg.initial_field(ModelKind::Integrable).unwrap();
        assert_eq!(v0.len(), 256);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASE.replace("n = 256", "n = 256\nspacing = 0.1");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("spacing"), "{err}");
        let text = format!("{BASE}\n[extra]\nx = 1\n");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn field_paths_in_diagnostics() {
        let cases = [
            ("c2 = 1.0", "c2 = -1.0", "model.c2"),
            ("n = 256", "n = 100", "grid"),
            ("dz = 0.01", "dz = 0.0", "solver.dz"),
            ("width = 1.0", "width = 0.0", "initial.width"),
        ];
        for (from, to, path) in cases {
            let err = parse(&BASE.replace(from, to)).unwrap_err();
            assert!(err.to_string().starts_with(path), "{err}");
        }
        let err = parse(&format!("{BASE}\n[bounds]\nepsilon = 0.0\n")).unwrap_err();
        assert!(err.to_string().starts_with("bounds.epsilon"), "{err}");
        let err = parse(&BASE.replace("c1 = 1", "c1 = 2")).unwrap_err();
        assert!(err.to_string().contains("+1 or -1"), "{err}");
    }

    #[test]
    fn soliton_needs_focusing() {
        let text = BASE
            .replace("c1 = 1", "c1 = -1")
            .replace("kind = \"gaussian\"\namplitude = 0.5\nwidth = 1.0", "kind = \"soliton\"\na = 1.0");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().starts_with("initial.kind"), "{err}");
    }

    #[test]
    fn soliton_datum_is_chirped_for_lossy_models() {
        let text = BASE.replace("kind = \"gaussian\"\namplitude = 0.5\nwidth = 1.0", "kind = \"soliton\"\na = 1.0");
        let cfg = parse(&text).unwrap();
        let v0 = cfg.initial_field(ModelKind::Integrable).unwrap();
        let q0 = cfg.initial_field(ModelKind::Cubic).unwrap();
        assert!((v0.mass() - q0.mass()).abs() < 1e-12);
        assert!(v0.distance(&q0).unwrap() > 0.1);
    }

    #[test]
    fn painleve_defaults_to_the_model() {
        let cfg = parse(BASE).unwrap();
        let (family, v2, z, _, tol) = cfg.painleve_family().unwrap();
        assert_eq!(family.f, Coefficient::Const(1.0));
        assert_eq!(v2, Some(Coefficient::Const(0.25)));
        assert_eq!(z.len(), 256);
        assert_eq!(*z.last().unwrap(), 0.5);
        assert_eq!(tol, 1e-8);
    }

    #[test]
    fn painleve_section() {
        let text = r#"
[painleve]
f = { kind = "const", value = 0.5 }
g = { kind = "exp", scale = -1.0, rate = -0.2 }
z = { start = 0.0, end = 2.0, points = 64 }
derivatives = "finite_difference"
"#;
        let cfg = parse(text).unwrap();
        let (family, v2, z, mode, _) = cfg.painleve_family().unwrap();
        assert!(v2.is_none());
        assert_eq!(z.len(), 64);
        assert_eq!(mode, Derivatives::FiniteDifference);
        assert_eq!(family.h, Coefficient::Const(0.0));
        assert!(parse(&text.replace("points = 64", "points = 3")).is_err());
    }

    #[test]
    fn missing_sections_are_reported() {
        let cfg = parse("[bounds]\nepsilon = 0.2\n").unwrap();
        assert!(cfg.require_grid().unwrap_err().to_string().starts_with("grid"));
        assert!(cfg.require_model().is_err());
    }
}
