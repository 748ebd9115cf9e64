//! TOML run configuration.
//!
//! ```toml
//! variants = ["nonadiabatic", "adiabatic"]
//!
//! [params]
//! y = 0.1
//! w = 4.0
//! eta = 0.008
//! script_t = 20.0
//! delta_l = 10.0
//!
//! [protocol]
//! kind = "linear_ramp"
//!
//! [grid]
//! count = 2000
//! spacing = "uniform"
//!
//! [initial]
//! a0 = [0.1, 0.1]
//! v_a0 = [0.0, 0.0]
//! delta_n0 = 2.0
//!
//! [output]
//! dir = "out"
//! prefix = "trajectory"
//!
//! [oracle]
//! fock_dim = 60
//! max_fock_dim = 240
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use drosc_core::dynamics::{validate_grid, DEFAULT_GRID_POINTS};
use drosc_core::oracle::FockSettings;
use drosc_core::{Complex64, ComplexMoments, DrivingProtocol, DrivingVariant, Model, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable that replaces the configured output directory.
pub const OUT_DIR_ENV: &str = "DROSC_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "all_variants")]
    pub variants: Vec<DrivingVariant>,
    pub params: ModelParams,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub initial: InitialState,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

fn all_variants() -> Vec<DrivingVariant> {
    DrivingVariant::ALL.to_vec()
}

/// Shape of `λ̄(τ)`; the amplitude is `params.delta_l`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ProtocolTable", into = "ProtocolTable")]
pub enum ProtocolSpec {
    /// `Δl τ`, evaluated with closed forms.
    #[default]
    LinearRamp,
    /// `λ̄ ≡ 0`.
    Undriven,
    /// `Δl (3τ² - 2τ³)`.
    SmoothStep,
    /// `Δl sin²(πτ/2)`.
    SineSquared,
}

/// On-disk form of [`ProtocolSpec`]: a `[protocol]` table whose only key is
/// `kind`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolTable {
    kind: ProtocolKind,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProtocolKind {
    LinearRamp,
    Undriven,
    SmoothStep,
    SineSquared,
}

impl From<ProtocolTable> for ProtocolSpec {
    fn from(t: ProtocolTable) -> Self {
        match t.kind {
            ProtocolKind::LinearRamp => ProtocolSpec::LinearRamp,
            ProtocolKind::Undriven => ProtocolSpec::Undriven,
            ProtocolKind::SmoothStep => ProtocolSpec::SmoothStep,
            ProtocolKind::SineSquared => ProtocolSpec::SineSquared,
        }
    }
}

impl From<ProtocolSpec> for ProtocolTable {
    fn from(p: ProtocolSpec) -> Self {
        let kind = match p {
            ProtocolSpec::LinearRamp => ProtocolKind::LinearRamp,
            ProtocolSpec::Undriven => ProtocolKind::Undriven,
            ProtocolSpec::SmoothStep => ProtocolKind::SmoothStep,
            ProtocolSpec::SineSquared => ProtocolKind::SineSquared,
        };
        ProtocolTable { kind }
    }
}

impl ProtocolSpec {
    pub fn build(self, delta_l: f64) -> drosc_core::Result<DrivingProtocol> {
        match self {
            ProtocolSpec::LinearRamp => DrivingProtocol::linear_ramp(delta_l),
            ProtocolSpec::Undriven => Ok(DrivingProtocol::undriven()),
            ProtocolSpec::SmoothStep => DrivingProtocol::generic(
                move |t| delta_l * t * t * (3.0 - 2.0 * t),
                move |t| 6.0 * delta_l * t * (1.0 - t),
            ),
            ProtocolSpec::SineSquared => DrivingProtocol::generic(
                move |t| delta_l * (0.5 * PI * t).sin().powi(2),
                move |t| 0.5 * PI * delta_l * (PI * t).sin(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Uniform,
    /// Chebyshev-Lobatto points, clustered at both ends.
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            count: DEFAULT_GRID_POINTS,
            spacing: Spacing::Uniform,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(CliError::Config(format!(
                "grid.count: need at least 2 points, got {}",
                self.count
            )));
        }
        let last = (self.count - 1) as f64;
        let grid: Vec<f64> = (0..self.count)
            .map(|k| {
                let s = k as f64 / last;
                match self.spacing {
                    Spacing::Uniform => s,
                    Spacing::Chebyshev => 0.5 * (1.0 - (PI * s).cos()),
                }
            })
            .collect();
        validate_grid(&grid).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        Ok(grid)
    }
}

/// `⟨a⟩(0)`, `V_a(0)` and `C(0) = n_th + δn₀ - |⟨a⟩(0)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub a0: Complex64,
    #[serde(default)]
    pub v_a0: Complex64,
    pub delta_n0: f64,
}

impl InitialState {
    pub fn moments(&self, model: &Model) -> ComplexMoments {
        ComplexMoments {
            a_mean: self.a0,
            v_a: self.v_a0,
            c_aadag: model.bath.n_th + self.delta_n0 - self.a0.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            prefix: "trajectory".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub fock_dim: usize,
    pub max_fock_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub fock_tolerance: f64,
    pub mufti_tolerance: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        let fock = FockSettings::default();
        Self {
            fock_dim: fock.dim,
            max_fock_dim: fock.max_dim,
            step: None,
            fock_tolerance: 1e-4,
            mufti_tolerance: 1e-6,
        }
    }
}

impl OracleSpec {
    pub fn fock_settings(&self) -> FockSettings {
        FockSettings {
            dim: self.fock_dim,
            max_dim: self.max_fock_dim,
            step: self.step,
            ..FockSettings::default()
        }
    }
}

/// Everything a run needs, checked and derived from a [`RunConfig`].
pub struct Prepared {
    pub model: Model,
    pub protocol: DrivingProtocol,
    pub grid: Vec<f64>,
    pub initial: ComplexMoments,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    /// Validates every field and builds the model, protocol, grid and
    /// initial moments.
    pub fn prepare(&self) -> Result<Prepared> {
        let field = |name: &str, e: drosc_core::Error| CliError::Config(format!("{name}: {e}"));
        if self.variants.is_empty() {
            return Err(CliError::Config("variants: at least one variant is required".into()));
        }
        let model = Model::new(self.params).map_err(|e| field("params", e))?;
        let protocol = self
            .protocol
            .build(self.params.delta_l)
            .map_err(|e| field("protocol", e))?;
        let grid = self.grid.points()?;
        let initial = self.initial.moments(&model);
        if !initial.is_finite() {
            return Err(CliError::Config("initial: values must be finite".into()));
        }
        initial.check_physical().map_err(|e| field("initial", e))?;
        let o = &self.oracle;
        if o.fock_dim < 2 {
            return Err(CliError::Config(format!("oracle.fock_dim: must be at least 2, got {}", o.fock_dim)));
        }
        if o.max_fock_dim < o.fock_dim {
            return Err(CliError::Config(format!(
                "oracle.max_fock_dim: {} is below fock_dim {}",
                o.max_fock_dim, o.fock_dim
            )));
        }
        if let Some(step) = o.step {
            if !(step.is_finite() && step > 0.0) {
                return Err(CliError::Config(format!("oracle.step: must be positive, got {step}")));
            }
        }
        for (name, tol) in [("oracle.fock_tolerance", o.fock_tolerance), ("oracle.mufti_tolerance", o.mufti_tolerance)] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Config(format!("{name}: must be positive, got {tol}")));
            }
        }
        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(CliError::Config(format!(
                "output.prefix: must be a plain file name stem, got {:?}",
                self.output.prefix
            )));
        }
        Ok(Prepared {
            model,
            protocol,
            grid,
            initial,
        })
    }

    /// Output directory, honouring [`OUT_DIR_ENV`].
    pub fn output_dir(&self) -> (PathBuf, bool) {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => (PathBuf::from(dir), true),
            _ => (self.output.dir.clone(), false),
        }
    }
}
