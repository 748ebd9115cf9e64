//! Presets reproducing the data series behind each figure.

use std::path::{Path, PathBuf};

use drosc_core::driving::delta_g_over_omega;
use drosc_core::dynamics::{evolve, uniform_grid, DEFAULT_GRID_POINTS};
use drosc_core::{
    Complex64, ComplexMoments, DrivingProtocol, DrivingVariant, Model, ModelParams, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{csv, figure_trajectory_csv, write_atomic, write_json, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    #[value(name = "fig1")]
    Fig1,
    #[value(name = "fig2")]
    Fig2,
    #[value(name = "fig3")]
    Fig3,
    #[value(name = "fig4")]
    Fig4,
    #[value(name = "fig5")]
    Fig5,
    #[value(name = "appD1")]
    AppD1,
    #[value(name = "appD2")]
    AppD2,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::AppD1,
        FigureId::AppD2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::AppD1 => "appD1",
            FigureId::AppD2 => "appD2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown figure id {s:?}")))
    }

    /// Driving times, in panel order.
    pub fn script_ts(self) -> &'static [f64] {
        match self {
            FigureId::Fig1 => &[10.0, 20.0, 200.0, 2000.0],
            FigureId::Fig3 => &[100.0, 20.0, 10.0, 5.0],
            FigureId::Fig4 => &[20.0],
            _ => &[2000.0, 200.0, 20.0, 10.0],
        }
    }

    pub fn variants(self) -> &'static [DrivingVariant] {
        match self {
            FigureId::AppD1 | FigureId::AppD2 => &[DrivingVariant::Nonadiabatic, DrivingVariant::WeaklyDriven],
            _ => &[DrivingVariant::Nonadiabatic, DrivingVariant::Adiabatic],
        }
    }

    pub fn delta_l(self) -> f64 {
        match self {
            FigureId::AppD2 => 0.1,
            _ => 10.0,
        }
    }
}

/// Initial state shared by all trajectory figures: `⟨a⟩(0) = 0.1 + 0.1i`,
/// `V_a(0) = 0`, `δn₀ = 2`.
pub const INITIAL_A: Complex64 = Complex64::new(0.1, 0.1);
pub const INITIAL_DELTA_N: f64 = 2.0;

pub fn params(script_t: f64, delta_l: f64) -> ModelParams {
    ModelParams {
        delta_l,
        ..ModelParams::reference(script_t)
    }
}

/// Grid size: the requested count, raised to resolve `e^{i𝒯τ}` with about
/// 30 points per period.
pub fn grid_points(requested: Option<usize>, script_t: f64) -> usize {
    let floor = (5.0 * script_t).ceil() as usize + 1;
    requested.unwrap_or(DEFAULT_GRID_POINTS).max(floor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSpec {
    pub script_t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<DrivingVariant>,
    pub delta_l: f64,
    pub points: usize,
}

impl SeriesSpec {
    pub fn file_name(&self, id: FigureId) -> String {
        let t = format!("T{}", self.script_t);
        match self.variant {
            Some(v) => format!("{}_{t}_{v}.csv", id.name()),
            None => format!("{}_{t}.csv", id.name()),
        }
    }
}

pub fn series_specs(id: FigureId, points: Option<usize>) -> Vec<SeriesSpec> {
    let mut specs = Vec::new();
    for &script_t in id.script_ts() {
        let n = grid_points(points, script_t);
        if id == FigureId::Fig1 {
            specs.push(SeriesSpec { script_t, variant: None, delta_l: id.delta_l(), points: n });
        } else {
            for &v in id.variants() {
                specs.push(SeriesSpec { script_t, variant: Some(v), delta_l: id.delta_l(), points: n });
            }
        }
    }
    specs
}

/// `(τ, δg/ω)` on the series grid.
pub fn delta_g_series(spec: &SeriesSpec) -> Result<Vec<(f64, Complex64)>> {
    let model = Model::new(params(spec.script_t, spec.delta_l))?;
    let proto = DrivingProtocol::linear_ramp(spec.delta_l)?;
    let grid = uniform_grid(spec.points)?;
    let values: drosc_core::Result<Vec<_>> = grid
        .iter()
        .map(|&tau| delta_g_over_omega(tau, &model, &proto).map(|v| (tau, v)))
        .collect();
    Ok(values?)
}

pub fn trajectory_series(spec: &SeriesSpec) -> Result<(Trajectory, DrivingProtocol)> {
    let variant = spec
        .variant
        .ok_or_else(|| CliError::Config("trajectory series needs a variant".into()))?;
    let model = Model::new(params(spec.script_t, spec.delta_l))?;
    let proto = DrivingProtocol::linear_ramp(spec.delta_l)?;
    let init = ComplexMoments::displaced_thermal(INITIAL_A, model.bath.n_th + INITIAL_DELTA_N);
    let grid = uniform_grid(spec.points)?;
    Ok((evolve(&init, &model, &proto, variant, &grid)?, proto))
}

fn series_csv(id: FigureId, spec: &SeriesSpec) -> Result<String> {
    if id == FigureId::Fig1 {
        let rows: Vec<[f64; 3]> = delta_g_series(spec)?
            .into_iter()
            .map(|(tau, g)| [tau, g.re, -g.im])
            .collect();
        Ok(csv(
            &["tau", "re_delta_g_over_omega", "minus_im_delta_g_over_omega"],
            rows.iter().map(|r| &r[..]),
        ))
    } else {
        let (traj, proto) = trajectory_series(spec)?;
        Ok(figure_trajectory_csv(&traj, &proto))
    }
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    #[serde(flatten)]
    spec: SeriesSpec,
}

#[derive(Debug, Serialize)]
struct InitialPreset {
    a0: Complex64,
    v_a0: Complex64,
    delta_n0: f64,
}

#[derive(Debug, Serialize)]
struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Manifest {
    schema_version: u32,
    library: &'static str,
    library_version: &'static str,
    figure: &'static str,
    y: f64,
    w: f64,
    eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<InitialPreset>,
    overrides: Overrides,
    series: Vec<ManifestEntry>,
}

/// Writes every series of `id` into `dir` plus `<id>_manifest.json`, and
/// returns the manifest path.
pub fn run(id: FigureId, dir: &Path, points: Option<usize>) -> Result<PathBuf> {
    let specs = series_specs(id, points);
    let texts: Result<Vec<String>> = specs.par_iter().map(|s| series_csv(id, s)).collect();
    let mut entries = Vec::new();
    for (spec, text) in specs.iter().zip(texts?) {
        let file = spec.file_name(id);
        write_atomic(&dir.join(&file), text.as_bytes())?;
        log::info!("wrote {}", dir.join(&file).display());
        entries.push(ManifestEntry { file, spec: *spec });
    }
    let reference = ModelParams::reference(1.0);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        library: "drosc-core",
        library_version: drosc_core::VERSION,
        figure: id.name(),
        y: reference.y,
        w: reference.w,
        eta: reference.eta,
        initial: (id != FigureId::Fig1).then_some(InitialPreset {
            a0: INITIAL_A,
            v_a0: Complex64::new(0.0, 0.0),
            delta_n0: INITIAL_DELTA_N,
        }),
        overrides: Overrides { points },
        series: entries,
    };
    let path = dir.join(format!("{}_manifest.json", id.name()));
    write_json(&path, &manifest)?;
    Ok(path)
}
