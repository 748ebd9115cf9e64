use std::path::PathBuf;

use drosc_core::dynamics::evolve;
use drosc_core::{DrivingVariant, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{trajectory_csv, write_atomic, write_json, SCHEMA_VERSION, TRAJECTORY_COLUMNS};

#[derive(Debug, Serialize)]
pub struct SeriesFile {
    pub variant: DrivingVariant,
    pub file: String,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    library: &'static str,
    library_version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    /// Output directory taken from the environment, if any.
    output_dir_override: Option<String>,
    columns: &'static [&'static str],
    files: &'a [SeriesFile],
}

pub struct TrajectoryOutput {
    pub dir: PathBuf,
    pub files: Vec<SeriesFile>,
    pub sidecar: PathBuf,
}

/// Solves every configured variant and returns the trajectories in config order.
pub fn solve(cfg: &RunConfig) -> Result<Vec<Trajectory>> {
    let prep = cfg.prepare()?;
    let runs: drosc_core::Result<Vec<Trajectory>> = cfg
        .variants
        .par_iter()
        .map(|&v| evolve(&prep.initial, &prep.model, &prep.protocol, v, &prep.grid))
        .collect();
    Ok(runs?)
}

/// Writes `<prefix>_<variant>.csv` per variant and `<prefix>.json`.
pub fn run(cfg: &RunConfig) -> Result<TrajectoryOutput> {
    let trajectories = solve(cfg)?;
    let (dir, from_env) = cfg.output_dir();
    let prefix = &cfg.output.prefix;
    let mut files = Vec::new();
    for traj in &trajectories {
        let file = format!("{prefix}_{}.csv", traj.variant);
        write_atomic(&dir.join(&file), trajectory_csv(traj).as_bytes())?;
        log::info!("wrote {}", dir.join(&file).display());
        files.push(SeriesFile {
            variant: traj.variant,
            file,
        });
    }
    let sidecar_path = dir.join(format!("{prefix}.json"));
    write_json(
        &sidecar_path,
        &Sidecar {
            schema_version: SCHEMA_VERSION,
            library: "drosc-core",
            library_version: drosc_core::VERSION,
            command: "trajectory",
            config: cfg,
            output_dir_override: from_env.then(|| dir.display().to_string()),
            columns: &TRAJECTORY_COLUMNS,
            files: &files,
        },
    )?;
    Ok(TrajectoryOutput {
        dir,
        files,
        sidecar: sidecar_path,
    })
}
