use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use drosc_core::{DrivingProtocol, Trajectory};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Version of the CSV column layout and JSON metadata.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 14] = [
    "tau",
    "re_a",
    "im_a",
    "x",
    "p",
    "v_x",
    "v_p",
    "c_xp",
    "energy",
    "entropy",
    "coherence_energy",
    "coherence_ss",
    "fidelity_gibbs",
    "fidelity_ss",
];

/// 17 significant digits, enough for a lossless `f64` round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row; every row has `header.len()` values.
pub fn csv<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn trajectory_row(p: &drosc_core::TrajectoryPoint) -> [f64; 14] {
    [
        p.tau,
        p.moments.a_mean.re,
        p.moments.a_mean.im,
        p.real.x_mean,
        p.real.p_mean,
        p.real.v_x,
        p.real.v_p,
        p.real.c_xp,
        p.energy,
        p.entropy,
        p.coherence_energy_basis,
        p.coherence_ss_basis,
        p.fidelity_to_gibbs,
        p.fidelity_to_ss,
    ]
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let rows: Vec<[f64; 14]> = traj.points.iter().map(trajectory_row).collect();
    csv(&TRAJECTORY_COLUMNS, rows.iter().map(|r| &r[..]))
}

/// Trajectory columns followed by `lambda` and `x_minus_lambda`.
pub fn figure_trajectory_csv(traj: &Trajectory, proto: &DrivingProtocol) -> String {
    let mut header = TRAJECTORY_COLUMNS.to_vec();
    header.extend(["lambda", "x_minus_lambda"]);
    let rows: Vec<Vec<f64>> = traj
        .points
        .iter()
        .map(|p| {
            let lambda = proto.lambda(p.tau);
            let mut row = trajectory_row(p).to_vec();
            row.extend([lambda, p.real.x_mean - lambda]);
            row
        })
        .collect();
    csv(&header, rows.iter().map(|r| &r[..]))
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("metadata is serialisable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
