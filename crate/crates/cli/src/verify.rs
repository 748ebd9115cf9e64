use drosc_core::dynamics::{evolve, observe_moments};
use drosc_core::oracle::{evolve_fock_gaussian, evolve_mufti, MuftiState};
use drosc_core::{DrivingVariant, TrajectoryPoint};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const QUANTITIES: [&str; 13] = [
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

fn values(p: &TrajectoryPoint) -> [f64; 13] {
    [
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

/// Largest deviation of one oracle from the Gaussian solution.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub variant: DrivingVariant,
    pub solver: String,
    pub tolerance: f64,
    pub max_dev: [f64; 13],
}

impl Comparison {
    pub fn worst(&self) -> f64 {
        self.max_dev.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn passed(&self) -> bool {
        self.max_dev.iter().all(|d| *d <= self.tolerance)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub comparisons: Vec<Comparison>,
    /// Variants for which the thermal ansatz does not apply.
    pub mufti_skipped: bool,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(Comparison::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<14} {:<12} {:<17} {:>10}  {:>10}\n", "variant", "solver", "quantity", "max |dev|", "tolerance"));
        for c in &self.comparisons {
            for (q, d) in QUANTITIES.iter().zip(&c.max_dev) {
                let flag = if *d <= c.tolerance { "" } else { "  EXCEEDED" };
                out.push_str(&format!(
                    "{:<14} {:<12} {:<17} {:>10.3e}  {:>10.1e}{flag}\n",
                    c.variant.name(),
                    c.solver,
                    q,
                    d,
                    c.tolerance
                ));
            }
        }
        if self.mufti_skipped {
            out.push_str("mufti: skipped, the initial state has V_a ≠ 0 and lies outside the thermal ansatz\n");
        }
        out
    }
}

fn compare(
    variant: DrivingVariant,
    solver: String,
    tolerance: f64,
    reference: &[TrajectoryPoint],
    other: &[TrajectoryPoint],
) -> Comparison {
    let mut max_dev = [0.0f64; 13];
    for (a, b) in reference.iter().zip(other) {
        for ((m, x), y) in max_dev.iter_mut().zip(values(a)).zip(values(b)) {
            *m = m.max((x - y).abs());
        }
    }
    Comparison {
        variant,
        solver,
        tolerance,
        max_dev,
    }
}

/// Runs the Gaussian solution and both oracles for every configured variant.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let prep = cfg.prepare()?;
    let (model, proto, grid) = (&prep.model, &prep.protocol, &prep.grid);
    let mufti_init = MuftiState::from_moments(&prep.initial).ok();
    let mut comparisons = Vec::new();
    for &v in &cfg.variants {
        let gauss = evolve(&prep.initial, model, proto, v, grid)?;
        let fock = evolve_fock_gaussian(&prep.initial, model, proto, v, grid, &cfg.oracle.fock_settings())?;
        let fock_points: drosc_core::Result<Vec<TrajectoryPoint>> = fock
            .points
            .iter()
            .map(|p| observe_moments(p.tau, p.moments, model, proto, v))
            .collect();
        comparisons.push(compare(
            v,
            format!("fock N={}", fock.dim),
            cfg.oracle.fock_tolerance,
            &gauss.points,
            &fock_points?,
        ));
        if let Some(init) = &mufti_init {
            let mufti = evolve_mufti(init, model, proto, v, grid, cfg.oracle.step)?;
            let points: drosc_core::Result<Vec<TrajectoryPoint>> = mufti
                .iter()
                .map(|p| observe_moments(p.tau, p.moments, model, proto, v))
                .collect();
            comparisons.push(compare(v, "mufti".into(), cfg.oracle.mufti_tolerance, &gauss.points, &points?));
        }
    }
    Ok(Report {
        comparisons,
        mufti_skipped: mufti_init.is_none(),
    })
}

/// Fails with [`CliError::ToleranceExceeded`] unless every deviation is
/// within tolerance.
pub fn check(report: &Report) -> Result<()> {
    let failed: Vec<String> = report
        .comparisons
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} {} ({:.3e} > {:.1e})", c.variant, c.solver, c.worst(), c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ToleranceExceeded(failed.join(", ")))
    }
}
