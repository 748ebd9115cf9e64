//! Closed-form moment propagation
//!
//! ```text
//! ⟨a⟩(τ) = e^{-δ̄τ}⟨a⟩(0) - ∫_0^τ e^{-δ̄(τ-τ')} h̄(τ') dτ'
//! V_a(τ) = V_a(0) e^{-2δ̄τ}
//! C(τ)   = C(0) e^{-γ̄τ} + n_th (1 - e^{-γ̄τ})
//! ```
//!
//! The convolution is accumulated segment by segment between grid points,
//! `J_{k+1} = e^{-δ̄Δ} J_k + ∫_{τ_k}^{τ_{k+1}}`, so that each segment integral
//! is short and the segments can be evaluated in parallel.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{to_real, ComplexMoments, RealMoments};
use super::observables::{
    coherence_energy_basis, coherence_ss_basis, energy, entropy, fidelity, gibbs_moments,
    steady_state_from_forcing,
};
use crate::driving::{h_bar, DrivingProtocol, DrivingVariant};
use crate::error::{Error, Result};
use crate::params::Model;
use crate::quadrature::{gk21, Quadrature};

/// Default number of grid points for trajectories.
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Uniform grid of `n` points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|k| k as f64 / last).collect())
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidGrid("grid points must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub tau: f64,
    pub moments: ComplexMoments,
    pub real: RealMoments,
    pub energy: f64,
    pub entropy: f64,
    pub coherence_energy_basis: f64,
    pub coherence_ss_basis: f64,
    pub fidelity_to_gibbs: f64,
    pub fidelity_to_ss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub variant: DrivingVariant,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.tau)
    }
}

fn segment_quadrature() -> Quadrature {
    Quadrature::new(1e-13, 1e-12).with_max_segments(2000)
}

/// `∫_a^b e^{-δ̄(b-s)} h̄(s) ds`.
fn segment_integral(
    a: f64,
    b: f64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<Complex64> {
    let delta = model.bath.delta_bar;
    let failure = std::sync::Mutex::new(None);
    let integrand = |s: f64| match h_bar(s, model, proto, variant) {
        Ok(h) => (-delta * (b - s)).exp() * h,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let value = match proto {
        DrivingProtocol::LinearRamp { .. } => segment_quadrature().integrate(&integrand, a, b)?,
        // Each generic h̄ sample costs a nested quadrature, so use a fixed
        // composite rule resolving the e^{i𝒯τ} oscillation.
        DrivingProtocol::Generic { .. } => {
            let t = model.params.script_t + model.bath.delta_bar.norm();
            let pieces = ((b - a) * t / 0.5).ceil().max(1.0) as usize;
            let width = (b - a) / pieces as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..pieces {
                let lo = a + k as f64 * width;
                let hi = if k + 1 == pieces { b } else { lo + width };
                let (v, err, _) = gk21(&integrand, lo, hi);
                if err > 1e-9 * (1.0 + v.norm()) {
                    return Err(Error::NonConvergence {
                        estimate: err,
                        tolerance: 1e-9,
                    });
                }
                sum += v;
            }
            sum
        }
    };
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(value)
}

/// `⟨a⟩(τ)` by a single adaptive integral from 0, independent of any grid.
pub fn first_moment_at(
    tau: f64,
    a0: Complex64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<Complex64> {
    let j = if tau > 0.0 {
        segment_integral(0.0, tau, model, proto, variant)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok((-model.bath.delta_bar * tau).exp() * a0 - j)
}

/// Second moments at `τ`; identical for every variant.
pub fn second_moments_at(tau: f64, init: &ComplexMoments, model: &Model) -> (Complex64, f64) {
    let decay = (-model.bath.gamma_bar * tau).exp();
    let v_a = init.v_a * (-2.0 * model.bath.delta_bar * tau).exp();
    let c = init.c_aadag * decay + model.bath.n_th * (1.0 - decay);
    (v_a, c)
}

/// Propagates `init` over `grid` and evaluates all observables.
pub fn evolve(
    init: &ComplexMoments,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
    grid: &[f64],
) -> Result<Trajectory> {
    validate_grid(grid)?;
    if !init.is_finite() {
        return Err(Error::Domain("initial moments must be finite".into()));
    }
    init.check_physical()?;

    let bounds: Vec<(f64, f64)> = std::iter::once((0.0, grid[0]))
        .chain(grid.windows(2).map(|w| (w[0], w[1])))
        .collect();
    let segments: Vec<Complex64> = bounds
        .par_iter()
        .map(|&(a, b)| {
            if b > a {
                segment_integral(a, b, model, proto, variant)
            } else {
                Ok(Complex64::new(0.0, 0.0))
            }
        })
        .collect::<Result<_>>()?;
    let forcing: Vec<Complex64> = grid
        .par_iter()
        .map(|&tau| h_bar(tau, model, proto, variant))
        .collect::<Result<_>>()?;

    let delta = model.bath.delta_bar;
    let mut j = Complex64::new(0.0, 0.0);
    let mut means = Vec::with_capacity(grid.len());
    for (&(a, b), seg) in bounds.iter().zip(&segments) {
        j = (-delta * (b - a)).exp() * j + seg;
        means.push((-delta * b).exp() * init.a_mean - j);
    }

    let points = grid
        .par_iter()
        .zip(means.par_iter())
        .zip(forcing.par_iter())
        .map(|((&tau, &a_mean), &h)| {
            let (v_a, c_aadag) = second_moments_at(tau, init, model);
            let moments = ComplexMoments {
                a_mean,
                v_a,
                c_aadag,
            };
            observe(tau, moments, model, proto, h)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { variant, points })
}

/// All observables of `moments` at `τ`, e.g. for moments taken from an oracle
/// run. The steady state is the one of `variant`.
pub fn observe_moments(
    tau: f64,
    moments: ComplexMoments,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<TrajectoryPoint> {
    observe(tau, moments, model, proto, h_bar(tau, model, proto, variant)?)
}

fn observe(
    tau: f64,
    moments: ComplexMoments,
    model: &Model,
    proto: &DrivingProtocol,
    h: Complex64,
) -> Result<TrajectoryPoint> {
    let real = to_real(&moments);
    let lambda = proto.lambda(tau);
    let ss = steady_state_from_forcing(h, model);
    let gibbs = gibbs_moments(tau, model, proto);
    Ok(TrajectoryPoint {
        tau,
        moments,
        real,
        energy: energy(&real, lambda),
        entropy: entropy(&real)?,
        coherence_energy_basis: coherence_energy_basis(&moments, lambda)?,
        coherence_ss_basis: coherence_ss_basis(&moments, &ss)?,
        fidelity_to_gibbs: fidelity(&real, &gibbs)?,
        fidelity_to_ss: fidelity(&real, &ss)?,
    })
}
