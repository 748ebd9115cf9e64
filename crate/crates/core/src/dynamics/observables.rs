//! Energy, entropy, coherence and fidelity of Gaussian states, plus the
//! instantaneous Gibbs and steady states.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::moments::{ComplexMoments, RealMoments, PHYSICALITY_SLACK};
use crate::driving::{h_bar, DrivingProtocol, DrivingVariant};
use crate::error::{Error, Result};
use crate::params::Model;

/// Occupations within this distance below zero are treated as zero.
const OCCUPATION_SLACK: f64 = 1e-12;

/// `s(x) = x ln x`, continuous at `x = 0`.
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy of a thermal state with occupation `n`.
pub fn thermal_entropy(n: f64) -> f64 {
    xlnx(n + 1.0) - xlnx(n)
}

fn clamp_occupation(n: f64) -> Result<f64> {
    if n >= 0.0 {
        Ok(n)
    } else if n >= -OCCUPATION_SLACK {
        Ok(0.0)
    } else {
        Err(Error::NegativeOccupation(n))
    }
}

/// Mean energy in units of `ħω` for the instantaneous trap centre `λ`.
pub fn energy(m: &RealMoments, lambda: f64) -> f64 {
    0.25 * (m.p_mean * m.p_mean + m.x_mean * m.x_mean) - 0.5 * lambda * m.x_mean
        + 0.25 * lambda * lambda
        + 0.25 * (m.v_x + m.v_p)
}

/// Von Neumann entropy in nats.
///
/// With the symplectic eigenvalue `ν = (V_x V_p - C_xp²)^{1/2} = 1/μ`,
/// `S = s((ν+1)/2) - s((ν-1)/2)`.
pub fn entropy(m: &RealMoments) -> Result<f64> {
    let det = m.det();
    if !(det >= 1.0 - PHYSICALITY_SLACK) {
        return Err(Error::Unphysical {
            purity: 1.0 / det.sqrt(),
        });
    }
    let nu = det.sqrt().max(1.0);
    Ok(thermal_entropy(0.5 * (nu - 1.0)))
}

/// `⟨n_t⟩` for `n_t = n - (λ/2)(a + a†) + λ²/4`.
pub fn occupation_energy_basis(m: &ComplexMoments, lambda: f64) -> f64 {
    m.c_aadag + m.a_mean.norm_sqr() - lambda * m.a_mean.re + 0.25 * lambda * lambda
}

/// Relative entropy of coherence in the instantaneous energy eigenbasis.
pub fn coherence_energy_basis(m: &ComplexMoments, lambda: f64) -> Result<f64> {
    let n = clamp_occupation(occupation_energy_basis(m, lambda))?;
    Ok(thermal_entropy(n) - entropy(&super::to_real(m))?)
}

/// `⟨ñ⟩` of the number operator whose eigenbasis diagonalises the Gaussian
/// state `ss`, taken in the state `m`.
///
/// `ñ + 1/2 = (r - u)ᵀ adj(V) (r - u) / (4 √det V)` with `u`, `V` the
/// first moments and covariance matrix of `ss`.
pub fn occupation_ss_basis(m: &RealMoments, ss: &RealMoments) -> Result<f64> {
    let det = ss.det();
    if !(det >= 1.0 - PHYSICALITY_SLACK) {
        return Err(Error::Unphysical {
            purity: 1.0 / det.sqrt(),
        });
    }
    let adj = Matrix2::new(ss.v_p, -ss.c_xp, -ss.c_xp, ss.v_x);
    let cov = Matrix2::new(m.v_x, m.c_xp, m.c_xp, m.v_p);
    let du = nalgebra::Vector2::new(m.x_mean - ss.x_mean, m.p_mean - ss.p_mean);
    let quad = (adj * cov).trace() + du.dot(&(adj * du));
    Ok(0.25 * quad / det.sqrt() - 0.5)
}

/// Relative entropy of coherence in the eigenbasis of the Gaussian state `ss`.
pub fn coherence_ss_basis(m: &ComplexMoments, ss: &RealMoments) -> Result<f64> {
    let real = super::to_real(m);
    let n = clamp_occupation(occupation_ss_basis(&real, ss)?)?;
    Ok(thermal_entropy(n) - entropy(&real)?)
}

/// Instantaneous steady state of the frozen generator at `τ`:
/// `⟨a⟩ = -h̄/δ̄` with thermal second moments.
pub fn steady_state_moments(
    tau: f64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<RealMoments> {
    let h = h_bar(tau, model, proto, variant)?;
    Ok(steady_state_from_forcing(h, model))
}

/// Steady state for a precomputed forcing `h̄`.
pub fn steady_state_from_forcing(h: Complex64, model: &Model) -> RealMoments {
    let a = -h / model.bath.delta_bar;
    let v = 2.0 * model.bath.n_th + 1.0;
    RealMoments {
        x_mean: 2.0 * a.re,
        p_mean: 2.0 * a.im,
        v_x: v,
        v_p: v,
        c_xp: 0.0,
    }
}

/// Instantaneous Gibbs state: thermal, centred on `x = λ(τ)`.
pub fn gibbs_moments(tau: f64, model: &Model, proto: &DrivingProtocol) -> RealMoments {
    let v = 2.0 * model.bath.n_th + 1.0;
    RealMoments {
        x_mean: proto.lambda(tau),
        p_mean: 0.0,
        v_x: v,
        v_p: v,
        c_xp: 0.0,
    }
}

/// Fidelity between two Gaussian states in the squared convention
/// `F = exp(-δuᵀ(V₁+V₂)⁻¹δu/2) / (√(Δ+Λ) - √Λ)`, with
/// `Δ = det(V₁+V₂)/4` and `Λ = (det V₁ - 1)(det V₂ - 1)/4`.
pub fn fidelity(s1: &RealMoments, s2: &RealMoments) -> Result<f64> {
    let v1 = Matrix2::new(s1.v_x, s1.c_xp, s1.c_xp, s1.v_p);
    let v2 = Matrix2::new(s2.v_x, s2.c_xp, s2.c_xp, s2.v_p);
    let sum = v1 + v2;
    let inv = sum.try_inverse().ok_or(Error::SingularCovariance)?;
    let det_sum = sum.determinant();
    if !(det_sum > 0.0) {
        return Err(Error::SingularCovariance);
    }
    let du = nalgebra::Vector2::new(s1.x_mean - s2.x_mean, s1.p_mean - s2.p_mean);
    let delta = 0.25 * det_sum;
    let lambda = (0.25 * (s1.det() - 1.0) * (s2.det() - 1.0)).max(0.0);
    // √(Δ+Λ) - √Λ = Δ / (√(Δ+Λ) + √Λ) avoids cancellation for mixed states.
    let denom = delta / ((delta + lambda).sqrt() + lambda.sqrt());
    Ok((-0.5 * du.dot(&(inv * du))).exp() / denom)
}
