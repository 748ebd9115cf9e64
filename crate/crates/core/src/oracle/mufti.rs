//! Thermal-ansatz oracle. For `ρ = e^φ e^{α a†} z^n e^{α* a}` the master
//! equation reduces to
//!
//! ```text
//! ż = -2σ̄ z + γ̄₁₂ z² + γ̄₂₁
//! α̇ = (γ̄₁₂ z - (σ̄ + i(Σ̄ + 𝒯))) α + h̄ (z - 1)
//! ```
//!
//! with `γ̄₁₂ = γ̄(n_th+1)`, `γ̄₂₁ = γ̄ n_th`, `σ̄ = (γ̄₁₂ + γ̄₂₁)/2`. The state is
//! a displaced thermal state with `⟨a⟩ = α/(1-z)` and `C_{aa†} = z/(1-z)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driving::{h_bar, DrivingProtocol, DrivingVariant};
use crate::dynamics::{validate_grid, ComplexMoments};
use crate::error::{Error, Result};
use crate::params::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuftiState {
    pub z: f64,
    pub alpha_g: Complex64,
}

impl MuftiState {
    /// Ansatz parameters of a displaced thermal state. States with
    /// `V_a ≠ 0` are outside the ansatz.
    pub fn from_moments(m: &ComplexMoments) -> Result<Self> {
        if m.v_a.norm() > 1e-12 {
            return Err(Error::AnsatzInvalid {
                tau: 0.0,
                z: f64::NAN,
            });
        }
        if !(m.c_aadag >= 0.0) {
            return Err(Error::NegativeOccupation(m.c_aadag));
        }
        let z = m.c_aadag / (1.0 + m.c_aadag);
        Ok(Self {
            z,
            alpha_g: m.a_mean * (1.0 - z),
        })
    }

    pub fn moments(&self) -> ComplexMoments {
        ComplexMoments {
            a_mean: self.alpha_g / (1.0 - self.z),
            v_a: Complex64::new(0.0, 0.0),
            c_aadag: self.z / (1.0 - self.z),
        }
    }

    /// `φ` from normalisation, `e^φ = (1-z) exp(|α|²/(z-1))`.
    pub fn phi(&self) -> f64 {
        (1.0 - self.z).ln() + self.alpha_g.norm_sqr() / (self.z - 1.0)
    }

    fn check(&self, tau: f64) -> Result<()> {
        if (0.0..1.0).contains(&self.z) && self.alpha_g.norm().is_finite() {
            Ok(())
        } else {
            Err(Error::AnsatzInvalid { tau, z: self.z })
        }
    }
}

/// Stable root of `γ̄₁₂ z² - 2σ̄ z + γ̄₂₁ = 0`, equal to `e^{-1/y}`.
pub fn fixed_point(model: &Model) -> f64 {
    let (g12, g21) = (model.bath.gamma_down(), model.bath.gamma_up());
    let sigma = 0.5 * (g12 + g21);
    let disc = (sigma * sigma - g12 * g21).sqrt();
    // Smaller root, written to avoid cancellation.
    g21 / (sigma + disc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuftiPoint {
    pub tau: f64,
    pub state: MuftiState,
    pub moments: ComplexMoments,
}

/// RK4 integration of the ansatz equations. `step = None` selects
/// `min(1e-4, 0.1/γ̄)`.
pub fn evolve_mufti(
    init: &MuftiState,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
    grid: &[f64],
    step: Option<f64>,
) -> Result<Vec<MuftiPoint>> {
    validate_grid(grid)?;
    init.check(0.0)?;
    let b = &model.bath;
    let (g12, g21) = (b.gamma_down(), b.gamma_up());
    let sigma = 0.5 * (g12 + g21);
    let rot = Complex64::new(sigma, b.sigma_bar + model.params.script_t);
    let mut step = step.unwrap_or(1e-4);
    if b.gamma_bar > 0.0 {
        step = step.min(0.1 / b.gamma_bar);
    }

    let rhs = |tau: f64, s: &MuftiState| -> Result<(f64, Complex64)> {
        let h = h_bar(tau.min(1.0), model, proto, variant)?;
        let dz = -2.0 * sigma * s.z + g12 * s.z * s.z + g21;
        let da = (g12 * s.z - rot) * s.alpha_g + h * (s.z - 1.0);
        Ok((dz, da))
    };
    let shifted = |s: &MuftiState, d: (f64, Complex64), h: f64| MuftiState {
        z: s.z + h * d.0,
        alpha_g: s.alpha_g + d.1 * h,
    };

    let mut state = *init;
    let mut tau = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        let span = target - tau;
        if span > 0.0 {
            let n = (span / step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for k in 0..n {
                let t = tau + k as f64 * h;
                let k1 = rhs(t, &state)?;
                let k2 = rhs(t + 0.5 * h, &shifted(&state, k1, 0.5 * h))?;
                let k3 = rhs(t + 0.5 * h, &shifted(&state, k2, 0.5 * h))?;
                let k4 = rhs(t + h, &shifted(&state, k3, h))?;
                state.z += h / 6.0 * (k1.0 + 2.0 * (k2.0 + k3.0) + k4.0);
                state.alpha_g += (k1.1 + 2.0 * (k2.1 + k3.1) + k4.1) * (h / 6.0);
                state.check(t + h)?;
            }
            tau = target;
        }
        out.push(MuftiPoint {
            tau: target,
            state,
            moments: state.moments(),
        });
    }
    Ok(out)
}
