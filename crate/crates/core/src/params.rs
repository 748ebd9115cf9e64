//! Dimensionless model parameters and the bath constants derived from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special;

/// Coupling-cutoff product above which the weak-coupling treatment is
/// flagged as questionable.
pub const WEAK_COUPLING_THRESHOLD: f64 = 0.5;

/// The five dimensionless parameters.
///
/// `y = 1/(βħω)`, `w = Ω/ω`, `eta` the Ohmic coupling, `script_t = ωT` and
/// `delta_l` the total displacement in units of the zero-point length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub y: f64,
    pub w: f64,
    pub eta: f64,
    pub script_t: f64,
    pub delta_l: f64,
}

impl ModelParams {
    pub fn new(y: f64, w: f64, eta: f64, script_t: f64, delta_l: f64) -> Result<Self> {
        let p = Self {
            y,
            w,
            eta,
            script_t,
            delta_l,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameter set shared by the position, energy, entropy and coherence
    /// figures, at driving time `script_t`.
    pub fn reference(script_t: f64) -> Self {
        Self {
            y: 0.1,
            w: 4.0,
            eta: 0.008,
            script_t,
            delta_l: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("y", self.y), ("w", self.w), ("script_t", self.script_t)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        // eta = 0 is admitted: it describes the closed, undamped oscillator.
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Domain(format!(
                "eta must be nonnegative and finite, got {}",
                self.eta
            )));
        }
        if !self.delta_l.is_finite() {
            return Err(Error::Domain(format!("delta_l must be finite, got {}", self.delta_l)));
        }
        Ok(())
    }

    pub fn weak_coupling_warning(&self) -> bool {
        self.eta * self.w >= WEAK_COUPLING_THRESHOLD
    }
}

/// Bath constants in units of `1/T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathConstants {
    pub n_th: f64,
    pub gamma_bar: f64,
    /// Lamb shift from the principal-value route.
    pub sigma_bar: f64,
    pub alpha_bar: Complex64,
    pub delta_bar: Complex64,
}

impl BathConstants {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let alpha = alpha_bar(p)?;
        Ok(Self {
            n_th: n_th(p.y)?,
            gamma_bar: gamma_bar(p),
            sigma_bar: sigma_bar(p)?,
            alpha_bar: alpha,
            delta_bar: delta_bar_from(alpha, p.script_t),
        })
    }

    /// Upward rate `γ̄ n_th`.
    pub fn gamma_up(&self) -> f64 {
        self.gamma_bar * self.n_th
    }

    /// Downward rate `γ̄ (n_th + 1)`.
    pub fn gamma_down(&self) -> f64 {
        self.gamma_bar * (self.n_th + 1.0)
    }
}

/// Parameters together with their bath constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub bath: BathConstants,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        if params.weak_coupling_warning() {
            log::warn!(
                "eta * w = {} is not small; weak-coupling results may be unreliable",
                params.eta * params.w
            );
        }
        Ok(Self {
            bath: BathConstants::new(&params)?,
            params,
        })
    }
}

/// Bose-Einstein occupation `1/(e^{1/y} - 1)`.
pub fn n_th(y: f64) -> Result<f64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::Domain(format!("y must be positive, got {y}")));
    }
    Ok(1.0 / (1.0 / y).exp_m1())
}

/// `γ̄ = 2π η 𝒯 e^{-1/w}`.
pub fn gamma_bar(p: &ModelParams) -> f64 {
    2.0 * std::f64::consts::PI * p.eta * p.script_t * (-1.0 / p.w).exp()
}

/// `Σ̄ = -η𝒯 PV∫_0^∞ x e^{-x/w} / (x - 1) dx`, evaluated by quadrature.
///
/// The interval `[0, 2]` is folded symmetrically around the pole; the
/// remainder is cut where the integrand falls below double precision.
pub fn sigma_bar(p: &ModelParams) -> Result<f64> {
    if p.eta == 0.0 {
        return Ok(0.0);
    }
    let w = p.w;
    let phi = |x: f64| x * (-x / w).exp();
    let upper = 2.0 + w * (40.0 + w.max(1.0).ln());
    let q = Quadrature::default().with_max_segments(20_000);
    let pv = q.principal_value(phi, 1.0, 0.0, upper)?;
    Ok(-p.eta * p.script_t * pv)
}

/// `Σ̄` from the closed form `-η𝒯 (w - e^{-1/w} Ei(1/w))`.
pub fn sigma_bar_closed_form(p: &ModelParams) -> Result<f64> {
    let e = special::ei_real(1.0 / p.w)?;
    Ok(-p.eta * p.script_t * (p.w - (-1.0 / p.w).exp() * e))
}

/// `ᾱ = 𝒯 η w Īₑ(w)` with the large-argument value of the `Iₑ` integral.
pub fn alpha_bar(p: &ModelParams) -> Result<Complex64> {
    let ie = special::ie_limit(p.w)?;
    Ok(ie * (p.script_t * p.eta * p.w))
}

/// `δ̄ = ᾱ + i𝒯`.
pub fn delta_bar(p: &ModelParams) -> Result<Complex64> {
    Ok(delta_bar_from(alpha_bar(p)?, p.script_t))
}

fn delta_bar_from(alpha: Complex64, script_t: f64) -> Complex64 {
    Complex64::new(alpha.re, alpha.im + script_t)
}
