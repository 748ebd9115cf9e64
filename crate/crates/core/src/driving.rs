//! Driving functions `Ā`, `f̄`, `ḡ` and the first-moment forcings `h̄`.
//!
//! All quantities are dimensionless: time is `τ = t/T`, `f̄ = T f`,
//! `ḡ = T g`. The linear ramp has closed forms; any other protocol goes
//! through nested adaptive quadrature of the memory integral
//!
//! ```text
//! f̄(τ) = η w 𝒯 ∫_0^{w𝒯τ} dx e^{ix/w} (1 + ix)^{-2} Ā(τ - x/(w𝒯))
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Model;
use crate::quadrature::Quadrature;
use crate::special::{integral_i0, integral_i1, integral_ie};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Master-equation variant selecting the forcing `h̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivingVariant {
    Nonadiabatic,
    Adiabatic,
    WeaklyDriven,
}

impl DrivingVariant {
    pub const ALL: [DrivingVariant; 3] = [
        DrivingVariant::Nonadiabatic,
        DrivingVariant::Adiabatic,
        DrivingVariant::WeaklyDriven,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DrivingVariant::Nonadiabatic => "nonadiabatic",
            DrivingVariant::Adiabatic => "adiabatic",
            DrivingVariant::WeaklyDriven => "weakly_driven",
        }
    }
}

impl fmt::Display for DrivingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A protocol `λ̄(τ)` on `τ ∈ [0, 1]` with `λ̄(0) = 0`.
#[derive(Clone)]
pub enum DrivingProtocol {
    /// `λ̄(τ) = Δl τ`.
    LinearRamp { delta_l: f64 },
    /// Arbitrary protocol, handled by quadrature.
    Generic { lambda: ScalarFn, lambda_dot: ScalarFn },
}

impl fmt::Debug for DrivingProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrivingProtocol::LinearRamp { delta_l } => {
                f.debug_struct("LinearRamp").field("delta_l", delta_l).finish()
            }
            DrivingProtocol::Generic { .. } => f.write_str("Generic"),
        }
    }
}

impl DrivingProtocol {
    pub fn linear_ramp(delta_l: f64) -> Result<Self> {
        if !delta_l.is_finite() {
            return Err(Error::InvalidProtocol(format!("delta_l must be finite, got {delta_l}")));
        }
        Ok(DrivingProtocol::LinearRamp { delta_l })
    }

    /// `λ ≡ 0`.
    pub fn undriven() -> Self {
        DrivingProtocol::LinearRamp { delta_l: 0.0 }
    }

    /// Generic protocol from `λ̄` and its derivative. Rejects `λ̄(0) ≠ 0`.
    pub fn generic<L, D>(lambda: L, lambda_dot: D) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let l0 = lambda(0.0);
        if !(l0.abs() <= 1e-14) {
            return Err(Error::InvalidProtocol(format!("lambda(0) must vanish, got {l0}")));
        }
        Ok(DrivingProtocol::Generic {
            lambda: Arc::new(lambda),
            lambda_dot: Arc::new(lambda_dot),
        })
    }

    /// The linear ramp expressed as a generic protocol, bypassing the closed
    /// forms.
    pub fn linear_ramp_as_generic(delta_l: f64) -> Self {
        DrivingProtocol::Generic {
            lambda: Arc::new(move |t| delta_l * t),
            lambda_dot: Arc::new(move |_| delta_l),
        }
    }

    pub fn lambda(&self, tau: f64) -> f64 {
        match self {
            DrivingProtocol::LinearRamp { delta_l } => delta_l * tau,
            DrivingProtocol::Generic { lambda, .. } => lambda(tau),
        }
    }

    pub fn lambda_dot(&self, tau: f64) -> f64 {
        match self {
            DrivingProtocol::LinearRamp { delta_l } => *delta_l,
            DrivingProtocol::Generic { lambda_dot, .. } => lambda_dot(tau),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must lie in [0, 1], got {tau}")))
    }
}

fn phase(t: f64) -> Complex64 {
    Complex64::new(0.0, t).exp()
}

fn inner_quadrature() -> Quadrature {
    Quadrature::new(1e-14, 1e-12).with_max_segments(2000)
}

fn outer_quadrature() -> Quadrature {
    Quadrature::new(1e-13, 1e-12).with_max_segments(20_000)
}

/// `Ā(τ) = (i𝒯/2) ∫_0^τ λ̄(τ') e^{i𝒯τ'} dτ'`.
pub fn a_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    let t = model.params.script_t;
    match proto {
        DrivingProtocol::LinearRamp { delta_l } => {
            let it = I / t;
            Ok(0.5 * delta_l * ((tau + it) * phase(t * tau) - it))
        }
        DrivingProtocol::Generic { .. } => a_bar_quadrature(tau, t, proto),
    }
}

fn a_bar_quadrature(tau: f64, t: f64, proto: &DrivingProtocol) -> Result<Complex64> {
    if tau <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let v = inner_quadrature().integrate(|s| proto.lambda(s) * phase(t * s), 0.0, tau)?;
    Ok(0.5 * I * t * v)
}

/// `Ā` on `[0, τ]` for repeated evaluation: the primitive is tabulated at
/// knots half a radian of `e^{i𝒯s}` apart, and each lookup integrates only
/// from the nearest knot below.
struct PrimitiveTable<'a> {
    t: f64,
    spacing: f64,
    knots: Vec<Complex64>,
    proto: &'a DrivingProtocol,
}

impl<'a> PrimitiveTable<'a> {
    fn new(tau: f64, t: f64, proto: &'a DrivingProtocol) -> Result<Self> {
        let spacing = 0.5 / t.max(10.0);
        let n = (tau / spacing).ceil() as usize;
        let mut knots = Vec::with_capacity(n + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        knots.push(acc);
        for k in 0..n {
            let (lo, hi) = (k as f64 * spacing, (k + 1) as f64 * spacing);
            acc += inner_quadrature().integrate(|s| proto.lambda(s) * phase(t * s), lo, hi)?;
            knots.push(acc);
        }
        Ok(Self { t, spacing, knots, proto })
    }

    fn a_bar(&self, u: f64) -> Result<Complex64> {
        let k = ((u / self.spacing).floor() as usize).min(self.knots.len() - 1);
        let lo = k as f64 * self.spacing;
        let (t, proto) = (self.t, self.proto);
        let rest = inner_quadrature().integrate(|s| proto.lambda(s) * phase(t * s), lo, u)?;
        Ok(0.5 * I * t * (self.knots[k] + rest))
    }
}

/// `Ā_ad(τ) = (λ̄(τ)/2) e^{i𝒯τ}`.
pub fn a_ad_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    Ok(0.5 * proto.lambda(tau) * phase(model.params.script_t * tau))
}

/// `δĀ = Ā - Ā_ad`.
pub fn delta_a_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    match proto {
        DrivingProtocol::LinearRamp { delta_l } => {
            let t = model.params.script_t;
            Ok(0.5 * delta_l * (I / t) * (phase(t * tau) - 1.0))
        }
        DrivingProtocol::Generic { .. } => {
            Ok(a_bar(tau, model, proto)? - a_ad_bar(tau, model, proto)?)
        }
    }
}

/// `δĀ₁(τ, σ) = (λ̄(τ-σ) - λ̄(τ))/2 · e^{i𝒯(τ-σ)}`.
#[doc(hidden)]
pub fn delta_a1_bar(tau: f64, sigma: f64, model: &Model, proto: &DrivingProtocol) -> Complex64 {
    let u = tau - sigma;
    0.5 * (proto.lambda(u) - proto.lambda(tau)) * phase(model.params.script_t * u)
}

/// `δĀ₂(τ, σ) = -∫_0^{τ-σ} λ̄'(τ')/2 · e^{i𝒯τ'} dτ'`.
#[doc(hidden)]
pub fn delta_a2_bar(
    tau: f64,
    sigma: f64,
    model: &Model,
    proto: &DrivingProtocol,
) -> Result<Complex64> {
    let t = model.params.script_t;
    let v = inner_quadrature().integrate(|s| proto.lambda_dot(s) * phase(t * s), 0.0, tau - sigma)?;
    Ok(-0.5 * v)
}

/// `f̄(τ)`, the bath-memory convolution of `Ā`.
pub fn f_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    let p = &model.params;
    match proto {
        DrivingProtocol::LinearRamp { delta_l } => {
            if *delta_l == 0.0 || p.eta == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let (w, t) = (p.w, p.script_t);
            let z = w * t * tau;
            let i0 = integral_i0(z)?;
            let i1 = integral_i1(z)?;
            let ie = integral_ie(z, w)?;
            let bracket = (Complex64::new(z, w) * i0 - i1) * phase(t * tau) - I * w * ie;
            Ok(0.5 * p.eta * delta_l * bracket)
        }
        DrivingProtocol::Generic { .. } => {
            let table = PrimitiveTable::new(tau, p.script_t, proto)?;
            memory_integral(tau, model, |u| table.a_bar(u))
        }
    }
}

/// `f̄_ad(τ)`: the memory integral with `e^{iωs} A_ad(t,s) = (λ(t)/2) e^{iωt}`.
pub fn f_ad_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    let p = &model.params;
    match proto {
        DrivingProtocol::LinearRamp { delta_l } => {
            let z = p.w * p.script_t * tau;
            Ok(0.5 * p.eta * delta_l * z * phase(p.script_t * tau) * integral_i0(z)?)
        }
        DrivingProtocol::Generic { .. } => {
            let a_ad = a_ad_bar(tau, model, proto)?;
            // The kernel acts on e^{-i𝒯σ} · A_ad, undoing the phase in `memory_integral`.
            let t = p.script_t;
            memory_integral(tau, model, |u| Ok(a_ad * phase(-t * (tau - u))))
        }
    }
}

/// `δf̄ = f̄ - f̄_ad`.
pub fn delta_f_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    check_tau(tau)?;
    let p = &model.params;
    match proto {
        DrivingProtocol::LinearRamp { delta_l } => {
            if *delta_l == 0.0 || p.eta == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let (w, t) = (p.w, p.script_t);
            let z = w * t * tau;
            let bracket = (I * w * integral_i0(z)? - integral_i1(z)?) * phase(t * tau)
                - I * w * integral_ie(z, w)?;
            Ok(0.5 * p.eta * delta_l * bracket)
        }
        DrivingProtocol::Generic { .. } => {
            Ok(f_bar(tau, model, proto)? - f_ad_bar(tau, model, proto)?)
        }
    }
}

/// `η w 𝒯 ∫_0^{w𝒯τ} dx e^{ix/w} (1+ix)^{-2} B(τ - x/(w𝒯))`.
///
/// The peaked part `x ≤ X_SPLIT` is integrated in `θ = atan x`, where the
/// kernel becomes `e^{-2iθ}`; the oscillatory tail is integrated in `x`.
fn memory_integral<B>(tau: f64, model: &Model, b: B) -> Result<Complex64>
where
    B: Fn(f64) -> Result<Complex64>,
{
    const X_SPLIT: f64 = 10.0;
    let p = &model.params;
    if tau <= 0.0 || p.eta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (w, t) = (p.w, p.script_t);
    let scale = w * t;
    let x_max = scale * tau;
    let failure = std::cell::RefCell::new(None);
    let eval = |x: f64| -> Complex64 {
        match b((tau - x / scale).max(0.0)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let q = outer_quadrature();
    let x_split = x_max.min(X_SPLIT);
    let mut total = q.integrate(
        |theta| {
            let x = theta.tan();
            phase(-2.0 * theta) * phase(x / w) * eval(x)
        },
        0.0,
        x_split.atan(),
    )?;
    if x_max > x_split {
        total += q.integrate(
            |x| phase(x / w) / Complex64::new(1.0, x).powi(2) * eval(x),
            x_split,
            x_max,
        )?;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(p.eta * scale * total)
}

/// `ḡ = e^{-i𝒯τ}(f̄ - ᾱĀ)`.
pub fn g_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    let f = f_bar(tau, model, proto)?;
    let a = a_bar(tau, model, proto)?;
    Ok(phase(-model.params.script_t * tau) * (f - model.bath.alpha_bar * a))
}

/// `ḡ_ad = e^{-i𝒯τ}(f̄_ad - ᾱĀ_ad)`.
pub fn g_ad_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    let f = f_ad_bar(tau, model, proto)?;
    let a = a_ad_bar(tau, model, proto)?;
    Ok(phase(-model.params.script_t * tau) * (f - model.bath.alpha_bar * a))
}

/// `δḡ = e^{-i𝒯τ}(δf̄ - ᾱδĀ)`.
pub fn delta_g_bar(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    let f = delta_f_bar(tau, model, proto)?;
    let a = delta_a_bar(tau, model, proto)?;
    Ok(phase(-model.params.script_t * tau) * (f - model.bath.alpha_bar * a))
}

/// `δg/ω = δḡ/𝒯`, the nonadiabatic correction in units of the system
/// frequency.
pub fn delta_g_over_omega(tau: f64, model: &Model, proto: &DrivingProtocol) -> Result<Complex64> {
    Ok(delta_g_bar(tau, model, proto)? / model.params.script_t)
}

/// Forcing of the first-moment equation `d⟨a⟩/dτ = -δ̄⟨a⟩ - h̄`.
pub fn h_bar(
    tau: f64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<Complex64> {
    check_tau(tau)?;
    let rot = -0.5 * I * model.params.script_t * proto.lambda(tau);
    match variant {
        DrivingVariant::Nonadiabatic => Ok(g_bar(tau, model, proto)? + rot),
        DrivingVariant::Adiabatic => {
            Ok(g_ad_bar(tau, model, proto)? + rot - 0.5 * proto.lambda_dot(tau))
        }
        DrivingVariant::WeaklyDriven => Ok(rot),
    }
}

/// The `ḡ` entering the Hamiltonian correction of each variant (zero for the
/// weakly driven equation).
pub fn hamiltonian_g_bar(
    tau: f64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
) -> Result<Complex64> {
    match variant {
        DrivingVariant::Nonadiabatic => g_bar(tau, model, proto),
        DrivingVariant::Adiabatic => g_ad_bar(tau, model, proto),
        DrivingVariant::WeaklyDriven => Ok(Complex64::new(0.0, 0.0)),
    }
}
