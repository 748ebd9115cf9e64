//! Truncated Fock-space integrator for the Schrödinger-picture master equation
//!
//! ```text
//! dρ/dτ = -i[(𝒯 + Σ̄) n + c a + c* a†, ρ]
//!         + γ̄(n_th+1) (a ρ a† - {a†a, ρ}/2) + γ̄ n_th (a† ρ a - {a a†, ρ}/2)
//! ```
//!
//! with `c = i h̄*`, so that `d⟨a⟩/dτ = -δ̄⟨a⟩ - h̄` holds exactly. The product
//! `a a†` is taken between truncated ladder matrices; its last diagonal entry
//! is zero, which keeps the truncated generator exactly trace preserving.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::driving::{h_bar, DrivingProtocol, DrivingVariant};
use crate::dynamics::{validate_grid, ComplexMoments};
use crate::error::{Error, Result};
use crate::params::Model;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated annihilation operator.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Displacement operator `exp(β a† - β* a)` built in `dim` dimensions.
pub fn displacement(beta: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    let gen = a.adjoint() * beta - a * beta.conj();
    gen.exp()
}

/// Squeeze operator `exp((ξ* a² - ξ a†²)/2)`.
pub fn squeeze(xi: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    let a2 = &a * &a;
    let gen = (&a2 * xi.conj() - a2.adjoint() * xi) * Complex64::new(0.5, 0.0);
    gen.exp()
}

/// Dense density matrix on the lowest `dim` number states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    rho: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    pub fn from_matrix(rho: DMatrix<Complex64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() < 2 {
            return Err(Error::Domain("density matrix must be square with dim ≥ 2".into()));
        }
        Ok(Self { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// Thermal state with occupation `n`, truncated and renormalised.
    pub fn thermal(n: f64, dim: usize) -> Result<Self> {
        Self::from_gaussian(&ComplexMoments::thermal(n), dim)
    }

    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        Self::from_gaussian(
            &ComplexMoments {
                a_mean: alpha,
                v_a: ZERO,
                c_aadag: 0.0,
            },
            dim,
        )
    }

    /// Displaced squeezed thermal state with the given moments.
    ///
    /// The state is assembled in a padded space, then cut to `dim` levels and
    /// renormalised.
    pub fn from_gaussian(m: &ComplexMoments, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("Fock dimension must be ≥ 2, got {dim}")));
        }
        m.check_physical()?;
        let base = 2.0 * m.c_aadag + 1.0;
        let nu = (base * base - 4.0 * m.v_a.norm_sqr()).max(1.0).sqrt();
        let n = 0.5 * (nu - 1.0);
        let r = 0.5 * (2.0 * m.v_a.norm() / nu).asinh();
        let theta = (-m.v_a).arg();
        let shift = m.a_mean.norm();
        let padded = (2 * dim).max(dim + 60) + (4.0 * shift * shift) as usize;

        let z = n / (n + 1.0);
        let mut rho = DMatrix::<Complex64>::zeros(padded, padded);
        let mut p = 1.0 - z;
        for k in 0..padded {
            rho[(k, k)] = Complex64::new(p, 0.0);
            p *= z;
        }
        if r > 0.0 {
            let s = squeeze(Complex64::from_polar(r, theta), padded);
            rho = &s * rho * s.adjoint();
        }
        if shift > 0.0 {
            let d = displacement(m.a_mean, padded);
            rho = &d * rho * d.adjoint();
        }
        let mut cut = rho.view((0, 0), (dim, dim)).into_owned();
        let tr = cut.trace();
        cut /= tr;
        let cut = (&cut + cut.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { rho: cut })
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Population of the highest retained level.
    pub fn top_population(&self) -> f64 {
        let n = self.dim() - 1;
        self.rho[(n, n)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.rho - self.rho.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho)
    }

    /// `⟨a⟩`, `V_a` and `C_{aa†}` from operator traces.
    pub fn moments(&self) -> ComplexMoments {
        moments_of(self.rho.as_slice(), self.dim())
    }

    /// `Tr(ρ₁ ρ₂)`, equal to the fidelity when either state is pure.
    pub fn overlap(&self, other: &Self) -> f64 {
        (&self.rho * &other.rho).trace().re
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn min_eigenvalue(rho: &DMatrix<Complex64>) -> f64 {
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.min()
}

fn moments_of(rho: &[Complex64], dim: usize) -> ComplexMoments {
    let at = |j: usize, k: usize| rho[j + k * dim];
    let mut a = ZERO;
    let mut a2 = ZERO;
    let mut n = 0.0;
    for k in 1..dim {
        let kf = k as f64;
        a += kf.sqrt() * at(k, k - 1);
        n += kf * at(k, k).re;
        if k >= 2 {
            a2 += (kf * (kf - 1.0)).sqrt() * at(k, k - 2);
        }
    }
    ComplexMoments {
        a_mean: a,
        v_a: a2 - a * a,
        c_aadag: n - a.norm_sqr(),
    }
}

/// Frozen-time generator `L_τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    dim: usize,
    /// `𝒯 + Σ̄`
    frequency: f64,
    /// Coefficient of `a` in the Hamiltonian.
    c: Complex64,
    down: f64,
    up: f64,
    sqrt: Vec<f64>,
    /// `-iεj - γ̄₁₂ j/2 - γ̄₂₁ m_j/2`, with `m_j` the truncated `a a†` diagonal.
    diag_row: Vec<Complex64>,
    /// `iεk - γ̄₁₂ k/2 - γ̄₂₁ m_k/2`.
    diag_col: Vec<Complex64>,
}

struct Column<'a> {
    cur: &'a [Complex64],
    prev: &'a [Complex64],
    next: &'a [Complex64],
    sk: f64,
    sk1: f64,
    diag_col: Complex64,
    mi_c: Complex64,
    mi_cc: Complex64,
    down: f64,
    up: f64,
}

impl Column<'_> {
    /// Single entry with explicit boundary handling.
    fn entry(&self, j: usize, diag_row: &[Complex64], s: &[f64]) -> Complex64 {
        let n = self.cur.len();
        let mut comm_a = -self.sk * self.prev[j];
        let mut comm_ad = -self.sk1 * self.next[j];
        let mut jump = ZERO;
        if j + 1 < n {
            comm_a += s[j + 1] * self.cur[j + 1];
            jump += (self.down * s[j + 1] * self.sk1) * self.next[j + 1];
        }
        if j >= 1 {
            comm_ad += s[j] * self.cur[j - 1];
            jump += (self.up * s[j] * self.sk) * self.prev[j - 1];
        }
        (diag_row[j] + self.diag_col) * self.cur[j] + self.mi_c * comm_a + self.mi_cc * comm_ad + jump
    }
}

impl Generator {
    pub fn new(model: &Model, h: Complex64, dim: usize) -> Self {
        let frequency = model.params.script_t + model.bath.sigma_bar;
        let down = model.bath.gamma_down();
        let up = model.bath.gamma_up();
        let m = |j: usize| if j + 1 < dim { (j + 1) as f64 } else { 0.0 };
        let damp = |j: usize| 0.5 * (down * j as f64 + up * m(j));
        Self {
            dim,
            frequency,
            c: I * h.conj(),
            down,
            up,
            sqrt: (0..=dim).map(|k| (k as f64).sqrt()).collect(),
            diag_row: (0..dim)
                .map(|j| Complex64::new(-damp(j), -frequency * j as f64))
                .collect(),
            diag_col: (0..dim)
                .map(|k| Complex64::new(-damp(k), frequency * k as f64))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn set_forcing(&mut self, h: Complex64) {
        self.c = I * h.conj();
    }

    /// `out = L[ρ]` on column-major `dim × dim` storage.
    pub fn apply_slice(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        assert!(rho.len() == n * n && out.len() == n * n);
        let s = &self.sqrt;
        let mi_c = -I * self.c;
        let mi_cc = -I * self.c.conj();
        let zeros = vec![ZERO; n];
        for (k, col) in out.chunks_exact_mut(n).enumerate() {
            let cur = &rho[k * n..(k + 1) * n];
            let prev = if k > 0 { &rho[(k - 1) * n..k * n] } else { &zeros[..] };
            let next = if k + 1 < n { &rho[(k + 1) * n..(k + 2) * n] } else { &zeros[..] };
            let ctx = Column {
                cur,
                prev,
                next,
                sk: s[k],
                sk1: s[k + 1],
                diag_col: self.diag_col[k],
                mi_c,
                mi_cc,
                down: self.down,
                up: self.up,
            };
            col[0] = ctx.entry(0, &self.diag_row, s);
            if n > 2 {
                let it = col[1..n - 1]
                    .iter_mut()
                    .zip(cur.windows(3))
                    .zip(prev.windows(3).zip(next.windows(3)))
                    .zip(s.windows(3).zip(&self.diag_row[1..n - 1]));
                for (((o, c3), (p3, n3)), (s3, &dr)) in it {
                    let comm_a = s3[2] * c3[2] - ctx.sk * p3[1];
                    let comm_ad = s3[1] * c3[0] - ctx.sk1 * n3[1];
                    let jump = (self.down * s3[2] * ctx.sk1) * n3[2] + (self.up * s3[1] * ctx.sk) * p3[0];
                    *o = (dr + ctx.diag_col) * c3[1] + mi_c * comm_a + mi_cc * comm_ad + jump;
                }
            }
            col[n - 1] = ctx.entry(n - 1, &self.diag_row, s);
        }
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(rho.nrows(), self.dim);
        let mut out = DMatrix::zeros(self.dim, self.dim);
        self.apply_slice(rho.as_slice(), out.as_mut_slice());
        out
    }
}

/// Generator of the chosen variant at `τ` on `dim` levels.
pub fn build_generator(
    tau: f64,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
    dim: usize,
) -> Result<Generator> {
    if dim < 2 {
        return Err(Error::Domain(format!("Fock dimension must be ≥ 2, got {dim}")));
    }
    Ok(Generator::new(model, h_bar(tau, model, proto, variant)?, dim))
}

/// Integration and monitoring settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockSettings {
    pub dim: usize,
    /// Largest dimension reached by automatic doubling.
    pub max_dim: usize,
    /// Fixed step; `None` selects `min(1e-4, 0.1/γ̄)`, further capped for
    /// RK4 stability.
    pub step: Option<f64>,
    pub tail_tolerance: f64,
    pub trace_tolerance: f64,
    pub eigenvalue_tolerance: f64,
    /// Number of output points at which the spectrum is checked.
    pub eigenvalue_checks: usize,
}

impl Default for FockSettings {
    fn default() -> Self {
        Self {
            dim: 60,
            max_dim: 240,
            step: None,
            tail_tolerance: 1e-6,
            trace_tolerance: 1e-8,
            eigenvalue_tolerance: 1e-7,
            eigenvalue_checks: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockPoint {
    pub tau: f64,
    pub moments: ComplexMoments,
    pub top_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockTrajectory {
    pub dim: usize,
    pub step: f64,
    pub points: Vec<FockPoint>,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    /// State at the last grid point.
    pub final_state: FockDensityMatrix,
}

fn default_step(model: &Model, proto: &DrivingProtocol, dim: usize) -> f64 {
    let gamma = model.bath.gamma_bar;
    let mut h: f64 = 1e-4;
    if gamma > 0.0 {
        h = h.min(0.1 / gamma);
    }
    // Spectral bound of the truncated generator; RK4 is stable for |hλ| < 2.78.
    let lambda_max = [0.0, 0.5, 1.0]
        .iter()
        .map(|&t| proto.lambda(t).abs())
        .fold(0.0, f64::max)
        .max(proto.lambda_dot(0.0).abs());
    let t = model.params.script_t;
    let bound = (t + model.bath.sigma_bar.abs()) * dim as f64
        + (t * lambda_max + model.bath.gamma_bar * 10.0 + 10.0) * 2.0 * (dim as f64).sqrt()
        + model.bath.gamma_bar * (2.0 * model.bath.n_th + 1.0) * dim as f64;
    h.min(1.0 / bound)
}

/// Integrates `init` over `grid` at the fixed dimension of `init`.
pub fn evolve_fock(
    init: &FockDensityMatrix,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
    grid: &[f64],
    settings: &FockSettings,
) -> Result<FockTrajectory> {
    validate_grid(grid)?;
    let dim = init.dim();
    let step = settings.step.unwrap_or_else(|| default_step(model, proto, dim));
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let len = dim * dim;
    let mut rho: Vec<Complex64> = init.rho.as_slice().to_vec();
    let mut k = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    let mut tmp = vec![ZERO; len];
    let mut gen = Generator::new(model, ZERO, dim);
    let check_every = (grid.len() / settings.eigenvalue_checks.max(1)).max(1);

    let mut tau = 0.0;
    let mut points = Vec::with_capacity(grid.len());
    let mut max_drift: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let trace = |r: &[Complex64]| (0..dim).map(|j| r[j * (dim + 1)].re).sum::<f64>();

    let tail_check = |r: &[Complex64], tau: f64| -> Result<f64> {
        let top = r[len - 1].re;
        if top > settings.tail_tolerance {
            return Err(Error::TruncationTooSmall {
                dim,
                tau,
                population: top,
            });
        }
        Ok(top)
    };
    tail_check(&rho, 0.0)?;

    for (gi, &target) in grid.iter().enumerate() {
        let span = target - tau;
        if span > 0.0 {
            let n_sub = (span / step).ceil().max(1.0) as usize;
            let h = span / n_sub as f64;
            for s in 0..n_sub {
                let t0 = tau + s as f64 * h;
                let stages = [t0, t0 + 0.5 * h, t0 + 0.5 * h, t0 + h];
                let weights = [0.0, 0.5 * h, 0.5 * h, h];
                for st in 0..4 {
                    gen.set_forcing(h_bar(stages[st].min(1.0), model, proto, variant)?);
                    if st == 0 {
                        gen.apply_slice(&rho, &mut k[0]);
                    } else {
                        for ((t, r), kp) in tmp.iter_mut().zip(&rho).zip(&k[st - 1]) {
                            *t = r + kp * weights[st];
                        }
                        let (_, rest) = k.split_at_mut(st);
                        gen.apply_slice(&tmp, &mut rest[0]);
                    }
                }
                let w = h / 6.0;
                let ks = k[0].iter().zip(&k[1]).zip(k[2].iter().zip(&k[3]));
                for (r, ((a, b), (c, d))) in rho.iter_mut().zip(ks) {
                    *r += (a + d + (b + c) * 2.0) * w;
                }
                tail_check(&rho, t0 + h)?;
            }
            tau = target;
        }
        let drift = (trace(&rho) - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > settings.trace_tolerance {
            return Err(Error::FockMonitor {
                tau: target,
                detail: format!("trace drift {drift:.3e}"),
            });
        }
        if gi % check_every == 0 || gi + 1 == grid.len() {
            let eig = min_eigenvalue(&DMatrix::from_column_slice(dim, dim, &rho));
            min_eig = min_eig.min(eig);
            if eig < -settings.eigenvalue_tolerance {
                return Err(Error::FockMonitor {
                    tau: target,
                    detail: format!("minimum eigenvalue {eig:.3e}"),
                });
            }
        }
        points.push(FockPoint {
            tau: target,
            moments: moments_of(&rho, dim),
            top_population: rho[len - 1].re,
        });
    }
    Ok(FockTrajectory {
        dim,
        step,
        points,
        max_trace_drift: max_drift,
        min_eigenvalue: min_eig,
        final_state: FockDensityMatrix {
            rho: DMatrix::from_column_slice(dim, dim, &rho),
        },
    })
}

/// Integrates from a Gaussian initial state, doubling the dimension from
/// `settings.dim` up to `settings.max_dim` whenever the tail monitor trips.
pub fn evolve_fock_gaussian(
    init: &ComplexMoments,
    model: &Model,
    proto: &DrivingProtocol,
    variant: DrivingVariant,
    grid: &[f64],
    settings: &FockSettings,
) -> Result<FockTrajectory> {
    let mut dim = settings.dim;
    loop {
        let rho = FockDensityMatrix::from_gaussian(init, dim)?;
        match evolve_fock(&rho, model, proto, variant, grid, settings) {
            Err(Error::TruncationTooSmall {
                dim: d,
                tau,
                population,
            }) => {
                if 2 * dim > settings.max_dim {
                    return Err(Error::TruncationTooSmall {
                        dim: d,
                        tau,
                        population,
                    });
                }
                log::info!(
                    "Fock dimension {dim} too small at tau = {tau} (tail {population:.2e}); retrying with {}",
                    2 * dim
                );
                dim *= 2;
            }
            other => return other,
        }
    }
}

/// Largest singular value of `U†aU - e^{-i𝒯τ}(Ā + a)` on the lowest `block`
/// levels, with `U = e^{-i𝒯τ n} D(Ā(τ))` built on `dim` levels.
pub fn interaction_picture_check(
    tau: f64,
    model: &Model,
    proto: &DrivingProtocol,
    dim: usize,
    block: usize,
) -> Result<f64> {
    if block == 0 || block > dim {
        return Err(Error::Domain(format!("block {block} must lie in 1..={dim}")));
    }
    let a_bar = crate::driving::a_bar(tau, model, proto)?;
    let t = model.params.script_t * tau;
    let a = annihilation(dim);
    let phase = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| {
        Complex64::from_polar(1.0, -t * k as f64)
    }));
    let u = phase * displacement(a_bar, dim);
    let lhs = u.adjoint() * &a * &u;
    let rhs = (DMatrix::identity(dim, dim) * a_bar + a) * Complex64::from_polar(1.0, -t);
    let diff = (lhs - rhs).view((0, 0), (block, block)).into_owned();
    Ok(diff.singular_values().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{self, fidelity, to_real, uniform_grid};
    use crate::params::ModelParams;
    use proptest::prelude::*;

    fn model(t: f64) -> Model {
        Model::new(ModelParams::reference(t)).unwrap()
    }

    fn random_hermitian(dim: usize, seed: u64) -> DMatrix<Complex64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let m = model(20.0);
        let p = DrivingProtocol::linear_ramp(10.0).unwrap();
        for v in DrivingVariant::ALL {
            let g = build_generator(0.4, &m, &p, v, 12).unwrap();
            for seed in 0..5 {
                let rho = random_hermitian(12, seed);
                let l = g.apply(&rho);
                assert!(l.trace().norm() < 1e-12);
                assert!(max_abs(&(&l - l.adjoint())) < 1e-12);
                // L[ρ]† = L[ρ†] for non-Hermitian input too
                let x = &rho + &rho * Complex64::new(0.0, 0.3) + annihilation(12);
                let lhs = g.apply(&x).adjoint();
                let rhs = g.apply(&x.adjoint());
                assert!(max_abs(&(lhs - rhs)) < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_thermal_state_is_stationary() {
        let m = Model::new(ModelParams { y: 1.5, ..ModelParams::reference(20.0) }).unwrap();
        let rho = FockDensityMatrix::thermal(m.bath.n_th, 30).unwrap();
        let g = build_generator(0.3, &m, &DrivingProtocol::undriven(), DrivingVariant::Nonadiabatic, 30)
            .unwrap();
        assert!(max_abs(&g.apply(rho.matrix())) < 1e-14);
    }

    #[test]
    fn gaussian_construction_reproduces_moments() {
        let target = ComplexMoments {
            a_mean: Complex64::new(0.8, -0.4),
            v_a: Complex64::new(0.15, 0.1),
            c_aadag: 0.7,
        };
        let rho = FockDensityMatrix::from_gaussian(&target, 60).unwrap();
        let got = rho.moments();
        assert!((got.a_mean - target.a_mean).norm() < 1e-10);
        assert!((got.v_a - target.v_a).norm() < 1e-10);
        assert!((got.c_aadag - target.c_aadag).abs() < 1e-10);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!(rho.min_eigenvalue() > -1e-12);
        assert!(rho.hermiticity_error() < 1e-15);
    }

    #[test]
    fn undriven_vacuum_relaxation_matches_closed_form() {
        let m = Model::new(ModelParams { y: 1.0, ..ModelParams::reference(20.0) }).unwrap();
        let grid = uniform_grid(11).unwrap();
        let settings = FockSettings {
            dim: 40,
            ..FockSettings::default()
        };
        let traj = evolve_fock_gaussian(
            &ComplexMoments::vacuum(),
            &m,
            &DrivingProtocol::undriven(),
            DrivingVariant::Nonadiabatic,
            &grid,
            &settings,
        )
        .unwrap();
        assert_eq!(traj.dim, 40);
        for pt in &traj.points {
            let want = m.bath.n_th * (1.0 - (-m.bath.gamma_bar * pt.tau).exp());
            assert!((pt.moments.c_aadag - want).abs() < 1e-6);
        }
        assert!(traj.max_trace_drift < 1e-8);
        assert!(traj.min_eigenvalue > -1e-7);
    }

    #[test]
    fn driven_run_matches_gaussian_moments() {
        let m = model(10.0);
        let p = DrivingProtocol::linear_ramp(10.0).unwrap();
        let init = ComplexMoments::displaced_thermal(Complex64::new(0.1, 0.1), m.bath.n_th + 2.0);
        let grid = uniform_grid(21).unwrap();
        let fock = evolve_fock_gaussian(&init, &m, &p, DrivingVariant::Nonadiabatic, &grid, &FockSettings::default())
            .unwrap();
        let gauss = dynamics::evolve(&init, &m, &p, DrivingVariant::Nonadiabatic, &grid).unwrap();
        for (f, g) in fock.points.iter().zip(&gauss.points) {
            let fr = to_real(&f.moments);
            assert!((fr.x_mean - g.real.x_mean).abs() < 1e-4, "tau {}", f.tau);
            assert!((fr.p_mean - g.real.p_mean).abs() < 1e-4, "tau {}", f.tau);
            assert!((fr.v_x - g.real.v_x).abs() < 1e-4);
        }
    }

    #[test]
    fn tiny_dimension_reports_truncation() {
        let m = model(10.0);
        let p = DrivingProtocol::linear_ramp(10.0).unwrap();
        let init = ComplexMoments::displaced_thermal(Complex64::new(0.1, 0.1), m.bath.n_th + 2.0);
        let settings = FockSettings {
            dim: 4,
            max_dim: 4,
            ..FockSettings::default()
        };
        let err = evolve_fock_gaussian(&init, &m, &p, DrivingVariant::Nonadiabatic, &[0.5, 1.0], &settings);
        assert!(matches!(err, Err(Error::TruncationTooSmall { dim: 4, .. })));
    }

    #[test]
    fn coherent_overlap_matches_fidelity_formula() {
        let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-0.3, 0.9));
        let ra = FockDensityMatrix::coherent(a, 50).unwrap();
        let rb = FockDensityMatrix::coherent(b, 50).unwrap();
        let overlap = ra.overlap(&rb);
        let ma = ComplexMoments { a_mean: a, v_a: ZERO, c_aadag: 0.0 };
        let mb = ComplexMoments { a_mean: b, v_a: ZERO, c_aadag: 0.0 };
        let f = fidelity(&to_real(&ma), &to_real(&mb)).unwrap();
        assert!((overlap - f).abs() < 1e-6);
        assert!((overlap - (-(a - b).norm_sqr()).exp()).abs() < 1e-10);
    }

    #[test]
    fn interaction_picture_identity_on_low_block() {
        let m = model(20.0);
        let p = DrivingProtocol::linear_ramp(10.0).unwrap();
        assert!(interaction_picture_check(0.0, &m, &p, 40, 20).unwrap() < 1e-12);
        let undriven = DrivingProtocol::undriven();
        assert!(interaction_picture_check(0.5, &m, &undriven, 40, 40).unwrap() < 1e-12);
        assert!(interaction_picture_check(0.5, &m, &p, 40, 5).unwrap() < 1e-8);
        // |Ā(0.5)| ≈ 2.5, so a 20-level block needs about 80 levels of headroom.
        assert!(interaction_picture_check(0.5, &m, &p, 80, 20).unwrap() < 1e-8);
    }

    /// In the frame ρ' = D(ζ) ρ D(ζ)† with ζ' = h̄ - δ̄ζ, the driven generator
    /// becomes the undriven one.
    #[test]
    fn displacement_frame_removes_driving() {
        let m = model(20.0);
        let p = DrivingProtocol::linear_ramp(10.0).unwrap();
        let variant = DrivingVariant::Nonadiabatic;
        let delta = m.bath.delta_bar;
        // ζ(τ) by RK4 from ζ(0) = -⟨a⟩(0)
        let mut zeta = Complex64::new(-0.1, -0.1);
        let tau_end = 0.3;
        let n = 3000;
        let h = tau_end / n as f64;
        let rhs = |t: f64, z: Complex64| h_bar(t, &m, &p, variant).unwrap() - delta * z;
        for k in 0..n {
            let t = k as f64 * h;
            let k1 = rhs(t, zeta);
            let k2 = rhs(t + h / 2.0, zeta + k1 * (h / 2.0));
            let k3 = rhs(t + h / 2.0, zeta + k2 * (h / 2.0));
            let k4 = rhs(t + h, zeta + k3 * h);
            zeta += (k1 + 2.0 * (k2 + k3) + k4) * (h / 6.0);
        }
        let zeta_dot = rhs(tau_end, zeta);
        // The frame tracks the mean: ζ(τ) = -⟨a⟩(τ).
        let a = dynamics::first_moment_at(tau_end, Complex64::new(0.1, 0.1), &m, &p, variant).unwrap();
        assert!((zeta + a).norm() < 1e-9);

        let dim = 120;
        let rho = FockDensityMatrix::from_gaussian(
            &ComplexMoments {
                a_mean: Complex64::new(1.2, -0.5),
                v_a: Complex64::new(0.1, 0.05),
                c_aadag: 0.6,
            },
            dim,
        )
        .unwrap();
        let d = displacement(zeta, dim);
        let rho_p = &d * rho.matrix() * d.adjoint();
        let driven = build_generator(tau_end, &m, &p, variant, dim).unwrap();
        let free = Generator::new(&m, ZERO, dim);
        let a_op = annihilation(dim);
        let k_op = a_op.adjoint() * zeta_dot - &a_op * zeta_dot.conj();
        let lhs = (&k_op * &rho_p - &rho_p * &k_op) + &d * driven.apply(rho.matrix()) * d.adjoint();
        let rhs = free.apply(&rho_p);
        let block = 30;
        let diff = max_abs(&(lhs - rhs).view((0, 0), (block, block)).into_owned());
        assert!(diff < 1e-8, "residual {diff}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn generator_is_trace_free(seed in 0u64..10_000, tau in 0.0f64..1.0) {
            let m = model(20.0);
            let p = DrivingProtocol::linear_ramp(10.0).unwrap();
            let g = build_generator(tau, &m, &p, DrivingVariant::Adiabatic, 10).unwrap();
            let l = g.apply(&random_hermitian(10, seed));
            prop_assert!(l.trace().norm() < 1e-12);
        }
    }
}
