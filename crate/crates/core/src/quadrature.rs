//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature for complex-valued
//! integrands on finite intervals, plus a Cauchy principal value rule built on
//! the symmetric fold around the pole.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208842815400,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd Kronrod abscissae XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One application of the 21-point Kronrod rule on `[a, b]`.
///
/// Returns `(kronrod, error_estimate, abs_integral)`.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    for (j, &x) in XGK.iter().enumerate().take(10) {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    let err = ((kronrod - gauss) * half).norm();
    (kronrod * half, err, abs_sum * half.abs())
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_segments: 4000,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_segments(mut self, max_segments: usize) -> Self {
        self.max_segments = max_segments;
        self
    }

    /// Integrates a complex-valued `f` over `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        self.integrate_with_error(f, a, b).map(|(v, _)| v)
    }

    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate(|x| Complex64::new(f(x), 0.0), a, b)
            .map(|v| v.re)
    }

    /// Integrates `f` over `[a, b]`, returning the value and the final error
    /// estimate.
    pub fn integrate_with_error<F>(&self, f: F, a: f64, b: f64) -> Result<(Complex64, f64)>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "quadrature limits must be finite, got [{a}, {b}]"
            )));
        }
        if a == b {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let (value, err, resabs) = gk21(&f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, err, resabs });
        let mut total = value;
        let mut total_err = err;
        // ∫|f| over the current partition; eps times this bounds the
        // accuracy any summation of the integrand can reach.
        let mut total_abs = resabs;
        // Segments whose error is at the roundoff floor are parked here.
        let mut settled_err = 0.0;

        loop {
            let tol = self
                .abs_tol
                .max(self.rel_tol * total.norm())
                .max(50.0 * f64::EPSILON * total_abs);
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_segments {
                return Err(Error::NonConvergence {
                    estimate: total_err,
                    tolerance: tol,
                });
            }
            let Some(seg) = heap.pop() else { break };
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval cannot be split further in floating point.
                settled_err += seg.err;
                if heap.is_empty() {
                    break;
                }
                continue;
            }
            let (v1, e1, r1) = gk21(&f, seg.a, mid);
            let (v2, e2, r2) = gk21(&f, mid, seg.b);
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.err;
            total_abs += r1 + r2 - seg.resabs;
            for (lo, hi, v, e, r) in [(seg.a, mid, v1, e1, r1), (mid, seg.b, v2, e2, r2)] {
                if e <= 50.0 * f64::EPSILON * r {
                    settled_err += e;
                    total_err -= e;
                } else {
                    heap.push(Segment { a: lo, b: hi, value: v, err: e, resabs: r });
                }
            }
            if heap.is_empty() {
                break;
            }
        }
        Ok((total, total_err.max(0.0) + settled_err))
    }

    /// Cauchy principal value of `∫_a^b f(x) / (x - pole) dx` for a pole
    /// strictly inside `(a, b)`.
    ///
    /// The symmetric neighbourhood `[pole - r, pole + r]` is folded into the
    /// regular integrand `[f(pole + u) - f(pole - u)] / u` on `[0, r]`; the
    /// remainder is integrated directly.
    pub fn principal_value<F>(&self, f: F, pole: f64, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if !(a < pole && pole < b) {
            return Err(Error::Domain(format!(
                "pole {pole} must lie strictly inside ({a}, {b})"
            )));
        }
        let r = (pole - a).min(b - pole);
        let folded = self.integrate_real(|u| (f(pole + u) - f(pole - u)) / u, 0.0, r)?;
        let left = if pole - r > a {
            self.integrate_real(|x| f(x) / (x - pole), a, pole - r)?
        } else {
            0.0
        };
        let right = if pole + r < b {
            self.integrate_real(|x| f(x) / (x - pole), pole + r, b)?
        } else {
            0.0
        };
        Ok(folded + left + right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let v = q.integrate_real(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        let q = Quadrature::new(1e-13, 1e-12);
        let k = 200.0;
        let v = q
            .integrate(|x| Complex64::new(0.0, k * x).exp(), 0.0, 1.0)
            .unwrap();
        let exact = (Complex64::new(0.0, k).exp() - 1.0) / Complex64::new(0.0, k);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let q = Quadrature::new(1e-10, 1e-10).with_max_segments(10_000);
        let v = q.integrate_real(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let q = Quadrature::new(1e-15, 1e-15).with_max_segments(3);
        let err = q
            .integrate_real(|x| (1000.0 * x).sin() * x.sqrt(), 0.0, 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn principal_value_of_simple_pole() {
        // PV ∫_0^3 dx / (x - 1) = ln 2
        let q = Quadrature::default();
        let v = q.principal_value(|_| 1.0, 1.0, 0.0, 3.0).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn principal_value_rejects_pole_outside() {
        let q = Quadrature::default();
        assert!(q.principal_value(|_| 1.0, 5.0, 0.0, 3.0).is_err());
    }
}
