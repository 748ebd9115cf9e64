//! Complex exponential integral and the three kernel integrals
//!
//! ```text
//! I0(z) = ∫_0^z dx / (1 + ix)^2
//! I1(z) = ∫_0^z dx x / (1 + ix)^2
//! Ie(z) = ∫_0^z dx e^{ix/w} / (1 + ix)^2
//! ```
//!
//! that appear in the driving function of the linear ramp, together with
//! their `z → ∞` limits.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Radius inside which the power series is always used.
const SERIES_RADIUS: f64 = 2.0;
/// Maximum tolerated cancellation `|z| - Re z` for the power series.
const SERIES_CANCELLATION: f64 = 4.6;
const MAX_ITERATIONS: usize = 50_000;

fn ensure_finite(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {z}")))
    }
}

/// Exponential integral `Ei(z)` on the principal branch (cut along the
/// negative real axis).
///
/// On the cut itself the real-valued convention `Ei(-x) = -E1(x)` is used,
/// i.e. the average of the two sides.
pub fn ei(z: Complex64) -> Result<Complex64> {
    ensure_finite(z, "Ei argument")?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Pole);
    }
    if z.re > 700.0 {
        return Err(Error::Range(format!("Ei overflows for Re(z) = {}", z.re)));
    }
    let r = z.norm();
    if r <= SERIES_RADIUS || (z.re > 0.0 && r - z.re < SERIES_CANCELLATION) {
        Ok(ei_series(z))
    } else {
        let e1 = e1_continued_fraction(-z)?;
        let branch = if z.im > 0.0 {
            PI
        } else if z.im < 0.0 {
            -PI
        } else {
            0.0
        };
        Ok(-e1 + Complex64::new(0.0, branch))
    }
}

/// Real exponential integral for real nonzero `x`.
pub fn ei_real(x: f64) -> Result<f64> {
    ei(Complex64::new(x, 0.0)).map(|v| v.re)
}

/// `γ + ln z + Σ_{k≥1} z^k / (k k!)`
fn ei_series(z: Complex64) -> Complex64 {
    let log = if z.im == 0.0 {
        Complex64::new(z.re.abs().ln(), 0.0)
    } else {
        z.ln()
    };
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = 1.0;
    loop {
        term *= z / k;
        let contrib = term / k;
        sum += contrib;
        if k > z.norm() && contrib.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
        k += 1.0;
    }
    sum + EULER_GAMMA + log
}

/// `E1(w)` from its continued fraction, evaluated with the modified Lentz
/// algorithm.
fn e1_continued_fraction(w: Complex64) -> Result<Complex64> {
    let tiny = 1e-300;
    let mut b = w + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_ITERATIONS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < f64::EPSILON {
            return Ok(h * (-w).exp());
        }
    }
    Err(Error::NonConvergence {
        estimate: f64::NAN,
        tolerance: f64::EPSILON,
    })
}

fn check_upper_limit(z: f64) -> Result<()> {
    if z.is_finite() && z >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "integration limit must be a finite nonnegative real, got {z}"
        )))
    }
}

/// `I0(z) = 1/(z - i) - i`, written without cancellation at small `z`.
pub fn integral_i0(z: f64) -> Result<Complex64> {
    check_upper_limit(z)?;
    let d = 1.0 + z * z;
    Ok(Complex64::new(z / d, -z * z / d))
}

/// `I1(z) = z/(z - i) - ln(z - i) - iπ/2` on the principal branch of the
/// logarithm, rearranged so that `I1(0) = 0` exactly.
pub fn integral_i1(z: f64) -> Result<Complex64> {
    check_upper_limit(z)?;
    let d = 1.0 + z * z;
    let re = z * z / d - 0.5 * (z * z).ln_1p();
    let im = z / d - z.atan();
    Ok(Complex64::new(re, im))
}

/// `Ie(z) = (i/w) e^{-1/w} (Ei(1/w) - Ei(1/w + iz/w)) + e^{iz/w}/(z - i) - i`.
pub fn integral_ie(z: f64, w: f64) -> Result<Complex64> {
    check_upper_limit(z)?;
    check_cutoff(w)?;
    if z == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inv_w = 1.0 / w;
    let base = Complex64::new(inv_w, 0.0);
    let diff = ei(base)? - ei(Complex64::new(inv_w, z * inv_w))?;
    let pref = I * inv_w * (-inv_w).exp();
    let boundary = Complex64::new(0.0, z * inv_w).exp() / Complex64::new(z, -1.0);
    Ok(pref * diff + boundary - I)
}

fn check_cutoff(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("cutoff w must be positive, got {w}")))
    }
}

/// `lim_{z→∞} I0(z) = -i`.
pub fn i0_limit() -> Complex64 {
    -I
}

/// Large-`z` form of `I1`: `1 - ln(1 + z^2)/2 - iπ/2`.
pub fn i1_asymptotic(z: f64) -> Complex64 {
    Complex64::new(1.0 - 0.5 * (z * z).ln_1p(), -0.5 * PI)
}

/// `lim_{z→∞} Ie(z) = (i/w) e^{-1/w} (Ei(1/w) - iπ) - i`.
pub fn ie_limit(w: f64) -> Result<Complex64> {
    check_cutoff(w)?;
    let inv_w = 1.0 / w;
    let e = ei(Complex64::new(inv_w, 0.0))?;
    Ok(I * inv_w * (-inv_w).exp() * (e - I * PI) - I)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel_err(got: Complex64, want: Complex64) -> f64 {
        (got - want).norm() / want.norm()
    }

    #[test]
    fn ei_of_quarter() {
        let v = ei_real(0.25).unwrap();
        assert!((v - (-0.542_543_264_661_913_73)).abs() < 1e-14);
    }

    // Reference values from 40-digit evaluation.
    #[test]
    fn ei_matches_high_precision_references() {
        let cases = [
            (c(0.25, 20.0), c(0.057421811004720505707, 3.113327461882452554)),
            (c(1.0, 1.0), c(1.7646259855638540684, 2.3877698515105224193)),
            (c(-3.0, 2.0), c(0.0090959208747947292993, 3.134692474327580746)),
            (c(10.0, 30.0), c(-633.9465479996470549, -299.82386666953537209)),
            (c(0.1, 0.001), c(-1.6227630837777852696, 0.011051375807528096457)),
            (c(45.0, 5.0), c(136907129566337645.74, -777330258894795057.72)),
            (c(-20.0, 0.5), c(-8.5138884343739765531e-11, 3.141592653540603998)),
            (c(2.0, -7.0), c(0.77607262504259034853, -2.4710061942873558569)),
            (c(30.0, 0.0), c(368973209407.27419706, 0.0)),
            (c(8.5, 0.0), c(674.26380151833714543, 0.0)),
            (c(0.25, 1e4), c(-0.000039232494253519888827, 3.1417149157003556038)),
            (c(-40.0, -10.0), c(6.9099945504277885173e-20, -3.1415926535897932385)),
            (c(0.0, 8.2), c(0.11644000554456656806, 3.1688948374162697974)),
            (c(0.1, 50.0), c(-0.0061782061084668233019, 3.1203831137129507908)),
            (c(-8.0, 0.001), c(-0.000037665599256711464054, 3.1415926116569737051)),
            (c(5.0, 5.0), c(-13.470936071475245856, -15.322492395731230968)),
        ];
        for (z, want) in cases {
            let got = ei(z).unwrap();
            assert!(rel_err(got, want) < 1e-12, "Ei({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn ei_tends_to_i_pi_along_vertical_lines() {
        let v = ei(c(0.25, 1e4)).unwrap();
        assert!((v - c(0.0, PI)).norm() < 1e-3);
    }

    #[test]
    fn ei_on_negative_axis_is_real() {
        let v = ei(c(-8.0, 0.0)).unwrap();
        assert_eq!(v.im, 0.0);
        assert!((v.re - (-3.766_562_284_392_975_4e-5)).abs() < 1e-17);
    }

    #[test]
    fn ei_rejects_pole_and_overflow() {
        assert_eq!(ei(c(0.0, 0.0)), Err(Error::Pole));
        assert!(matches!(ei(c(701.0, 0.0)), Err(Error::Range(_))));
        assert!(matches!(ei(c(f64::NAN, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn integrals_vanish_at_origin() {
        assert_eq!(integral_i0(0.0).unwrap(), c(0.0, 0.0));
        assert_eq!(integral_i1(0.0).unwrap(), c(0.0, 0.0));
        for w in [0.5, 1.0, 4.0, 10.0] {
            assert_eq!(integral_ie(0.0, w).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn i0_at_one() {
        assert!((integral_i0(1.0).unwrap() - c(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn i1_and_ie_match_quadrature_references() {
        let i1 = integral_i1(2.0).unwrap();
        assert!((i1 - c(-0.0047189562170501873004, -0.70714871779409050302)).norm() < 1e-14);
        let ie = integral_ie(5.0, 4.0).unwrap();
        assert!((ie - c(0.54371545672713716865, -1.0383927874992715423)).norm() < 1e-13);
    }

    #[test]
    fn large_argument_limits() {
        assert!((integral_i0(1e8).unwrap() - i0_limit()).norm() < 1e-7);
        let z = 1e6;
        let i1 = integral_i1(z).unwrap();
        assert!((i1.re - (1.0 - 0.5 * (1.0 + z * z).ln())).abs() < 1e-5);
        assert!((i1.im + 0.5 * PI).abs() < 1e-5);
        assert!((i1 - i1_asymptotic(z)).norm() < 1e-5);
        let ie = integral_ie(1e6, 4.0).unwrap();
        assert!((ie - ie_limit(4.0).unwrap()).norm() < 1e-4);
    }

    #[test]
    fn negative_limits_rejected() {
        assert!(integral_i0(-1.0).is_err());
        assert!(integral_i1(f64::INFINITY).is_err());
        assert!(integral_ie(1.0, 0.0).is_err());
    }
    #[test]
    fn closed_forms_match_direct_quadrature() {
        let q = crate::quadrature::Quadrature::new(1e-14, 1e-14).with_max_segments(20_000);
        let kernel = |x: f64| Complex64::new(1.0, x).powi(-2);
        for z in [0.01, 0.5, 1.0, 3.0, 10.0, 37.5, 100.0] {
            let i0 = q.integrate(kernel, 0.0, z).unwrap();
            assert!((integral_i0(z).unwrap() - i0).norm() < 1e-10, "I0({z})");
            let i1 = q.integrate(|x| x * kernel(x), 0.0, z).unwrap();
            assert!((integral_i1(z).unwrap() - i1).norm() < 1e-10, "I1({z})");
            for w in [0.5, 1.0, 4.0, 10.0] {
                let ie = q
                    .integrate(|x| Complex64::new(0.0, x / w).exp() * kernel(x), 0.0, z)
                    .unwrap();
                assert!((integral_ie(z, w).unwrap() - ie).norm() < 1e-10, "Ie({z}, {w})");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn ei_is_conjugate_symmetric(re in -60.0f64..60.0, im in 1e-3f64..60.0) {
            let z = c(re, im);
            let a = ei(z).unwrap();
            let b = ei(z.conj()).unwrap();
            proptest::prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
        }
    }
}
