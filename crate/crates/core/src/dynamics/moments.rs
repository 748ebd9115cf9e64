use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the uncertainty bound `V_x V_p - C_xp² ≥ 1`.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

/// Gaussian state in ladder-operator form: `⟨a⟩`, `V_a = ⟨a²⟩ - ⟨a⟩²` and the
/// symmetrised covariance `C_{aa†} = ⟨a†a⟩ - |⟨a⟩|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexMoments {
    pub a_mean: Complex64,
    pub v_a: Complex64,
    pub c_aadag: f64,
}

/// Gaussian state in quadrature form, with `x = a + a†` and `p = -i(a - a†)`
/// so that the vacuum has unit variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealMoments {
    pub x_mean: f64,
    pub p_mean: f64,
    pub v_x: f64,
    pub v_p: f64,
    pub c_xp: f64,
}

impl ComplexMoments {
    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    pub fn thermal(n: f64) -> Self {
        Self {
            a_mean: Complex64::new(0.0, 0.0),
            v_a: Complex64::new(0.0, 0.0),
            c_aadag: n,
        }
    }

    /// Displaced thermal state with total mean occupation `n_total`.
    pub fn displaced_thermal(a_mean: Complex64, n_total: f64) -> Self {
        Self {
            a_mean,
            v_a: Complex64::new(0.0, 0.0),
            c_aadag: n_total - a_mean.norm_sqr(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a_mean.re.is_finite()
            && self.a_mean.im.is_finite()
            && self.v_a.re.is_finite()
            && self.v_a.im.is_finite()
            && self.c_aadag.is_finite()
    }

    pub fn check_physical(&self) -> Result<()> {
        to_real(self).check_physical()
    }
}

impl RealMoments {
    /// `V_x V_p - C_xp²`.
    pub fn det(&self) -> f64 {
        self.v_x * self.v_p - self.c_xp * self.c_xp
    }

    /// Purity `μ = (V_x V_p - C_xp²)^{-1/2}`.
    pub fn purity(&self) -> f64 {
        1.0 / self.det().sqrt()
    }

    pub fn check_physical(&self) -> Result<()> {
        let finite = [self.x_mean, self.p_mean, self.v_x, self.v_p, self.c_xp]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("moments must be finite".into()));
        }
        if self.v_x <= 0.0 || self.v_p <= 0.0 || self.det() < 1.0 - PHYSICALITY_SLACK {
            return Err(Error::Unphysical {
                purity: self.purity(),
            });
        }
        Ok(())
    }
}

pub fn to_real(m: &ComplexMoments) -> RealMoments {
    let base = 2.0 * m.c_aadag + 1.0;
    RealMoments {
        x_mean: 2.0 * m.a_mean.re,
        p_mean: 2.0 * m.a_mean.im,
        v_x: base + 2.0 * m.v_a.re,
        v_p: base - 2.0 * m.v_a.re,
        c_xp: 2.0 * m.v_a.im,
    }
}

pub fn to_complex(m: &RealMoments) -> ComplexMoments {
    ComplexMoments {
        a_mean: Complex64::new(0.5 * m.x_mean, 0.5 * m.p_mean),
        v_a: Complex64::new(0.25 * (m.v_x - m.v_p), 0.5 * m.c_xp),
        c_aadag: 0.25 * (m.v_x + m.v_p - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_maps_to_unit_variances() {
        let r = to_real(&ComplexMoments::vacuum());
        assert_eq!(
            r,
            RealMoments {
                x_mean: 0.0,
                p_mean: 0.0,
                v_x: 1.0,
                v_p: 1.0,
                c_xp: 0.0
            }
        );
    }

    #[test]
    fn thermal_variances() {
        let n = 0.37;
        let r = to_real(&ComplexMoments::thermal(n));
        assert_eq!(r.v_x, 2.0 * n + 1.0);
        assert_eq!(r.v_p, 2.0 * n + 1.0);
        assert_eq!(r.c_xp, 0.0);
    }

    #[test]
    fn sub_vacuum_state_is_rejected() {
        let m = RealMoments {
            x_mean: 0.0,
            p_mean: 0.0,
            v_x: 0.5,
            v_p: 1.0,
            c_xp: 0.0,
        };
        assert!(matches!(m.check_physical(), Err(Error::Unphysical { .. })));
    }

    proptest! {
        #[test]
        fn round_trip(
            ar in -10.0f64..10.0, ai in -10.0f64..10.0,
            r in 0.0f64..2.0, th in 0.0f64..6.3, n in 0.0f64..5.0
        ) {
            // Squeezed thermal: V_a = -(2n+1) e^{iθ} sinh r cosh r, C = (2n+1) sinh² r + n
            let nu = 2.0 * n + 1.0;
            let m = ComplexMoments {
                a_mean: Complex64::new(ar, ai),
                v_a: -nu * r.sinh() * r.cosh() * Complex64::from_polar(1.0, th),
                c_aadag: nu * r.sinh().powi(2) + n,
            };
            let back = to_complex(&to_real(&m));
            prop_assert!((back.a_mean - m.a_mean).norm() < 1e-14 * (1.0 + m.a_mean.norm()));
            prop_assert!((back.v_a - m.v_a).norm() < 1e-14 * (1.0 + m.v_a.norm()));
            prop_assert!((back.c_aadag - m.c_aadag).abs() < 1e-14 * (1.0 + m.c_aadag));
            let real = to_real(&m);
            prop_assert!((real.det() - nu * nu).abs() < 1e-9 * nu * nu * (2.0 * r).cosh().powi(2));
        }
    }
}
