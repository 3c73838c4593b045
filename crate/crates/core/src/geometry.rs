//! Curved trigonometry for three-dimensional spaces of constant curvature.
//!
//! The functions `S_k`, `C_k` and `T_k` interpolate between the spherical
//! (`k > 0`), euclidean (`k = 0`) and hyperbolic (`k < 0`) cases:
//!
//! | k     | `S_k(r)`            | `C_k(r)`       |
//! |-------|---------------------|----------------|
//! | `> 0` | `sin(sqrt(k) r)/sqrt(k)`   | `cos(sqrt(k) r)`  |
//! | `= 0` | `r`                 | `1`            |
//! | `< 0` | `sinh(sqrt(-k) r)/sqrt(-k)`| `cosh(sqrt(-k) r)`|
//!
//! When `|k| r^2` is tiny the closed forms lose digits to cancellation, so a
//! short Taylor series in `k r^2` is used instead. This also makes every
//! function continuous across `k = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `|k| r^2` the series branch is used.
pub const SERIES_SWITCH: f64 = 1e-8;

/// Classification by the sign of the curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Spherical,
    Euclidean,
    Hyperbolic,
}

/// Signed constant curvature `k`, in inverse squared internal length units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Curvature(f64);

impl Curvature {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() {
            Ok(Curvature(kappa))
        } else {
            Err(Error::NonFiniteCurvature(kappa))
        }
    }

    pub const fn flat() -> Self {
        Curvature(0.0)
    }

    /// Curvature of a sphere (`sign = +1`) or hyperbolic space (`sign = -1`)
    /// with the given radius.
    pub fn from_radius(radius: f64, hyperbolic: bool) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "curvature radius must be positive, got {radius}"
            )));
        }
        let k = 1.0 / (radius * radius);
        Curvature::new(if hyperbolic { -k } else { k })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn geometry(self) -> Geometry {
        if self.0 > 0.0 {
            Geometry::Spherical
        } else if self.0 < 0.0 {
            Geometry::Hyperbolic
        } else {
            Geometry::Euclidean
        }
    }

    /// Curvature radius `1/sqrt(|k|)`; `None` for flat space.
    pub fn radius(self) -> Option<f64> {
        if self.0 == 0.0 {
            None
        } else {
            Some(1.0 / self.0.abs().sqrt())
        }
    }

    /// Antipodal distance `pi/sqrt(k)` for the sphere, `None` otherwise.
    pub fn domain_end(self) -> Option<f64> {
        if self.0 > 0.0 {
            Some(PI / self.0.sqrt())
        } else {
            None
        }
    }

    /// Principal square root of `-k`: real for `k < 0`, imaginary for `k > 0`.
    pub fn sqrt_neg(self) -> Complex64 {
        if self.0 <= 0.0 {
            Complex64::new((-self.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, self.0.sqrt())
        }
    }
}

impl From<Curvature> for f64 {
    fn from(k: Curvature) -> f64 {
        k.0
    }
}

fn check_domain(kappa: Curvature, r: f64) -> Result<()> {
    let end = kappa.domain_end();
    let beyond = match end {
        Some(e) => r > e * (1.0 + 4.0 * f64::EPSILON),
        None => false,
    };
    if !(r >= 0.0) || !r.is_finite() || beyond {
        return Err(Error::Domain {
            kappa: kappa.value(),
            r,
            end: end.unwrap_or(f64::INFINITY),
        });
    }
    Ok(())
}

pub(crate) fn sin_raw(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_SWITCH {
        r * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)))
    } else if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * r).sin() / s
    } else {
        let s = (-kappa).sqrt();
        (s * r).sinh() / s
    }
}

pub(crate) fn cos_raw(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_SWITCH {
        1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0))
    } else if kappa > 0.0 {
        (kappa.sqrt() * r).cos()
    } else {
        ((-kappa).sqrt() * r).cosh()
    }
}

/// `C_k(r) / S_k(r)` without domain checks.
pub(crate) fn cot_raw(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_SWITCH {
        // 1/T = (1/r)(1 - x/3 - x^2/45 - 2x^3/945)
        (1.0 - x / 3.0 * (1.0 + x / 15.0 * (1.0 + 2.0 * x / 21.0))) / r
    } else if kappa > 0.0 {
        let s = kappa.sqrt();
        s / (s * r).tan()
    } else {
        let s = (-kappa).sqrt();
        s / (s * r).tanh()
    }
}

/// Curved sine `S_k(r)`.
pub fn curved_sin(kappa: Curvature, r: f64) -> Result<f64> {
    check_domain(kappa, r)?;
    Ok(sin_raw(kappa.value(), r))
}

/// Curved cosine `C_k(r)`, the derivative of `S_k`.
pub fn curved_cos(kappa: Curvature, r: f64) -> Result<f64> {
    check_domain(kappa, r)?;
    Ok(cos_raw(kappa.value(), r))
}

/// Curved tangent `T_k = S_k / C_k`.
pub fn curved_tan(kappa: Curvature, r: f64) -> Result<f64> {
    check_domain(kappa, r)?;
    if r == 0.0 {
        return Err(Error::Pole {
            function: "curved_tan",
            kappa: kappa.value(),
            r,
        });
    }
    let c = cos_raw(kappa.value(), r);
    // cos(sqrt(k) r) only vanishes on the sphere at the equator r = pi/(2 sqrt(k))
    if c.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::Pole {
            function: "curved_tan",
            kappa: kappa.value(),
            r,
        });
    }
    Ok(sin_raw(kappa.value(), r) / c)
}

/// Reciprocal curved tangent `1/T_k(r)`, the variable that removes the
/// first-derivative term of the radial equation.
pub fn curved_cot(kappa: Curvature, r: f64) -> Result<f64> {
    check_domain(kappa, r)?;
    let at_antipode = kappa
        .domain_end()
        .is_some_and(|e| (e - r).abs() <= 4.0 * f64::EPSILON * e);
    if r == 0.0 || at_antipode {
        return Err(Error::Pole {
            function: "curved_cot",
            kappa: kappa.value(),
            r,
        });
    }
    Ok(cot_raw(kappa.value(), r))
}

/// Radial volume element `S_k(r)^2`.
pub fn volume_weight(kappa: Curvature, r: f64) -> Result<f64> {
    let s = curved_sin(kappa, r)?;
    Ok(s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(v: f64) -> Curvature {
        Curvature::new(v).unwrap()
    }

    // Independent oracles: plain Taylor sums of sinh and cosh.
    fn sinh_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = 0.0;
        for j in 0..40 {
            sum += term;
            term *= x * x / (((2 * j + 2) * (2 * j + 3)) as f64);
        }
        sum
    }

    fn cosh_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 0..40 {
            sum += term;
            term *= x * x / (((2 * j + 1) * (2 * j + 2)) as f64);
        }
        sum
    }

    #[test]
    fn sin_examples() {
        assert_eq!(curved_sin(k(0.0), 2.0).unwrap(), 2.0);
        assert!((curved_sin(k(1.0), PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        let v = curved_sin(k(-1.0), 1.0).unwrap();
        assert!((v - sinh_series(1.0)).abs() < 1e-15);
        assert!((v - 1.175_201_193_6).abs() < 1e-10);
    }

    #[test]
    fn cos_examples() {
        assert_eq!(curved_cos(k(0.0), 5.0).unwrap(), 1.0);
        assert!((curved_cos(k(1.0), PI).unwrap() + 1.0).abs() < 1e-15);
        let v = curved_cos(k(-1.0), 1.0).unwrap();
        assert!((v - cosh_series(1.0)).abs() < 1e-15);
        assert!((v - 1.543_080_634_8).abs() < 1e-10);
    }

    #[test]
    fn tan_cot_examples() {
        assert!((curved_tan(k(1.0), PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((curved_cot(k(0.0), 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        let expected = 0.1 * cosh_series(1.0) / sinh_series(1.0);
        let v = curved_cot(k(-0.01), 10.0).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.131_303_5).abs() < 1e-7);
    }

    #[test]
    fn volume_weight_examples() {
        assert_eq!(volume_weight(k(0.0), 2.0).unwrap(), 4.0);
        assert!((volume_weight(k(1.0), PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        let s = sinh_series(1.0);
        assert!((volume_weight(k(-1.0), 1.0).unwrap() - s * s).abs() < 1e-14);
        assert!((s * s - 1.381_097_8).abs() < 1e-7);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            curved_sin(k(1.0), -0.1),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(curved_cos(k(1.0), 3.2), Err(Error::Domain { .. })));
        // antipode is allowed for S and C, but is a pole of the cotangent
        assert!(curved_sin(k(1.0), PI).is_ok());
        assert!(matches!(curved_cot(k(1.0), PI), Err(Error::Pole { .. })));
        assert!(matches!(curved_cot(k(-1.0), 0.0), Err(Error::Pole { .. })));
        assert!(matches!(
            curved_tan(k(1.0), PI / 2.0),
            Err(Error::Pole { .. })
        ));
        assert!(Curvature::new(f64::NAN).is_err());
    }

    #[test]
    fn curvature_radius() {
        let c = k(-0.01);
        assert_eq!(c.geometry(), Geometry::Hyperbolic);
        let r = c.radius().unwrap();
        assert!((r * r * 0.01 - 1.0).abs() < 1e-15);
        assert_eq!(k(0.0).radius(), None);
        assert_eq!(k(4.0).domain_end(), Some(PI / 2.0));
    }

    #[test]
    fn series_branch_is_continuous() {
        // straddle the switch from both sides
        for kappa in [1e-9, -1e-9] {
            let r_below = (0.99 * SERIES_SWITCH / 1e-9_f64).sqrt();
            let r_above = (1.01 * SERIES_SWITCH / 1e-9_f64).sqrt();
            for r in [r_below, r_above] {
                let s = sin_raw(kappa, r);
                let exact = if kappa > 0.0 {
                    (kappa.sqrt() * r).sin() / kappa.sqrt()
                } else {
                    ((-kappa).sqrt() * r).sinh() / (-kappa).sqrt()
                };
                assert!((s - exact).abs() <= 1e-14 * r);
            }
        }
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let kappa = k(0.3);
        let r = 1.1;
        let c = curved_cos(kappa, r).unwrap();
        let fd = |h: f64| {
            (curved_sin(kappa, r + h).unwrap() - curved_sin(kappa, r - h).unwrap()) / (2.0 * h)
        };
        let e1 = (fd(1e-3) - c).abs();
        let e2 = (fd(5e-4) - c).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn pythagorean_identity(kappa in -4.0f64..4.0, t in 0.0f64..1.0) {
            let c = k(kappa);
            let r = match c.domain_end() { Some(e) => t * e, None => 3.0 * t };
            let s = curved_sin(c, r).unwrap();
            let co = curved_cos(c, r).unwrap();
            prop_assert!((co * co + kappa * s * s - 1.0).abs() <= 1e-13 * (1.0 + co * co));
        }

        #[test]
        fn flat_continuity(kappa in -1e-3f64..1e-3, r in 0.0f64..10.0) {
            prop_assume!(kappa.abs() * r * r <= 0.1);
            let s = curved_sin(k(kappa), r).unwrap();
            // sinh and sin tails beyond the cubic term add at most x^2/10 of it
            let x2 = kappa.abs() * r * r;
            let bound = kappa.abs() * r.powi(3) / 6.0 * (1.0 + x2 / 10.0) * (1.0 + 1e-12) + 1e-15 * r;
            prop_assert!((s - r).abs() <= bound);
        }

        #[test]
        fn cot_times_tan(kappa in -2.0f64..2.0, t in 0.01f64..0.99) {
            let c = k(kappa);
            let r = match c.domain_end() { Some(e) => t * e, None => 5.0 * t };
            if let (Ok(tn), Ok(ct)) = (curved_tan(c, r), curved_cot(c, r)) {
                prop_assume!(tn.abs() < 1e6 && ct.abs() < 1e6);
                prop_assert!((tn * ct - 1.0).abs() <= 1e-12);
            }
        }
    }
}
