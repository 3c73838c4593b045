//! Orthogonal polynomials and terminating hypergeometric sums.
//!
//! The Jacobi parameters that show up in curved space are non-classical: the
//! second one is large, negative or complex depending on the curvature. Gamma
//! function closed forms have poles there, so everything here is evaluated by
//! three-term recurrences or by finite Pochhammer sums, in complex arithmetic
//! where the parameters can be complex.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

fn check_finite(value: C64, degree: usize, parameters: impl FnOnce() -> String) -> Result<C64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            degree,
            parameters: parameters(),
        })
    }
}

/// Jacobi polynomial `P_m^(alpha, nu)(x)` for arbitrary complex parameters.
pub fn jacobi_poly(m: usize, alpha: C64, nu: C64, x: C64) -> Result<C64> {
    jacobi_poly_t(m, alpha, nu, (C64::new(1.0, 0.0) - x) * 0.5)
}

/// Jacobi polynomial in the shifted variable `t = (1 - x)/2`.
///
/// The recurrence coefficients are rearranged so that nothing cancels near
/// `x = 1`, where the flat-space limit and the small-`r` region live.
pub fn jacobi_poly_t(m: usize, alpha: C64, nu: C64, t: C64) -> Result<C64> {
    let params = || format!("alpha={alpha}, nu={nu}, t={t}");
    if m == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let s = alpha + nu;
    let p1 = (alpha + 1.0) - (s + 2.0) * t;
    if m == 1 {
        return check_finite(p1, m, params);
    }

    // Degenerate parameter sums zero out the leading recurrence coefficient;
    // the explicit sum is still well defined there.
    let degenerate = (2..=m).any(|k| {
        let k = k as f64;
        (s + k).norm() < 1e-10 || (s + 2.0 * k - 2.0).norm() < 1e-10
    });
    if degenerate {
        return jacobi_poly_series(m, alpha, nu, t);
    }

    let mut prev = C64::new(1.0, 0.0);
    let mut cur = p1;
    for k in 2..=m {
        let kf = k as f64;
        let two_k_s = s + 2.0 * kf;
        let denom = 2.0 * kf * (s + kf) * (two_k_s - 2.0);
        // (2k+s)(2k+s-2) x + alpha^2 - nu^2 with x = 1 - 2t, expanded exactly
        let linear = 4.0 * kf * (kf - 1.0) + 2.0 * s * (alpha + 2.0 * kf - 1.0)
            - 2.0 * t * two_k_s * (two_k_s - 2.0);
        let a = (two_k_s - 1.0) * linear;
        let b = 2.0 * (alpha + kf - 1.0) * (nu + kf - 1.0) * two_k_s;
        let next = (a * cur - b * prev) / denom;
        prev = cur;
        cur = next;
    }
    check_finite(cur, m, params)
}

/// `P_m^(alpha,nu)` through `(alpha+1)_m/m! * 2F1(-m, m+alpha+nu+1; alpha+1; t)`.
fn jacobi_poly_series(m: usize, alpha: C64, nu: C64, t: C64) -> Result<C64> {
    let hyper = gauss2f1_terminating(m, alpha + nu + (m as f64) + 1.0, alpha + 1.0, t)?;
    let mut pref = C64::new(1.0, 0.0);
    for j in 0..m {
        pref *= (alpha + 1.0 + j as f64) / (j as f64 + 1.0);
    }
    check_finite(pref * hyper, m, || format!("alpha={alpha}, nu={nu}, t={t}"))
}

/// Associated Laguerre polynomial `L_m^alpha(x)`.
pub fn laguerre_poly(m: usize, alpha: f64, x: f64) -> Result<f64> {
    let mut prev = 1.0;
    if m == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + alpha - x;
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + alpha - x) * cur - (kf - 1.0 + alpha) * prev) / kf;
        prev = cur;
        cur = next;
    }
    if cur.is_finite() {
        Ok(cur)
    } else {
        Err(Error::Overflow {
            degree: m,
            parameters: format!("alpha={alpha}, x={x}"),
        })
    }
}

/// `2F1(-m, b; c; z)` as the exact sum of `m + 1` terms.
pub fn gauss2f1_terminating(m: usize, b: C64, c: C64, z: C64) -> Result<C64> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for j in 0..m {
        let jf = j as f64;
        let cj = c + jf;
        if cj.norm() == 0.0 {
            return Err(Error::Parameter(format!(
                "c = {c} gives a zero denominator at term {}",
                j + 1
            )));
        }
        term *= (jf - m as f64) * (b + jf) / (cj * (jf + 1.0)) * z;
        sum += term;
    }
    check_finite(sum, m, || format!("b={b}, c={c}, z={z}"))
}

/// `1F1(-m; c; z)` as the exact sum of `m + 1` terms.
pub fn kummer1f1_terminating(m: usize, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = term;
    for j in 0..m {
        let jf = j as f64;
        if c + jf == 0.0 {
            return Err(Error::Parameter(format!(
                "c = {c} gives a zero denominator at term {}",
                j + 1
            )));
        }
        term *= (jf - m as f64) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(Error::Overflow {
            degree: m,
            parameters: format!("c={c}, z={z}"),
        })
    }
}

/// `|P_m^(alpha,nu)(1 - 2x/nu) - L_m^alpha(x)|`, which vanishes as `nu -> infinity`.
pub fn jacobi_laguerre_limit_gap(m: usize, alpha: f64, nu: f64, x: f64) -> Result<f64> {
    let jac = jacobi_poly_t(
        m,
        C64::new(alpha, 0.0),
        C64::new(nu, 0.0),
        C64::new(x / nu, 0.0),
    )?;
    let lag = laguerre_poly(m, alpha, x)?;
    Ok((jac.re - lag).abs())
}

/// Generalized binomial `binom(m + alpha, m) = (alpha+1)_m / m!`.
pub fn binomial_shifted(m: usize, alpha: f64) -> f64 {
    (0..m).fold(1.0, |acc, j| {
        acc * (alpha + 1.0 + j as f64) / (j as f64 + 1.0)
    })
}
