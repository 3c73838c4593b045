//! Finite-difference eigensolver for the radial equation.
//!
//! Substituting `u = S_k(r) G(r)` and using `S'' = -k S` turns the radial
//! equation into
//!
//! ```text
//! -u'' + [l(l+1)/S_k^2 + U_k] u = (lambda + k) u,    U_k = -beta cot_k(r),
//! ```
//!
//! which is discretized with the 3-point Laplacian on the interior points
//! `r_i = i h`, `i = 1..N`, with `u = 0` at both ends. The `-k` shift is folded
//! into the diagonal so eigenvalues of the matrix are `lambda` directly.
//! Eigenvalues come from Sturm-count bisection, eigenvectors from inverse
//! iteration. Nothing here depends on the closed-form solution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, QuantumNumbers};
use crate::error::{Error, Result};
use crate::geometry::{self, Curvature};
use crate::units::UnitScales;

/// Bisection stops once the bracket is narrower than this.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-12;

/// Relative eigenvalue error accepted by [`validate`].
pub const EIGENVALUE_ACCEPT: f64 = 1e-6;
/// ODE residual accepted by [`validate`].
pub const RESIDUAL_ACCEPT: f64 = 1e-8;

const MAX_INVERSE_ITERATIONS: usize = 8;

const D1: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];
const D2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Coulomb potential in eigenvalue units, `U = -beta cot_k(r)`.
pub fn potential(kappa: Curvature, r: f64, scales: &UnitScales) -> Result<f64> {
    Ok(-scales.beta() * geometry::curved_cot(kappa, r)?)
}

/// Bottom of the continuum: `s^2 - beta s` with `s = sqrt(-k)` for `k < 0`,
/// zero in flat space, none on the sphere.
pub fn continuum_threshold(kappa: Curvature, scales: &UnitScales) -> Option<f64> {
    let k = kappa.value();
    if k > 0.0 {
        None
    } else if k == 0.0 {
        Some(0.0)
    } else {
        let s = (-k).sqrt();
        Some(s * s - scales.beta() * s)
    }
}

/// Symmetric tridiagonal matrix of one `(k, l)` channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub kappa: Curvature,
    pub l: u32,
    pub h: f64,
    /// Right Dirichlet end.
    pub r_max: f64,
    pub diagonal: Vec<f64>,
    /// Constant off-diagonal, `-1/h^2`.
    pub off_diagonal: f64,
    pub threshold: Option<f64>,
    /// True when the sphere was cut before the antipode.
    pub truncated: bool,
}

impl Discretization {
    /// Builds the operator on `n_points` interior points of `(0, r_max)`.
    ///
    /// On the sphere `r_max` is clamped to the antipode `pi/sqrt(k)`;
    /// `None` means the whole sphere (required to be `Some` otherwise).
    pub fn build(
        kappa: Curvature,
        l: u32,
        n_points: usize,
        r_max: Option<f64>,
        scales: &UnitScales,
    ) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::InvalidDomain(format!(
                "need at least 4 interior points, got {n_points}"
            )));
        }
        let natural = kappa.domain_end();
        let (end, truncated) = match (r_max, natural) {
            (Some(r), _) if !(r.is_finite() && r > 0.0) => {
                return Err(Error::InvalidDomain(format!(
                    "r_max must be positive and finite, got {r}"
                )))
            }
            (Some(r), Some(e)) if r < e => (r, true),
            (_, Some(e)) => (e, false),
            (Some(r), None) => (r, false),
            (None, None) => {
                return Err(Error::InvalidDomain(
                    "r_max is required without positive curvature".into(),
                ))
            }
        };
        let h = end / (n_points + 1) as f64;
        let k = kappa.value();
        let ll = (l * (l + 1)) as f64;
        let beta = scales.beta();
        let inv_h2 = 1.0 / (h * h);
        let diagonal = (1..=n_points)
            .map(|i| {
                let r = i as f64 * h;
                let s = geometry::sin_raw(k, r);
                let u = -beta * geometry::cot_raw(k, r);
                2.0 * inv_h2 + ll / (s * s) + u - k
            })
            .collect();
        Ok(Discretization {
            kappa,
            l,
            h,
            r_max: end,
            diagonal,
            off_diagonal: -inv_h2,
            threshold: continuum_threshold(kappa, scales),
            truncated,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Radius of interior point `i` (zero-based).
    pub fn point(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let e = self.off_diagonal.abs();
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &d) in self.diagonal.iter().enumerate() {
            let radius = if n == 1 {
                0.0
            } else if i == 0 || i + 1 == n {
                e
            } else {
                2.0 * e
            };
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }
}

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(d: &Discretization, lambda: f64) -> usize {
    let e2 = d.off_diagonal * d.off_diagonal;
    let guard = f64::EPSILON * (d.off_diagonal.abs() + 1.0);
    let mut count = 0;
    let mut q = 1.0;
    for (i, &di) in d.diagonal.iter().enumerate() {
        q = if i == 0 {
            di - lambda
        } else {
            (di - lambda) - e2 / q
        };
        if q == 0.0 {
            q = -guard;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_index(d: &Discretization, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: count(lo) <= j < count(hi)
    while hi - lo > EIGENVALUE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `k` lowest eigenvalues, ascending.
pub fn eigenvalues(d: &Discretization, k: usize) -> Vec<f64> {
    let k = k.min(d.len());
    let (lo0, hi0) = d.gershgorin();
    let hi0 = hi0 + 1.0;
    let mut out = Vec::with_capacity(k);
    let mut lo = lo0 - 1.0;
    for j in 0..k {
        let lam = bisect_index(d, j, lo, hi0);
        out.push(lam);
        lo = lo.max(lam - 2.0 * EIGENVALUE_TOLERANCE);
    }
    out
}

/// Second-order Richardson extrapolation from steps `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        return fine;
    }
    (4.0 * fine - coarse) / 3.0
}

/// Solves `(T - shift) x = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted(d: &Discretization, shift: f64, rhs: &mut [f64]) {
    let n = d.len();
    let e = d.off_diagonal;
    let tiny = f64::EPSILON * (d.off_diagonal.abs() + 1.0);
    let mut dd: Vec<f64> = d.diagonal.iter().map(|&x| x - shift).collect();
    let mut du = vec![e; n.saturating_sub(1)];
    let mut dl = vec![e; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i] == 0.0 {
                dd[i] = tiny;
            }
            let fact = dl[i] / dd[i];
            dd[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
            dl[i] = 0.0;
        } else {
            let fact = dd[i] / dl[i];
            dd[i] = dl[i];
            let temp = dd[i + 1];
            dd[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            let t = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = t - fact * rhs[i + 1];
        }
    }
    if dd[n - 1] == 0.0 {
        dd[n - 1] = tiny;
    }
    rhs[n - 1] /= dd[n - 1];
    if n > 1 {
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / dd[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - dl[i] * rhs[i + 2]) / dd[i];
    }
}

/// Eigenvector of `d` for eigenvalue `lambda` by inverse iteration.
///
/// Returned with unit Euclidean norm and positive near the origin.
pub fn eigenfunction(d: &Discretization, lambda: f64) -> Result<Vec<f64>> {
    let n = d.len();
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin())
        .collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let mut y = x.clone();
        solve_shifted(d, lambda, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let overlap: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        x = y;
        if 1.0 - overlap.abs() < 1e-13 {
            let max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let sign = x
                .iter()
                .find(|v| v.abs() > 1e-6 * max)
                .map_or(1.0, |v| v.signum());
            x.iter_mut().for_each(|v| *v *= sign);
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_INVERSE_ITERATIONS,
    })
}

/// Sign changes of an eigenvector, ignoring samples below `1e-6` of the peak.
pub fn node_count(u: &[f64]) -> usize {
    let max = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &v in u {
        if v.abs() < 1e-6 * max {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}

fn radial_lhs(
    kappa: f64,
    l: u32,
    lambda: f64,
    beta: f64,
    r: f64,
    g: [Complex64; 9],
    h: f64,
) -> (Complex64, f64) {
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d2 = Complex64::new(0.0, 0.0);
    for j in 0..9 {
        d1 += D1[j] * g[j];
        d2 += D2[j] * g[j];
    }
    d1 /= h;
    d2 /= h * h;
    let s = geometry::sin_raw(kappa, r);
    let cot = geometry::cot_raw(kappa, r);
    let u = -beta * cot;
    let ll = (l * (l + 1)) as f64;
    let lhs = -d2 - 2.0 * cot * d1 + (ll / (s * s) + u - lambda) * g[4];
    (lhs, lambda.abs() + u.abs())
}

/// Relative residual of the radial equation for a closed-form `f` at `probes`.
///
/// Derivatives use 9-point stencils with a local step that keeps the stencil
/// inside the domain; `|LHS|` is scaled by `max|G| (|lambda| + |U(r)|)`.
pub fn ode_residual_fn<F>(
    kappa: Curvature,
    l: u32,
    lambda: f64,
    f: F,
    probes: &[f64],
    scales: &UnitScales,
) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let k = kappa.value();
    let end = kappa.domain_end().unwrap_or(f64::INFINITY);
    let beta = scales.beta();
    let base_h = 1e-2 * scales.bohr_radius;
    let mut max_g = 0.0f64;
    let mut pending = Vec::with_capacity(probes.len());
    for &r in probes {
        if !(r > 0.0 && r < end) {
            return Err(Error::InvalidDomain(format!("probe {r} not interior")));
        }
        let h = base_h.min(r / 8.0).min((end - r) / 8.0);
        let mut g = [Complex64::new(0.0, 0.0); 9];
        for (j, slot) in g.iter_mut().enumerate() {
            *slot = f(r + (j as f64 - 4.0) * h)?;
        }
        max_g = max_g.max(g[4].norm());
        pending.push(radial_lhs(k, l, lambda, beta, r, g, h));
    }
    if max_g == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(pending
        .into_iter()
        .map(|(lhs, scale)| lhs.norm() / (max_g * scale))
        .fold(0.0, f64::max))
}

/// Relative residual of the radial equation for a tabulated `G`.
///
/// The table grid must be uniform; four points are skipped at each end so the
/// stencils stay inside the table and away from the singular endpoints.
pub fn ode_residual(
    kappa: Curvature,
    l: u32,
    lambda: f64,
    table: &analytic::RadialFunctionTable,
    scales: &UnitScales,
) -> Result<f64> {
    let grid = &table.grid;
    let n = grid.len();
    if n < 11 || table.values.len() != n {
        return Err(Error::InvalidDomain(
            "residual needs at least 11 samples".into(),
        ));
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    if !uniform {
        return Err(Error::InvalidDomain("residual needs a uniform grid".into()));
    }
    let k = kappa.value();
    let end = kappa.domain_end().unwrap_or(f64::INFINITY);
    let beta = scales.beta();
    let max_g = table.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_g == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut worst = 0.0f64;
    for i in 4..n - 4 {
        let r = grid[i];
        if !(r > 0.0 && r < end) {
            continue;
        }
        let mut g = [Complex64::new(0.0, 0.0); 9];
        for (j, slot) in g.iter_mut().enumerate() {
            *slot = Complex64::new(table.values[i + j - 4], 0.0);
        }
        let (lhs, scale) = radial_lhs(k, l, lambda, beta, r, g, h);
        worst = worst.max(lhs.norm() / (max_g * scale));
    }
    Ok(worst)
}

/// Number of discrete levels below the hyperbolic continuum in channel `l`.
///
/// The Dirichlet radius doubles from 50 a1 at fixed step until the count is
/// unchanged over two consecutive doublings.
pub fn count_bound_states(kappa: Curvature, l: u32, scales: &UnitScales) -> Result<usize> {
    let threshold = match continuum_threshold(kappa, scales) {
        Some(t) if kappa.value() < 0.0 => t,
        _ => {
            return Err(Error::Parameter(
                "bound-state counting needs negative curvature".into(),
            ))
        }
    };
    let h = 0.05 * scales.bohr_radius;
    let mut r_max = 50.0 * scales.bohr_radius;
    let mut history: Vec<usize> = Vec::new();
    for _ in 0..12 {
        let n_points = (r_max / h).round() as usize - 1;
        let d = Discretization::build(kappa, l, n_points, Some(r_max), scales)?;
        let count = sturm_count(&d, threshold - 1e-9);
        history.push(count);
        if history.len() >= 3 && history[history.len() - 3..].iter().all(|&c| c == count) {
            return Ok(count);
        }
        r_max *= 2.0;
    }
    Err(Error::NonStabilization { r_max })
}

/// Matrix of curvatures and levels to cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPlan {
    /// Dimensionless curvatures `k a1^2`.
    pub kappas: Vec<f64>,
    pub n_max: u32,
    /// Restrict to one angular momentum.
    pub l: Option<u32>,
    /// Interior points of the coarse grid; the fine grid has `2N + 1`.
    pub grid_n: Option<usize>,
    /// Dirichlet radius in units of a1.
    pub r_max: Option<f64>,
    /// Samples of the analytic table used for the residual.
    pub residual_points: usize,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        ValidationPlan {
            kappas: vec![0.0, 1e-2, 1e-4, -1e-4, -1e-2],
            n_max: 4,
            l: None,
            grid_n: None,
            r_max: None,
            residual_points: 4001,
        }
    }
}

/// One level of a validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: u32,
    pub l: u32,
    /// Dimensionless curvature.
    pub kappa: f64,
    pub lambda_analytic: f64,
    pub lambda_numeric: f64,
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    pub relative_error: f64,
    /// Ratio of raw errors on the coarse and fine grids, ideally 4.
    pub convergence_ratio: f64,
    pub convergence_order: f64,
    /// Nodes of the numerical eigenvector.
    pub node_count: usize,
    /// Nodes of the analytic table.
    pub analytic_node_count: usize,
    pub residual: f64,
    pub imaginary_fraction: f64,
}

impl LevelRecord {
    pub fn passes(&self) -> bool {
        self.relative_error <= EIGENVALUE_ACCEPT
            && self.residual <= RESIDUAL_ACCEPT
            && self.node_count == (self.n - self.l - 1) as usize
            && self.analytic_node_count == (self.n - self.l - 1) as usize
    }
}

/// Grid used for one `(k, l)` channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    pub kappa: f64,
    pub l: u32,
    pub n_points: usize,
    pub fine_points: usize,
    pub r_max: f64,
    pub h: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub records: Vec<LevelRecord>,
    pub grids: Vec<ChannelGrid>,
    /// How `lambda_numeric` was obtained.
    pub extrapolation: String,
}

impl SpectralReport {
    pub fn passes(&self) -> bool {
        self.records.iter().all(LevelRecord::passes)
    }
}

/// Relative error of `numeric` against `exact`.
pub fn relative_error(exact: f64, numeric: f64) -> f64 {
    (numeric - exact).abs() / exact.abs()
}

/// Dirichlet radius that holds the slowest-decaying level of a channel.
///
/// `max(60, 6 n^2) a1`, widened to `18/d` where `d` is the decay rate of `u`
/// at the continuum edge, so near-threshold hyperbolic states fit too.
pub fn default_r_max(kappa: Curvature, levels: &[u32], scales: &UnitScales) -> f64 {
    let a1 = scales.bohr_radius;
    let n_top = levels.iter().copied().max().unwrap_or(1) as f64;
    let mut r = (60.0 * a1).max(6.0 * n_top * n_top * a1);
    if let Some(threshold) = continuum_threshold(kappa, scales) {
        for &n in levels {
            let gap = threshold - analytic::lambda_n(n, kappa, scales);
            if gap > 0.0 {
                r = r.max(18.0 / gap.sqrt());
            }
        }
    }
    r
}

/// Default interior point count: 6000, or step `0.016 a1` on large domains.
pub fn default_grid_n(r_max: f64, scales: &UnitScales) -> usize {
    6000usize.max((r_max / (0.016 * scales.bohr_radius)).ceil() as usize)
}

fn validate_channel(
    kappa_dimless: f64,
    l: u32,
    levels: &[u32],
    plan: &ValidationPlan,
    scales: &UnitScales,
) -> Result<(ChannelGrid, Vec<LevelRecord>)> {
    let kappa = Curvature::new(scales.kappa_from_dimensionless(kappa_dimless))?;
    let r_max = match plan.r_max {
        Some(r) => r * scales.bohr_radius,
        None => default_r_max(kappa, levels, scales),
    };
    let n_coarse = plan.grid_n.unwrap_or_else(|| default_grid_n(r_max, scales));
    let coarse = Discretization::build(kappa, l, n_coarse, Some(r_max), scales)?;
    let fine = Discretization::build(kappa, l, 2 * n_coarse + 1, Some(r_max), scales)?;
    let count = levels.len();
    let lam_c = eigenvalues(&coarse, count);
    let lam_f = eigenvalues(&fine, count);
    let grid = ChannelGrid {
        kappa: kappa_dimless,
        l,
        n_points: n_coarse,
        fine_points: fine.len(),
        r_max: coarse.r_max,
        h: coarse.h,
        truncated: coarse.truncated,
    };
    let mut records = Vec::with_capacity(count);
    for (j, &n) in levels.iter().enumerate() {
        let qn = QuantumNumbers::new(n, l)?;
        let exact = analytic::lambda_n(n, kappa, scales);
        let numeric = richardson(lam_c[j], lam_f[j]);
        let ratio = (lam_c[j] - exact) / (lam_f[j] - exact);
        let u = eigenfunction(&fine, lam_f[j])?;
        let table_grid = analytic::default_grid(qn, kappa, scales, plan.residual_points);
        let table = analytic::radial_wavefunction(qn, kappa, scales, &table_grid)?;
        let residual = ode_residual(kappa, l, exact, &table, scales)?;
        records.push(LevelRecord {
            n,
            l,
            kappa: kappa_dimless,
            lambda_analytic: exact,
            lambda_numeric: numeric,
            lambda_coarse: lam_c[j],
            lambda_fine: lam_f[j],
            relative_error: relative_error(exact, numeric),
            convergence_ratio: ratio,
            convergence_order: ratio.abs().log2(),
            node_count: node_count(&u),
            analytic_node_count: table.node_count(),
            residual,
            imaginary_fraction: table.imaginary_fraction,
        });
    }
    Ok((grid, records))
}

/// Solves every `(k, l)` channel of `plan` numerically and compares with the
/// closed form. Channels run in parallel; output order follows the plan.
pub fn validate(plan: &ValidationPlan, scales: &UnitScales) -> Result<SpectralReport> {
    if plan.kappas.is_empty() || plan.n_max == 0 {
        return Err(Error::Config("validation matrix is empty".into()));
    }
    let mut channels = Vec::new();
    for &k in &plan.kappas {
        let kappa = Curvature::new(scales.kappa_from_dimensionless(k))?;
        let ls: Vec<u32> = match plan.l {
            Some(l) => vec![l],
            None => (0..plan.n_max).collect(),
        };
        for l in ls {
            let levels: Vec<u32> = (l + 1..=plan.n_max)
                .filter(|&n| {
                    QuantumNumbers::new(n, l)
                        .map(|q| analytic::bound_state_admissible(q, kappa, scales))
                        .unwrap_or(false)
                })
                .collect();
            if !levels.is_empty() {
                channels.push((k, l, levels));
            }
        }
    }
    let results: Vec<Result<(ChannelGrid, Vec<LevelRecord>)>> = channels
        .par_iter()
        .map(|(k, l, levels)| validate_channel(*k, *l, levels, plan, scales))
        .collect();
    let mut report = SpectralReport {
        records: Vec::new(),
        grids: Vec::new(),
        extrapolation: "richardson (4 lambda(h/2) - lambda(h)) / 3".into(),
    };
    for r in results {
        let (grid, recs) = r?;
        report.grids.push(grid);
        report.records.extend(recs);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn au() -> UnitScales {
        UnitScales::atomic()
    }

    fn k(v: f64) -> Curvature {
        Curvature::new(v).unwrap()
    }

    #[test]
    fn potential_examples() {
        let u = au();
        assert_eq!(potential(k(0.0), 2.0, &u).unwrap(), -1.0);
        assert!((potential(k(-0.01), 2000.0, &u).unwrap() + 0.2).abs() < 1e-12);
        assert!((potential(k(1.0), 3.0 * PI / 4.0, &u).unwrap() - 2.0).abs() < 1e-12);
        assert!(potential(k(1.0), 0.0, &u).is_err());
        assert!(potential(k(1.0), PI, &u).is_err());
    }

    #[test]
    fn build_small_flat() {
        let d = Discretization::build(k(0.0), 0, 4, Some(1.0), &au()).unwrap();
        assert!((d.h - 0.2).abs() < 1e-15);
        for (i, &r) in [0.2, 0.4, 0.6, 0.8].iter().enumerate() {
            assert!((d.diagonal[i] - (2.0 / 0.04 - 2.0 / r)).abs() < 1e-12);
            assert!((d.point(i) - r).abs() < 1e-15);
        }
        assert_eq!(d.off_diagonal, -1.0 / (d.h * d.h));
        assert_eq!(d.threshold, Some(0.0));
    }

    #[test]
    fn build_sphere_uses_whole_domain() {
        let d = Discretization::build(k(1.0), 1, 100, None, &au()).unwrap();
        assert!((d.r_max - PI).abs() < 1e-15);
        assert!(!d.truncated);
        assert_eq!(d.threshold, None);
    }

    #[test]
    fn build_rejects_bad_input() {
        let u = au();
        assert!(Discretization::build(k(0.0), 0, 3, Some(1.0), &u).is_err());
        assert!(Discretization::build(k(0.0), 0, 10, None, &u).is_err());
        assert!(Discretization::build(k(0.0), 0, 10, Some(-1.0), &u).is_err());
    }

    #[test]
    fn threshold_values() {
        assert!((continuum_threshold(k(-0.01), &au()).unwrap() + 0.19).abs() < 1e-15);
        assert_eq!(continuum_threshold(k(0.0), &au()), Some(0.0));
        assert_eq!(continuum_threshold(k(0.5), &au()), None);
    }

    #[test]
    fn sturm_count_extremes() {
        let d = Discretization::build(k(0.0), 0, 500, Some(40.0), &au()).unwrap();
        let (lo, hi) = d.gershgorin();
        assert_eq!(sturm_count(&d, lo - 1.0), 0);
        assert_eq!(sturm_count(&d, hi + 1.0), d.len());
        assert_eq!(sturm_count(&d, -0.5), 1);
    }

    // dense Jacobi rotation oracle for small symmetric matrices
    fn dense_eigenvalues(d: &Discretization) -> Vec<f64> {
        let n = d.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = d.diagonal[i];
            if i + 1 < n {
                a[i][i + 1] = d.off_diagonal;
                a[i + 1][i] = d.off_diagonal;
            }
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[p][q] * a[p][q];
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..n {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = c * arp - s * arq;
                        a[r][q] = s * arp + c * arq;
                    }
                    for r in 0..n {
                        let apr = a[p][r];
                        let aqr = a[q][r];
                        a[p][r] = c * apr - s * aqr;
                        a[q][r] = s * apr + c * aqr;
                    }
                }
            }
            if off < 1e-30 {
                break;
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }

    #[test]
    fn bisection_matches_dense_solver() {
        for (kv, l) in [(0.0, 0), (0.3, 1), (-0.2, 2)] {
            let d = Discretization::build(k(kv), l, 30, Some(8.0), &au()).unwrap();
            let dense = dense_eigenvalues(&d);
            let bis = eigenvalues(&d, 30);
            for (a, b) in dense.iter().zip(&bis) {
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalues_are_count_fixed_points() {
        let d = Discretization::build(k(0.0), 1, 2000, Some(60.0), &au()).unwrap();
        let ev = eigenvalues(&d, 4);
        for (i, &lam) in ev.iter().enumerate() {
            assert_eq!(sturm_count(&d, lam - 1e-9), i);
            assert_eq!(sturm_count(&d, lam + 1e-9), i + 1);
        }
        assert!(ev.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn flat_ground_state_coarse() {
        let d = Discretization::build(k(0.0), 0, 6000, Some(60.0), &au()).unwrap();
        let lam = eigenvalues(&d, 1)[0];
        assert!((lam + 1.0).abs() < 1e-4);
    }

    #[test]
    fn sphere_ground_state_is_curvature_free() {
        let d = Discretization::build(k(0.04), 0, 6000, Some(96.0), &au()).unwrap();
        let d2 = Discretization::build(k(0.04), 0, 12001, Some(96.0), &au()).unwrap();
        let lam = richardson(eigenvalues(&d, 1)[0], eigenvalues(&d2, 1)[0]);
        assert!((lam + 1.0).abs() < 1e-6);
    }

    #[test]
    fn hyperbolic_three_below_threshold() {
        let d = Discretization::build(k(-0.01), 0, 40000, Some(640.0), &au()).unwrap();
        assert_eq!(sturm_count(&d, -0.19 - 1e-9), 3);
    }

    #[test]
    fn richardson_examples() {
        assert_eq!(richardson(-0.9, -0.9), -0.9);
        assert_eq!(richardson(1.0, 2.0), 7.0 / 3.0);
    }

    #[test]
    fn flat_ground_eigenfunction() {
        let d = Discretization::build(k(0.0), 0, 3000, Some(40.0), &au()).unwrap();
        let lam = eigenvalues(&d, 1)[0];
        let u = eigenfunction(&d, lam).unwrap();
        assert_eq!(node_count(&u), 0);
        assert!(u[0] > 0.0);
        // compare shape with r exp(-r)
        let exact: Vec<f64> = d.points().iter().map(|r| r * (-r).exp()).collect();
        let norm = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gap = u
            .iter()
            .zip(&exact)
            .fold(0.0f64, |a, (x, y)| a.max((x - y / norm).abs()));
        assert!(gap < 1e-3, "{gap}");
    }

    #[test]
    fn eigenfunction_node_theorem() {
        let d = Discretization::build(k(0.01), 1, 3000, Some(80.0), &au()).unwrap();
        for (i, lam) in eigenvalues(&d, 3).into_iter().enumerate() {
            assert_eq!(node_count(&eigenfunction(&d, lam).unwrap()), i);
        }
    }

    #[test]
    fn residual_of_analytic_hyperbolic_state() {
        let u = au();
        let qn = QuantumNumbers::new(2, 0).unwrap();
        let grid = analytic::default_grid(qn, k(-0.01), &u, 4001);
        let t = analytic::radial_wavefunction(qn, k(-0.01), &u, &grid).unwrap();
        let lam = analytic::lambda_n(2, k(-0.01), &u);
        assert!(ode_residual(k(-0.01), 0, lam, &t, &u).unwrap() <= 1e-8);
        // wrong eigenvalue is caught
        let wrong = ode_residual(k(-0.01), 0, lam + 0.05, &t, &u).unwrap();
        assert!(wrong > 1e-3, "{wrong}");
    }

    #[test]
    fn residual_tripwire_wrong_branch() {
        let u = au();
        let qn = QuantumNumbers::new(2, 0).unwrap();
        let lam = analytic::lambda_n(2, k(-0.01), &u);
        let probes: Vec<f64> = (0..64).map(|i| 20.0 * (i as f64 + 0.5) / 64.0).collect();
        let wrong: Vec<_> = analytic::branch_candidates(qn, k(-0.01), &u)
            .unwrap()
            .into_iter()
            .filter(|c| c.terminates && !c.normalizable)
            .collect();
        assert!(!wrong.is_empty());
        for c in wrong {
            let r = ode_residual_fn(k(-0.01), 0, lam, |r| c.data.eval(r), &probes, &u).unwrap();
            assert!(r >= 1e-2, "{r}");
        }
    }

    #[test]
    fn residual_rejects_nonuniform() {
        let u = au();
        let qn = QuantumNumbers::new(1, 0).unwrap();
        let grid: Vec<f64> = (0..20).map(|i| (i as f64).powi(2) * 0.01).collect();
        let t = analytic::radial_wavefunction_flat(qn, &u, &grid).unwrap();
        assert!(ode_residual(k(0.0), 0, -1.0, &t, &u).is_err());
    }

    #[test]
    fn bound_state_counts() {
        let u = au();
        assert_eq!(count_bound_states(k(-0.01), 0, &u).unwrap(), 3);
        assert_eq!(count_bound_states(k(-0.01), 2, &u).unwrap(), 1);
        assert_eq!(count_bound_states(k(-1.0), 0, &u).unwrap(), 0);
        assert!(count_bound_states(k(0.0), 0, &u).is_err());
    }

    #[test]
    fn coarse_validation_shows_order_two() {
        let plan = ValidationPlan {
            kappas: vec![0.0],
            n_max: 2,
            grid_n: Some(200),
            r_max: Some(40.0),
            ..ValidationPlan::default()
        };
        let report = validate(&plan, &au()).unwrap();
        assert_eq!(report.records.len(), 3);
        for r in &report.records {
            assert!((r.convergence_order - 2.0).abs() < 0.3, "{r:?}");
        }
        assert!(report.records.iter().any(|r| r.relative_error > 1e-6));
    }

    #[test]
    fn empty_plan_is_config_error() {
        let plan = ValidationPlan {
            kappas: vec![],
            ..ValidationPlan::default()
        };
        assert!(matches!(validate(&plan, &au()), Err(Error::Config(_))));
    }
}
