//! Closed-form hydrogen on a space of constant curvature.
//!
//! The quantized eigenvalue parameter is
//!
//! ```text
//! lambda_n = -beta^2 / (4 n^2) + (n^2 - 1) k,      n = l + m + 1,
//! ```
//!
//! so the energy is the flat Bohr level plus a curvature term
//! `B (n^2 - 1) k a1^2`, and the ground state does not feel the curvature.
//!
//! The radial function is
//!
//! ```text
//! G(r) = S_k(r)^l exp(-sigma r (l + 2q)) P_m^(2l+1, nu)(1 - 2 z(r)),
//! z(r) = 2 sigma S_k(r) exp(-sigma r) = 1 - exp(-2 sigma r),
//! ```
//!
//! with `sigma = sqrt(-k)` (imaginary on the sphere). The exponent `q` and the
//! Jacobi parameter `nu` come from two square roots `omega_-`, `omega_+` whose
//! signs are not fixed by the algebra. [`hypergeometric_data`] enumerates the
//! sign choices, keeps those that terminate the series and (for `k < 0`) give
//! a normalizable state, and picks the one that actually solves the radial
//! equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Curvature};
use crate::oracle;
use crate::specfun;
use crate::units::UnitScales;

type C64 = Complex64;

/// Curvatures with `|k| a1^2` below this use the flat Laguerre formulas.
pub const FLAT_THRESHOLD: f64 = 1e-12;

/// Largest residual for a branch to count as a solution of the radial equation.
pub const BRANCH_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Largest imaginary-to-real ratio accepted after removing the global phase.
pub const PHASE_TOLERANCE: f64 = 1e-8;

const PROBE_POINTS: usize = 64;

/// Principal, orbital and radial quantum numbers with `n = l + m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    n: u32,
    l: u32,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::QuantumNumbers {
                n: n as i64,
                l: l as i64,
                m: n as i64 - l as i64 - 1,
            });
        }
        Ok(QuantumNumbers { n, l })
    }

    /// Rejects triples that violate `n = l + m + 1`.
    pub fn from_triple(n: u32, l: u32, m: u32) -> Result<Self> {
        if n as u64 != l as u64 + m as u64 + 1 {
            return Err(Error::QuantumNumbers {
                n: n as i64,
                l: l as i64,
                m: m as i64,
            });
        }
        QuantumNumbers::new(n, l)
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn l(self) -> u32 {
        self.l
    }

    /// Radial quantum number, the degree of the polynomial factor.
    pub fn m(self) -> u32 {
        self.n - self.l - 1
    }
}

/// One quantized level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub qn: QuantumNumbers,
    pub lambda: f64,
    pub energy: f64,
    pub kappa: Curvature,
    pub bound: bool,
}

/// Eigenvalue parameter `lambda = 2 m E / hbar^2` of level `n`.
pub fn lambda_n(n: u32, kappa: Curvature, scales: &UnitScales) -> f64 {
    let beta = scales.beta();
    let nf = n as f64;
    -beta * beta / (4.0 * nf * nf) + (nf * nf - 1.0) * kappa.value()
}

/// Flat Bohr energy `-B / n^2`.
pub fn base_energy(n: u32, scales: &UnitScales) -> f64 {
    let nf = n as f64;
    -scales.rydberg / (nf * nf)
}

/// Curvature contribution `B (n^2 - 1) k a1^2`.
pub fn curvature_term(n: u32, kappa: Curvature, scales: &UnitScales) -> f64 {
    let nf = n as f64;
    scales.rydberg * ((nf * nf - 1.0) * scales.kappa_dimensionless(kappa.value()))
}

/// `E_n = B (-1/n^2 + (n^2 - 1) k a1^2)`, computed as base plus curvature
/// term so that the flat part is reproduced bit for bit.
pub fn energy_n(n: u32, kappa: Curvature, scales: &UnitScales) -> f64 {
    base_energy(n, scales) + curvature_term(n, kappa, scales)
}

pub fn energy_level(qn: QuantumNumbers, kappa: Curvature, scales: &UnitScales) -> EnergyLevel {
    EnergyLevel {
        qn,
        lambda: lambda_n(qn.n(), kappa, scales),
        energy: energy_n(qn.n(), kappa, scales),
        kappa,
        bound: bound_state_admissible(qn, kappa, scales),
    }
}

/// Real `n` at which a spherical-space level reaches zero energy, the
/// crossover from Bohr crowding to the free spectrum of the sphere.
///
/// Solves `n^2 (n^2 - 1) = (R/a1)^2`; asymptotically `n = sqrt(R/a1)`.
pub fn transition_level(kappa: Curvature, scales: &UnitScales) -> Result<f64> {
    let k = scales.kappa_dimensionless(kappa.value());
    if k <= 0.0 {
        return Err(Error::Parameter(format!(
            "transition level needs positive curvature, got {k}"
        )));
    }
    // N = n^2 solves N^2 - N - rho^2 = 0 with rho^2 = 1 / (k a1^2)
    let rho_sq = 1.0 / k;
    let big_n = if rho_sq > 1e30 {
        // 1 + 4 rho^2 would lose the 1 anyway
        0.5 + rho_sq.sqrt() * (1.0 + 1.0 / (8.0 * rho_sq))
    } else {
        0.5 * (1.0 + (1.0 + 4.0 * rho_sq).sqrt())
    };
    Ok(big_n.sqrt())
}

/// Whether level `n` is a normalizable bound state.
///
/// Always true on the sphere and in flat space. In hyperbolic space the
/// discrete spectrum is finite: `n^2 < beta / (2 sqrt(-k)) = R / a1`.
pub fn bound_state_admissible(qn: QuantumNumbers, kappa: Curvature, scales: &UnitScales) -> bool {
    if kappa.value() >= 0.0 {
        return true;
    }
    let nf = qn.n() as f64;
    nf * nf < scales.beta() / (2.0 * (-kappa.value()).sqrt())
}

/// Which square root enters the exponent `q = (1 + omega)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QRoot {
    /// `q = (1 + omega_-)/2`, the assignment as usually printed.
    OmegaMinus,
    /// `q = (1 + omega_+)/2`, i.e. the two roots with their roles exchanged.
    OmegaPlus,
}

/// Record of the sign choices behind a [`HypergeometricData`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTag {
    pub omega_minus_sign: i8,
    pub omega_plus_sign: i8,
    pub q_root: QRoot,
    /// Relative radial-equation residual on the probe grid, if evaluated.
    pub residual: Option<f64>,
}

/// Hypergeometric parameters of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricData {
    pub qn: QuantumNumbers,
    pub kappa: Curvature,
    pub lambda: f64,
    /// `sqrt(-k)`, principal branch.
    pub sigma: C64,
    /// Signed roots of `(k + lambda + beta sigma)/k` and `(k + lambda - beta sigma)/k`.
    pub omega_plus: C64,
    pub omega_minus: C64,
    /// Exponent `q` of the `(1 - z)^q` factor.
    pub q_plus: C64,
    /// `p = l`, the regular exponent at the origin.
    pub p: u32,
    pub a: C64,
    pub b: C64,
    pub c: C64,
    /// Second Jacobi parameter `-n + (omega_- + omega_+)/2`.
    pub jacobi_nu: C64,
    /// `sigma (l + 2q)`.
    pub exponent_coeff: C64,
    pub branch: BranchTag,
}

impl HypergeometricData {
    fn jacobi_alpha(&self) -> C64 {
        C64::new(2.0 * self.qn.l() as f64 + 1.0, 0.0)
    }

    /// Unnormalized complex `G(r)`.
    pub fn eval(&self, r: f64) -> Result<C64> {
        let z = mobius_argument(self.kappa, r)?;
        let poly =
            specfun::jacobi_poly_t(self.qn.m() as usize, self.jacobi_alpha(), self.jacobi_nu, z)?;
        // S^l exp(-sigma l r) = (z / (2 sigma))^l keeps both factors bounded
        let s_e = z / (2.0 * self.sigma);
        let decay = (-2.0 * self.q_plus * self.sigma * r).exp();
        Ok(s_e.powu(self.qn.l()) * decay * poly)
    }

    /// Unnormalized complex `u(r) = S_k(r) G(r)`.
    pub fn eval_u(&self, r: f64) -> Result<C64> {
        let z = mobius_argument(self.kappa, r)?;
        let poly =
            specfun::jacobi_poly_t(self.qn.m() as usize, self.jacobi_alpha(), self.jacobi_nu, z)?;
        let s_e = z / (2.0 * self.sigma);
        let decay = (-(2.0 * self.q_plus - 1.0) * self.sigma * r).exp();
        Ok(s_e.powu(self.qn.l() + 1) * decay * poly)
    }

    /// Limit of `G(r) / r^l` as `r -> 0`.
    pub fn leading_coefficient(&self) -> Result<C64> {
        specfun::jacobi_poly_t(
            self.qn.m() as usize,
            self.jacobi_alpha(),
            self.jacobi_nu,
            C64::new(0.0, 0.0),
        )
    }

    /// Decay rate of `u` at large `r`.
    pub fn u_decay_rate(&self) -> f64 {
        ((2.0 * self.q_plus - 1.0) * self.sigma).re
    }
}

/// One entry of the branch enumeration, with the reasons it was kept or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchCandidate {
    pub data: HypergeometricData,
    /// `a = -m` within rounding.
    pub terminates: bool,
    /// `u` decays at infinity (hyperbolic space only; always true otherwise).
    pub normalizable: bool,
}

fn csqrt(z: C64) -> C64 {
    z.sqrt()
}

/// All sign choices for `omega_-`, `omega_+` and the root entering `q`.
pub fn branch_candidates(
    qn: QuantumNumbers,
    kappa: Curvature,
    scales: &UnitScales,
) -> Result<Vec<BranchCandidate>> {
    if scales.kappa_dimensionless(kappa.value()).abs() < FLAT_THRESHOLD {
        return Err(Error::Parameter(
            "flat space has no hypergeometric form; use the Laguerre route".into(),
        ));
    }
    let k = C64::new(kappa.value(), 0.0);
    let beta = scales.beta();
    let lambda = lambda_n(qn.n(), kappa, scales);
    let sigma = kappa.sqrt_neg();
    let om_plus = csqrt((k + lambda + beta * sigma) / k);
    let om_minus = csqrt((k + lambda - beta * sigma) / k);
    let l = qn.l() as f64;
    let m = qn.m() as f64;
    let n = qn.n() as f64;

    let mut out = Vec::with_capacity(8);
    for q_root in [QRoot::OmegaMinus, QRoot::OmegaPlus] {
        for sm in [1i8, -1] {
            for sp in [1i8, -1] {
                let wm = om_minus * sm as f64;
                let wp = om_plus * sp as f64;
                let (w, v) = match q_root {
                    QRoot::OmegaMinus => (wm, wp),
                    QRoot::OmegaPlus => (wp, wm),
                };
                let q = (1.0 + w) * 0.5;
                let a = l + 1.0 + (w - v) * 0.5;
                let b = l + 1.0 + (w + v) * 0.5;
                let terminates = (a + m).norm() <= 1e-8 * (1.0 + w.norm() + v.norm());
                let normalizable = kappa.value() >= 0.0 || ((2.0 * q - 1.0) * sigma).re > 0.0;
                let data = HypergeometricData {
                    qn,
                    kappa,
                    lambda,
                    sigma,
                    omega_plus: wp,
                    omega_minus: wm,
                    q_plus: q,
                    p: qn.l(),
                    a: if terminates { C64::new(-m, 0.0) } else { a },
                    b,
                    c: C64::new(2.0 * l + 2.0, 0.0),
                    jacobi_nu: (wm + wp) * 0.5 - n,
                    exponent_coeff: sigma * (l + 2.0 * q),
                    branch: BranchTag {
                        omega_minus_sign: sm,
                        omega_plus_sign: sp,
                        q_root,
                        residual: None,
                    },
                };
                out.push(BranchCandidate {
                    data,
                    terminates,
                    normalizable,
                });
            }
        }
    }
    Ok(out)
}

fn probe_grid(qn: QuantumNumbers, kappa: Curvature, scales: &UnitScales) -> Vec<f64> {
    let nf = qn.n() as f64;
    let mut extent = 20f64.max(3.0 * nf * nf) * scales.bohr_radius;
    if let Some(end) = kappa.domain_end() {
        extent = extent.min(end);
    }
    (0..PROBE_POINTS)
        .map(|i| extent * (i as f64 + 0.5) / PROBE_POINTS as f64)
        .collect()
}

/// Hypergeometric parameters of the physical branch.
///
/// Fails with [`Error::NoValidBranch`] when no sign choice gives a
/// terminating, normalizable solution, which happens exactly for the
/// hyperbolic levels above the bound-state cutoff.
pub fn hypergeometric_data(
    qn: QuantumNumbers,
    kappa: Curvature,
    scales: &UnitScales,
) -> Result<HypergeometricData> {
    let probes = probe_grid(qn, kappa, scales);
    let lambda = lambda_n(qn.n(), kappa, scales);
    let mut best: Option<HypergeometricData> = None;
    for cand in branch_candidates(qn, kappa, scales)? {
        if !(cand.terminates && cand.normalizable) {
            continue;
        }
        let mut data = cand.data;
        let f = |r: f64| data.eval(r);
        let residual = match oracle::ode_residual_fn(kappa, qn.l(), lambda, f, &probes, scales) {
            Ok(v) if v.is_finite() => v,
            _ => continue,
        };
        data.branch.residual = Some(residual);
        let better = match &best {
            None => true,
            Some(b) => {
                let rb = b.branch.residual.unwrap_or(f64::INFINITY);
                let tie = (residual - rb).abs() <= 1e-12 * (1.0 + rb);
                if tie {
                    b.omega_minus.re < 0.0 && data.omega_minus.re >= 0.0
                } else {
                    residual < rb
                }
            }
        };
        if better {
            best = Some(data);
        }
    }
    match best {
        Some(d) if d.branch.residual.unwrap_or(f64::INFINITY) <= BRANCH_RESIDUAL_TOLERANCE => Ok(d),
        _ => Err(Error::NoValidBranch {
            n: qn.n(),
            l: qn.l(),
            kappa: kappa.value(),
        }),
    }
}

/// The argument `z(r) = 2 sqrt(-k) S_k(r) exp(-sqrt(-k) r)`.
///
/// In hyperbolic space this is `1 - exp(-2 sqrt(-k) r)`, inside `[0, 1)`; on
/// the sphere it runs along the unit circle centered at 1.
pub fn mobius_argument(kappa: Curvature, r: f64) -> Result<C64> {
    geometry::curved_sin(kappa, r)?;
    let k = kappa.value();
    Ok(if k == 0.0 {
        C64::new(0.0, 0.0)
    } else if k < 0.0 {
        let s = (-k).sqrt();
        C64::new(-(-2.0 * s * r).exp_m1(), 0.0)
    } else {
        let w = k.sqrt() * r;
        let sn = w.sin();
        C64::new(2.0 * sn * sn, (2.0 * w).sin())
    })
}

/// Sampled, normalized radial wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunctionTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub qn: QuantumNumbers,
    pub kappa: Curvature,
    /// Factor applied to the unnormalized closed form.
    pub norm: f64,
    /// `max|Im G| / max|Re G|` after phase removal; zero for the flat route.
    pub imaginary_fraction: f64,
}

impl RadialFunctionTable {
    pub fn node_count(&self) -> usize {
        count_sign_changes(&self.values)
    }

    /// Trapezoid estimate of `int G^2 S_k^2 dr` over the table.
    pub fn norm_on_grid(&self) -> f64 {
        let k = self.kappa.value();
        let f: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&r, &g)| {
                let s = geometry::sin_raw(k, r);
                g * g * s * s
            })
            .collect();
        self.grid
            .windows(2)
            .zip(f.windows(2))
            .map(|(r, y)| 0.5 * (r[1] - r[0]) * (y[0] + y[1]))
            .sum()
    }
}

/// Sign changes of a sampled function, ignoring samples near zero.
pub fn count_sign_changes(values: &[f64]) -> usize {
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-9 * max;
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}

fn validate_grid(kappa: Curvature, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidDomain("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidDomain(
            "grid must be strictly ascending".into(),
        ));
    }
    geometry::curved_sin(kappa, grid[0])?;
    geometry::curved_sin(kappa, grid[grid.len() - 1])?;
    Ok(())
}

/// Uniform table grid: `[0, max(20, 3 n^2) a1]`, or the whole sphere when it
/// is not much larger than that.
pub fn default_grid(
    qn: QuantumNumbers,
    kappa: Curvature,
    scales: &UnitScales,
    points: usize,
) -> Vec<f64> {
    let nf = qn.n() as f64;
    let reach = 20f64.max(3.0 * nf * nf) * scales.bohr_radius;
    let end = match kappa.domain_end() {
        Some(e) if e <= 10.0 * reach => e,
        _ => reach,
    };
    let points = points.max(2);
    (0..points)
        .map(|i| {
            if i + 1 == points {
                end
            } else {
                end * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn simpson<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, intervals: usize) -> Result<f64> {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64)?;
    }
    Ok(sum * h / 3.0)
}

/// Radial wavefunction from the closed form, normalized to
/// `int G^2 S_k^2 dr = 1` with a positive leading coefficient.
pub fn radial_wavefunction(
    qn: QuantumNumbers,
    kappa: Curvature,
    scales: &UnitScales,
    grid: &[f64],
) -> Result<RadialFunctionTable> {
    if scales.kappa_dimensionless(kappa.value()).abs() < FLAT_THRESHOLD {
        return radial_wavefunction_flat(qn, scales, grid);
    }
    validate_grid(kappa, grid)?;
    if !bound_state_admissible(qn, kappa, scales) {
        return Err(Error::NoValidBranch {
            n: qn.n(),
            l: qn.l(),
            kappa: kappa.value(),
        });
    }
    let data = hypergeometric_data(qn, kappa, scales)?;
    let lead = data.leading_coefficient()?;
    let unphase = C64::from_polar(1.0, -lead.arg());

    let raw: Vec<C64> = grid
        .iter()
        .map(|&r| data.eval(r).map(|g| g * unphase))
        .collect::<Result<_>>()?;
    let max_re = raw.iter().fold(0.0f64, |a, g| a.max(g.re.abs()));
    let max_im = raw.iter().fold(0.0f64, |a, g| a.max(g.im.abs()));
    let fraction = if max_re > 0.0 {
        max_im / max_re
    } else {
        f64::INFINITY
    };
    if !(fraction <= PHASE_TOLERANCE) {
        return Err(Error::Phase { fraction });
    }

    // integrate far enough that u^2 has decayed by ~e^-36
    let nf = qn.n() as f64;
    let grid_end = grid[grid.len() - 1];
    let decay = data.u_decay_rate();
    let mut extent = grid_end
        .max((3.0 * nf * nf + 20.0) * scales.bohr_radius)
        .max(18.0 / decay)
        .min(1e5 * scales.bohr_radius);
    if let Some(end) = kappa.domain_end() {
        extent = extent.min(end);
    }
    let intervals =
        ((extent / (0.005 * scales.bohr_radius)).ceil() as usize).clamp(2000, 2_000_000);
    let integral = simpson(
        |r| {
            let u = (data.eval_u(r)? * unphase).re;
            Ok(u * u)
        },
        0.0,
        extent,
        intervals,
    )?;
    let norm = 1.0 / integral.sqrt();

    Ok(RadialFunctionTable {
        grid: grid.to_vec(),
        values: raw.iter().map(|g| g.re * norm).collect(),
        qn,
        kappa,
        norm,
        imaginary_fraction: fraction,
    })
}

/// Flat-space hydrogen, `G = N (2kr)^l exp(-kr) L_m^(2l+1)(2kr)` with
/// `k = sqrt(-lambda_0) = beta / (2n)`.
pub fn radial_wavefunction_flat(
    qn: QuantumNumbers,
    scales: &UnitScales,
    grid: &[f64],
) -> Result<RadialFunctionTable> {
    let kappa = Curvature::flat();
    validate_grid(kappa, grid)?;
    let n = qn.n();
    let l = qn.l();
    let k = scales.beta() / (2.0 * n as f64);
    // (n-l-1)! / (n+l)! as a product
    let fact_ratio = ((n - l)..=(n + l)).fold(1.0, |acc, j| acc / j as f64);
    let norm = ((2.0 * k).powi(3) * fact_ratio / (2.0 * n as f64)).sqrt();
    let alpha = 2.0 * l as f64 + 1.0;
    let values = grid
        .iter()
        .map(|&r| {
            let rho = 2.0 * k * r;
            let lag = specfun::laguerre_poly(qn.m() as usize, alpha, rho)?;
            Ok(norm * rho.powi(l as i32) * (-k * r).exp() * lag)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RadialFunctionTable {
        grid: grid.to_vec(),
        values,
        qn,
        kappa,
        norm,
        imaginary_fraction: 0.0,
    })
}

/// Sup-norm distance between the curved and flat normalized wavefunctions,
/// one entry per curvature.
pub fn flat_limit_gap(
    qn: QuantumNumbers,
    kappas: &[Curvature],
    grid: &[f64],
    scales: &UnitScales,
) -> Result<Vec<f64>> {
    let flat = radial_wavefunction_flat(qn, scales, grid)?;
    kappas
        .iter()
        .map(|&k| {
            let curved = radial_wavefunction(qn, k, scales, grid)?;
            Ok(curved
                .values
                .iter()
                .zip(&flat.values)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())))
        })
        .collect()
}
