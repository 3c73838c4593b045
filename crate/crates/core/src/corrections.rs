//! Minimal-length corrections and their size next to curvature effects.
//!
//! A deformed commutator with `gamma = L^2 / hbar^2` shifts hydrogen levels
//! to first order by
//!
//! ```text
//! dE = B 4 (L/a1)^2 (4n - 3(l + 1/2)) / (n^4 (l + 1/2)),
//! ```
//!
//! always upward and largest for s-states. Everything is evaluated as
//! dimensionless ratios first so that shifts of order `1e-70` stay representable.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, QuantumNumbers};
use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::units::UnitScales;

/// The minimal length, stored as `L / a1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalLength {
    ratio: f64,
}

impl MinimalLength {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(Error::Parameter(format!(
                "minimal length must be finite and non-negative, got {ratio}"
            )));
        }
        Ok(MinimalLength { ratio })
    }

    pub fn zero() -> Self {
        MinimalLength { ratio: 0.0 }
    }

    /// The Planck length.
    pub fn planck(scales: &UnitScales) -> Self {
        MinimalLength {
            ratio: scales.planck_ratio(),
        }
    }

    pub fn from_meters(length: f64, scales: &UnitScales) -> Result<Self> {
        Self::new(length / scales.bohr_radius_m)
    }

    pub fn ratio(self) -> f64 {
        self.ratio
    }

    /// Length in internal units.
    pub fn length(self, scales: &UnitScales) -> f64 {
        self.ratio * scales.bohr_radius
    }

    pub fn meters(self, scales: &UnitScales) -> f64 {
        self.ratio * scales.bohr_radius_m
    }

    /// Deformation parameter times `hbar^2`, i.e. `L^2`.
    pub fn gamma_hbar_sq(self, scales: &UnitScales) -> f64 {
        let l = self.length(scales);
        l * l
    }
}

/// Level with its separately reported contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedLevel {
    pub qn: QuantumNumbers,
    pub base: f64,
    pub ml_shift: f64,
    pub curvature_term: f64,
    /// `(base + ml_shift) + curvature_term`.
    pub total: f64,
}

/// Dimensionless minimal-length factor, `dE / B`.
fn ml_factor(n: u32, l: u32, x: f64) -> f64 {
    let nf = n as f64;
    let lh = l as f64 + 0.5;
    4.0 * x * x * (4.0 * nf - 3.0 * lh) / (nf.powi(4) * lh)
}

/// First-order minimal-length energy shift of level `(n, l)`.
pub fn ml_shift(qn: QuantumNumbers, length: MinimalLength, scales: &UnitScales) -> f64 {
    scales.rydberg * ml_factor(qn.n(), qn.l(), length.ratio())
}

/// `dE / E` for the s-state of shell `n`: `-4 (L/a1)^2 (8n - 3) / n^2`.
pub fn relative_shift_s(n: u32, length: MinimalLength) -> f64 {
    let nf = n as f64;
    -(ml_factor(n, 0, length.ratio()) * (nf * nf))
}

/// Curvature contribution relative to `|E_n| = B/n^2`.
pub fn relative_curvature_term(n: f64, kappa_a1_sq: f64) -> f64 {
    kappa_a1_sq * (n * n - 1.0) * (n * n)
}

/// Bohr level, minimal-length shift and curvature term together.
pub fn combined_level(
    qn: QuantumNumbers,
    kappa: Curvature,
    length: MinimalLength,
    scales: &UnitScales,
) -> CorrectedLevel {
    let base = analytic::base_energy(qn.n(), scales);
    let shift = ml_shift(qn, length, scales);
    let curv = analytic::curvature_term(qn.n(), kappa, scales);
    CorrectedLevel {
        qn,
        base,
        ml_shift: shift,
        curvature_term: curv,
        total: (base + shift) + curv,
    }
}

/// Relative change of the ionization energy from the Planck length,
/// `-20 (L_P / a1)^2`.
pub fn planck_q(scales: &UnitScales) -> f64 {
    relative_shift_s(1, MinimalLength::planck(scales))
}

/// Largest minimal length compatible with measuring the 1S-2S interval to
/// `precision` (internal energy units). The interval moves by `16.75 B (L/a1)^2`.
pub fn length_bound_from_precision(precision: f64, scales: &UnitScales) -> Result<MinimalLength> {
    if !(precision.is_finite() && precision >= 0.0) {
        return Err(Error::Parameter(format!(
            "energy precision must be non-negative, got {precision}"
        )));
    }
    let one = QuantumNumbers::new(1, 0)?;
    let two = QuantumNumbers::new(2, 0)?;
    let unit = MinimalLength::new(1.0)?;
    let coeff = (ml_shift(one, unit, scales) - ml_shift(two, unit, scales)) / scales.rydberg;
    MinimalLength::new((precision / (coeff * scales.rydberg)).sqrt())
}

/// Shell at which curvature and minimal-length effects on s-levels agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub n: f64,
    /// Common size of both relative effects at `n`.
    pub relative_magnitude: f64,
}

/// Upper end of the crossover search.
pub const CROSSOVER_N_MAX: f64 = 1e20;

/// Solves `|k| a1^2 (n^2 - 1) n^4 = 4 (L/a1)^2 (8n - 3)` for real `n`.
///
/// The curvature term relative to `|E_n| = B/n^2` grows like `n^4` while the
/// minimal-length one falls like `1/n`, so a root is unique when it exists.
pub fn crossover_level(
    kappa: Curvature,
    length: MinimalLength,
    scales: &UnitScales,
) -> Result<Crossover> {
    let k = scales.kappa_dimensionless(kappa.value()).abs();
    let x = length.ratio();
    if k == 0.0 || x == 0.0 {
        return Err(Error::Parameter(
            "crossover needs nonzero curvature and minimal length".into(),
        ));
    }
    let curv = |n: f64| k * (n * n - 1.0) * n * n;
    let ml = |n: f64| 4.0 * x * x * (8.0 * n - 3.0) / (n * n);
    // compare logarithms to keep both sides finite across [1, 1e20]
    let f = |t: f64| {
        let n = t.exp();
        let c = curv(n);
        if c <= 0.0 {
            return f64::NEG_INFINITY;
        }
        c.ln() - ml(n).ln()
    };
    let (mut lo, mut hi) = (0.0f64, CROSSOVER_N_MAX.ln());
    if f(hi) < 0.0 {
        return Err(Error::NoCrossover {
            n_max: CROSSOVER_N_MAX,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = (0.5 * (lo + hi)).exp();
    Ok(Crossover {
        n,
        relative_magnitude: ml(n),
    })
}
