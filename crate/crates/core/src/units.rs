//! Physical scales of the hydrogen problem.
//!
//! Internally every length is measured in Bohr radii and every energy in
//! Hartree, so `a1 = 1`, `B = 1/2` and `beta = 2`. The SI constants are only
//! touched when formatting output.

use serde::{Deserialize, Serialize};

/// Bohr radius in meters.
pub const BOHR_RADIUS_M: f64 = 5.291_772_109_03e-11;
/// Rydberg energy in electron-volts.
pub const RYDBERG_EV: f64 = 13.605_693;
/// Planck length in meters.
pub const PLANCK_LENGTH_M: f64 = 1.616_255e-35;

/// Length and energy scales, plus the SI values used for unit conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScales {
    /// Bohr radius `a1 = hbar^2 / (m e^2)` in internal length units.
    pub bohr_radius: f64,
    /// Rydberg energy `B = m e^4 / (2 hbar^2)` in internal energy units.
    pub rydberg: f64,
    pub bohr_radius_m: f64,
    pub rydberg_ev: f64,
    pub planck_length_m: f64,
}

impl Default for UnitScales {
    fn default() -> Self {
        Self::atomic()
    }
}

impl UnitScales {
    /// Hartree atomic units: `a1 = 1`, `B = 1/2`.
    pub fn atomic() -> Self {
        UnitScales {
            bohr_radius: 1.0,
            rydberg: 0.5,
            bohr_radius_m: BOHR_RADIUS_M,
            rydberg_ev: RYDBERG_EV,
            planck_length_m: PLANCK_LENGTH_M,
        }
    }

    /// Coulomb coupling `beta = 2 m e^2 / hbar^2 = 2 / a1`.
    pub fn beta(&self) -> f64 {
        2.0 / self.bohr_radius
    }

    /// `hbar^2 / 2m`, which equals `B a1^2`.
    fn kinetic_scale(&self) -> f64 {
        self.rydberg * self.bohr_radius * self.bohr_radius
    }

    /// Energy `E` for an eigenvalue parameter `lambda = 2 m E / hbar^2`.
    pub fn energy_from_lambda(&self, lambda: f64) -> f64 {
        lambda * self.kinetic_scale()
    }

    pub fn lambda_from_energy(&self, energy: f64) -> f64 {
        energy / self.kinetic_scale()
    }

    /// Internal energy to electron-volts.
    pub fn energy_to_ev(&self, energy: f64) -> f64 {
        energy / self.rydberg * self.rydberg_ev
    }

    pub fn energy_from_ev(&self, ev: f64) -> f64 {
        ev / self.rydberg_ev * self.rydberg
    }

    /// Internal length to meters.
    pub fn length_to_m(&self, length: f64) -> f64 {
        length / self.bohr_radius * self.bohr_radius_m
    }

    pub fn length_from_m(&self, meters: f64) -> f64 {
        meters / self.bohr_radius_m * self.bohr_radius
    }

    /// Planck length over Bohr radius.
    pub fn planck_ratio(&self) -> f64 {
        self.planck_length_m / self.bohr_radius_m
    }

    /// Curvature in internal units for a dimensionless `kappa * a1^2`.
    pub fn kappa_from_dimensionless(&self, kappa_a1_sq: f64) -> f64 {
        kappa_a1_sq / (self.bohr_radius * self.bohr_radius)
    }

    pub fn kappa_dimensionless(&self, kappa: f64) -> f64 {
        kappa * self.bohr_radius * self.bohr_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_values() {
        let u = UnitScales::atomic();
        assert_eq!(u.beta(), 2.0);
        assert_eq!(u.energy_from_lambda(-1.0), -0.5);
        assert_eq!(u.lambda_from_energy(-0.5), -1.0);
    }

    #[test]
    fn conversions_round_trip() {
        let u = UnitScales::atomic();
        for x in [1e-30, 0.37, 12.5, 4.2e17] {
            let e = u.energy_from_ev(u.energy_to_ev(x));
            assert!((e - x).abs() <= 1e-12 * x);
            let l = u.length_from_m(u.length_to_m(x));
            assert!((l - x).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn hartree_in_ev() {
        let u = UnitScales::atomic();
        assert!((u.energy_to_ev(1.0) - 27.211386).abs() < 1e-5);
    }

    #[test]
    fn non_atomic_scales_keep_lambda_relation() {
        let u = UnitScales {
            bohr_radius: 2.0,
            rydberg: 3.0,
            ..UnitScales::atomic()
        };
        // lambda = 2mE/hbar^2 = E / (B a1^2)
        assert_eq!(u.lambda_from_energy(12.0), 1.0);
        assert_eq!(u.beta(), 1.0);
    }
}
