//! Hydrogen on three-dimensional spaces of constant curvature.
//!
//! The sphere (`k > 0`), flat space and hyperbolic space (`k < 0`) share one
//! closed-form spectrum
//!
//! ```text
//! E_n = B (-1/n^2 + (n^2 - 1) k a1^2)
//! ```
//!
//! and radial wavefunctions built from Jacobi polynomials. This crate
//! evaluates both, checks them against an independent finite-difference
//! eigensolver in [`oracle`], and compares curvature with minimal-length
//! corrections in [`corrections`].
//!
//! ```
//! use hydrogen_curvature::{analytic, Curvature, UnitScales};
//!
//! let au = UnitScales::atomic();
//! let k = Curvature::new(0.01).unwrap();
//! assert_eq!(analytic::energy_n(1, k, &au), -0.5);
//! assert!((analytic::energy_n(2, k, &au) + 0.11).abs() < 1e-15);
//! ```

pub mod analytic;
pub mod cli;
pub mod corrections;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod specfun;
pub mod units;

pub use analytic::{EnergyLevel, HypergeometricData, QuantumNumbers, RadialFunctionTable};
pub use corrections::{CorrectedLevel, MinimalLength};
pub use error::{Error, Result};
pub use geometry::{Curvature, Geometry};
pub use oracle::{Discretization, SpectralReport};
pub use units::UnitScales;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/wavefunctions.md")]
    mod wavefunctions {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/minimal-length.md")]
    mod minimal_length {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
