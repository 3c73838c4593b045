use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {r} outside the domain of curvature {kappa} (domain end {end})")]
    Domain { kappa: f64, r: f64, end: f64 },

    #[error("{function} has a pole at r = {r} for curvature {kappa}")]
    Pole {
        function: &'static str,
        kappa: f64,
        r: f64,
    },

    #[error("curvature must be finite, got {0}")]
    NonFiniteCurvature(f64),

    #[error("overflow evaluating degree-{degree} polynomial with parameters {parameters}")]
    Overflow { degree: usize, parameters: String },

    #[error("invalid hypergeometric parameter: {0}")]
    Parameter(String),

    #[error("invalid quantum numbers n={n}, l={l}, m={m}: need n >= 1, l < n and n = l + m + 1")]
    QuantumNumbers { n: i64, l: i64, m: i64 },

    #[error(
        "no admissible hypergeometric branch for n={n}, l={l}, kappa={kappa}: level is not bound"
    )]
    NoValidBranch { n: u32, l: u32, kappa: f64 },

    #[error("complex wavefunction is not real up to a phase (imaginary fraction {fraction:e})")]
    Phase { fraction: f64 },

    #[error("invalid discretization: {0}")]
    InvalidDomain(String),

    #[error("inverse iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("bound-state count did not stabilize up to r_max = {r_max}")]
    NonStabilization { r_max: f64 },

    #[error("no crossover between curvature and minimal-length effects for n in [1, {n_max:e}]")]
    NoCrossover { n_max: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
