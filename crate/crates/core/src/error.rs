//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building or analysing a circuit or a
/// continuum scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A particle index was at least the register size.
    ParticleOutOfRange { particle: usize, n_particles: usize },
    /// Two gates in one layer named the same particle.
    DuplicateTarget { particle: usize },
    /// A controlled gate named the same particle twice.
    ControlEqualsTarget { particle: usize },
    /// A 2x2 matrix failed the unitarity check.
    NotUnitary { max_deviation: f64 },
    /// An amplitude vector had the wrong length for the register.
    DimensionMismatch { expected: usize, found: usize },
    /// An amplitude vector was not normalized.
    NotNormalized { norm_sq: f64 },
    /// A subsystem listed no particles, repeated one, or named one out of range.
    BadSubsystem(String),
    /// A named parameter does not exist in the circuit.
    UnknownParam(String),
    /// A parameter name was declared twice.
    DuplicateParam(String),
    /// A layer index pointed past the end of the circuit.
    LayerOutOfRange { layer: usize, n_layers: usize },
    /// The layer named in a gate-resolved analysis is not a controlled gate.
    NotAControlledLayer { layer: usize },
    /// Path enumeration would exceed the configured bound.
    PathBudgetExceeded { estimated: u64, limit: u64 },
    /// A spatial grid length was not a power of two.
    GridNotPowerOfTwo { len: usize },
    /// A spatial grid was too coarse or degenerate for the requested analysis.
    BadGrid(String),
    /// Evolution drifted off unit norm, signalling instability.
    NormDrift { step: usize, norm_sq: f64 },
    /// A conditional slice carried no weight at the requested position.
    EmptyConditional { norm_sq: f64 },
    /// A scenario or analysis parameter was out of its valid range.
    BadParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParticleOutOfRange { particle, n_particles } => {
                write!(f, "particle index {particle} out of range for {n_particles} particles")
            }
            Error::DuplicateTarget { particle } => {
                write!(f, "particle {particle} targeted twice in one layer")
            }
            Error::ControlEqualsTarget { particle } => {
                write!(f, "controlled gate names particle {particle} on both sides")
            }
            Error::NotUnitary { max_deviation } => {
                write!(f, "matrix is not unitary (deviation {max_deviation:.3e})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "amplitude vector has length {found}, expected {expected}")
            }
            Error::NotNormalized { norm_sq } => {
                write!(f, "state norm^2 is {norm_sq}, expected 1")
            }
            Error::BadSubsystem(msg) => write!(f, "bad subsystem: {msg}"),
            Error::UnknownParam(name) => write!(f, "unknown parameter `{name}`"),
            Error::DuplicateParam(name) => write!(f, "parameter `{name}` declared twice"),
            Error::LayerOutOfRange { layer, n_layers } => {
                write!(f, "layer {layer} out of range for {n_layers} layers")
            }
            Error::NotAControlledLayer { layer } => {
                write!(f, "layer {layer} is not a controlled-phase layer")
            }
            Error::PathBudgetExceeded { estimated, limit } => {
                write!(f, "path enumeration needs ~{estimated} paths, over the {limit} bound")
            }
            Error::GridNotPowerOfTwo { len } => {
                write!(f, "grid length {len} is not a power of two")
            }
            Error::BadGrid(msg) => write!(f, "bad grid: {msg}"),
            Error::NormDrift { step, norm_sq } => {
                write!(f, "norm^2 drifted to {norm_sq} at step {step}")
            }
            Error::EmptyConditional { norm_sq } => {
                write!(f, "conditional slice norm^2 {norm_sq:.3e} too small to normalize")
            }
            Error::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
