//! Dual-rail circuit simulation and locality analysis.
//!
//! A register of `n` particles, each occupying one of two spatial modes, is
//! evolved as a dense vector of `2^n` complex amplitudes through layers of
//! single-particle unitaries and controlled-phase interactions.  On top of
//! that simulator the crate provides:
//!
//! - joint and subsystem-marginal outcome distributions ([`prob`]),
//! - a partial-collapse local reconstruction of subsystem statistics and
//!   the interference accounting that shows where it breaks ([`lhv`]),
//! - a search for directions in gate-parameter space that move a subsystem's
//!   marginals without moving any amplitude the subsystem can locally see
//!   ([`infoflow`]),
//! - a discrete sum-over-paths evaluation of the same marginals ([`paths`]),
//! - a two-particle continuum module with spectral Schr&ouml;dinger evolution,
//!   guided trajectories, and conditional/effective wavefunction monitors
//!   ([`bohm`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature simply forwards to the std builds of the numeric dependencies.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bohm;
pub mod circuit;
pub mod error;
pub mod infoflow;
pub mod lhv;
pub mod linalg;
pub mod paths;
pub mod prob;
pub mod rng;
pub mod state;

pub use circuit::{Circuit, CircuitLayer, ControlledPhaseGate, GateForm, LinExpr, Param, ParamId, SingleParticleGate};
pub use error::Error;
pub use state::{kron_embed, DenseMatrix, Mat2, StateVector, C64};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
