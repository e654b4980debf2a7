//! Command-line companion to the dual-rail simulation library: a circuit
//! description language, JSON scenario files for the two-particle
//! trajectory pipeline, and deterministic JSON reports.
//!
//! The pieces live here (rather than in `main.rs`) so integration tests can
//! drive every command in-process.

pub mod commands;
pub mod dsl;
pub mod report;
pub mod scenario;

pub use commands::{CliError, CliResult, CommandOutcome};
pub use dsl::{circuits_structurally_equal, parse_circuit, pretty_print, ParseError};
pub use report::Report;
pub use scenario::Scenario;
