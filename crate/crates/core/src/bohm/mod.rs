//! Continuum companion to the circuit modules: two-particle wavefunctions
//! on a periodic 1-D grid per coordinate, split-operator evolution, guided
//! trajectories along the probability current, and the conditional /
//! effective wavefunctions of one particle given the other's position.
//!
//! The pieces compose into one workflow:
//!
//! 1. build a [`wavefunction::Wavefunction2P`] on a [`grid::Grid1D`],
//! 2. propagate it with [`evolve::evolve_pde`] under a
//!    [`wavefunction::PotentialSpec`],
//! 3. draw sample positions from the initial density and integrate them
//!    along `v = j / rho` with [`trajectory::guide_marginal_trajectories`]
//!    or [`trajectory::guide_full_trajectories`], checking equivariance of
//!    the ensemble against the evolved density,
//! 4. slice the state along a sample's path and ask
//!    [`monitor::effective_wavefunction_monitor`] whether the slice evolves
//!    autonomously under the one-particle Hamiltonian.

pub mod evolve;
pub mod fft;
pub mod grid;
pub mod monitor;
pub mod trajectory;
pub mod wavefunction;

pub use evolve::{
    continuity_residual, evolve_pde, marginal_continuity_residual, Evolution, EvolveParams,
    NORM_DRIFT_TOL,
};
pub use fft::Fft;
pub use grid::{Grid1D, MIN_GRID_POINTS};
pub use monitor::{effective_wavefunction_monitor, EffectiveReport};
pub use trajectory::{
    equivariance_1d, equivariance_2d, guide_full_trajectories, guide_marginal_trajectories,
    sample_density_1d, sample_density_2d, EquivarianceReport, FullEnsemble, MarginalEnsemble,
    DENSITY_FLOOR_FRACTION,
};
pub use wavefunction::{
    density_mean, density_std, free_gaussian_sigma, gaussian_packet, product_state, superpose,
    Conditional, CurrentField, PairPotential, Potential1D, PotentialSpec, Wavefunction2P,
    CONDITIONAL_FLOOR, WAVE_NORM_TOL,
};
