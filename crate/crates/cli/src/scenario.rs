//! Two-particle scenario files: JSON descriptions of a grid, potentials, an
//! initial wavefunction, evolution parameters, an optional trajectory
//! ensemble, and an optional effective-wavefunction monitor.

use dualrail_core::bohm::{
    gaussian_packet, product_state, superpose, EvolveParams, Grid1D, PairPotential, Potential1D,
    PotentialSpec, Wavefunction2P,
};
use dualrail_core::C64;
use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn four() -> usize {
    4
}

fn sixty_four() -> usize {
    64
}

/// A complete scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass1: f64,
    #[serde(default = "one")]
    pub mass2: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub initial: InitialSpec,
    pub evolution: EvolutionSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSpec>,
}

/// Periodic spatial grid shared by both coordinates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of points; must be a power of two.
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
}

/// External wells for each coordinate plus the pair interaction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub external1: PotentialForm,
    #[serde(default)]
    pub external2: PotentialForm,
    #[serde(default)]
    pub interaction: InteractionForm,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PotentialForm {
    #[default]
    Zero,
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    Barrier {
        height: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum InteractionForm {
    #[default]
    Zero,
    SoftCoulomb {
        strength: f64,
        softening: f64,
    },
    Gaussian {
        height: f64,
        width: f64,
    },
}

/// A Gaussian packet: `exp(-(x - center)^2 / 4 sigma^2 + i momentum x)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: f64,
    #[serde(default)]
    pub momentum: f64,
    pub sigma: f64,
}

/// One product branch of a superposition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub first: PacketSpec,
    pub second: PacketSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// A product of two packets: no entanglement at t = 0.
    Product { first: PacketSpec, second: PacketSpec },
    /// An equal-weight superposition of two product branches, with an
    /// optional relative phase on the second branch.
    TwoBranch {
        left: BranchSpec,
        right: BranchSpec,
        #[serde(default)]
        relative_phase: f64,
    },
}

/// Trajectory-ensemble settings; `samples = 0` skips the ensemble stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default)]
    pub samples: usize,
    /// Integrator substeps per snapshot interval.
    #[serde(default = "four")]
    pub substeps: usize,
    /// Histogram bins for the equivariance comparison (must divide the grid).
    #[serde(default = "sixty_four")]
    pub bins: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec { samples: 0, substeps: 4, bins: 64, seed: 0 }
    }
}

/// Conditional-slice monitor settings: guide one configuration from `start`,
/// condition on its second coordinate, and test autonomy over `window`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    pub window: [f64; 2],
    pub tol: f64,
    /// Initial configuration `(x1, x2)` of the conditioning trajectory.
    pub start: [f64; 2],
    #[serde(default = "four")]
    pub substeps: usize,
}

impl Scenario {
    pub fn grid(&self) -> dualrail_core::Result<Grid1D> {
        Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.points)
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        PotentialSpec {
            external1: potential_1d(self.potential.external1),
            external2: potential_1d(self.potential.external2),
            interaction: interaction(self.potential.interaction),
        }
    }

    pub fn evolve_params(&self) -> EvolveParams {
        EvolveParams {
            dt: self.evolution.dt,
            steps: self.evolution.steps,
            snapshot_stride: self.evolution.snapshot_stride,
        }
    }

    pub fn initial_wavefunction(&self) -> dualrail_core::Result<Wavefunction2P> {
        let grid = self.grid()?;
        let packet = |p: &PacketSpec| gaussian_packet(&grid, p.center, p.momentum, p.sigma);
        match &self.initial {
            InitialSpec::Product { first, second } => product_state(
                grid,
                &packet(first),
                &packet(second),
                self.hbar,
                self.mass1,
                self.mass2,
            ),
            InitialSpec::TwoBranch { left, right, relative_phase } => {
                let a = product_state(
                    grid,
                    &packet(&left.first),
                    &packet(&left.second),
                    self.hbar,
                    self.mass1,
                    self.mass2,
                )?;
                let b = product_state(
                    grid,
                    &packet(&right.first),
                    &packet(&right.second),
                    self.hbar,
                    self.mass1,
                    self.mass2,
                )?;
                superpose(&a, &b, C64::new(1.0, 0.0), C64::from_polar(1.0, *relative_phase))
            }
        }
    }
}

fn potential_1d(form: PotentialForm) -> Potential1D {
    match form {
        PotentialForm::Zero => Potential1D::Zero,
        PotentialForm::Harmonic { omega, center } => Potential1D::Harmonic { omega, center },
        PotentialForm::Barrier { height, center, width } => {
            Potential1D::Barrier { height, center, width }
        }
    }
}

fn interaction(form: InteractionForm) -> PairPotential {
    match form {
        InteractionForm::Zero => PairPotential::Zero,
        InteractionForm::SoftCoulomb { strength, softening } => {
            PairPotential::SoftCoulomb { strength, softening }
        }
        InteractionForm::Gaussian { height, width } => PairPotential::Gaussian { height, width },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_a_product_scenario() {
        let text = r#"{
            "grid": {"x_min": -16.0, "x_max": 16.0, "points": 64},
            "potential": {
                "external1": {"form": "harmonic", "omega": 1.0},
                "interaction": {"form": "soft_coulomb", "strength": 1.0, "softening": 1.0}
            },
            "initial": {"kind": "product",
                        "first": {"center": -3.0, "momentum": 1.0, "sigma": 1.0},
                        "second": {"center": 3.0, "sigma": 1.0}},
            "evolution": {"dt": 0.01, "steps": 10, "snapshot_stride": 5},
            "ensemble": {"samples": 100, "seed": 7}
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        assert_eq!(scenario.hbar, 1.0);
        assert_eq!(scenario.ensemble.bins, 64);
        assert_eq!(scenario.ensemble.substeps, 4);
        let wave = scenario.initial_wavefunction().unwrap();
        assert!((wave.norm_sq() - 1.0).abs() < 1e-10);
        let spec = scenario.potential_spec();
        assert!(!spec.interaction.is_zero());
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{
            "grid": {"x_min": -16.0, "x_max": 16.0, "points": 64, "bogus": 1},
            "initial": {"kind": "product",
                        "first": {"center": 0.0, "sigma": 1.0},
                        "second": {"center": 0.0, "sigma": 1.0}},
            "evolution": {"dt": 0.01, "steps": 10}
        }"#;
        assert!(serde_json::from_str::<Scenario>(text).is_err());
    }

    #[test]
    fn two_branch_scenarios_superpose() {
        let text = r#"{
            "grid": {"x_min": -16.0, "x_max": 16.0, "points": 64},
            "initial": {"kind": "two_branch",
                        "left":  {"first": {"center": -2.0, "momentum": 0.5, "sigma": 1.0},
                                  "second": {"center": -6.0, "sigma": 0.8}},
                        "right": {"first": {"center": 2.0, "momentum": -0.5, "sigma": 1.0},
                                  "second": {"center": 6.0, "sigma": 0.8}}},
            "evolution": {"dt": 0.01, "steps": 10}
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let wave = scenario.initial_wavefunction().unwrap();
        assert!((wave.norm_sq() - 1.0).abs() < 1e-10);
        // Disjoint branches entangle the coordinates: about one bit.
        assert!(wave.mode_entanglement_entropy() > 0.9);
    }
}
