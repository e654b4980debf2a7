//! Outcome distributions: joint, subsystem marginals, and the no-signaling
//! probe.

use crate::circuit::{Circuit, CircuitLayer, GateForm, SingleParticleGate};
use crate::error::Error;
use crate::rng;
use crate::state::{mode_of, StateVector};
use crate::Result;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// A validated, ascending list of distinct particle indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    particles: Vec<usize>,
}

impl Subsystem {
    pub fn new(mut particles: Vec<usize>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::BadSubsystem(String::from("no particles listed")));
        }
        particles.sort_unstable();
        if particles.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadSubsystem(String::from("repeated particle")));
        }
        Ok(Subsystem { particles })
    }

    pub fn single(particle: usize) -> Self {
        Subsystem { particles: vec![particle] }
    }

    pub fn particles(&self) -> &[usize] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn contains(&self, particle: usize) -> bool {
        self.particles.binary_search(&particle).is_ok()
    }

    pub fn check_against(&self, n_particles: usize) -> Result<()> {
        match self.particles.last() {
            Some(&max) if max >= n_particles => Err(Error::BadSubsystem(format!(
                "particle {max} out of range for {n_particles} particles"
            ))),
            _ => Ok(()),
        }
    }

    /// Particles of the register not in this subsystem.
    pub fn complement(&self, n_particles: usize) -> Vec<usize> {
        (0..n_particles).filter(|p| !self.contains(*p)).collect()
    }

    /// Project a full basis index onto this subsystem's outcome index,
    /// keeping the listed particle order (first listed = most significant).
    pub fn outcome_of(&self, index: usize, n_particles: usize) -> usize {
        let mut out = 0usize;
        for &p in &self.particles {
            out = (out << 1) | mode_of(index, p, n_particles) as usize;
        }
        out
    }
}

/// Probabilities over the outcomes of a particle list, indexed with the first
/// listed particle as the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub particles: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Squared-modulus distribution over all basis configurations.
pub fn joint_distribution(state: &StateVector) -> Distribution {
    Distribution {
        particles: (0..state.n_particles()).collect(),
        probs: state.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// Marginal distribution of a subsystem: joint probabilities summed over the
/// other particles' outcomes.
pub fn marginal_distribution(state: &StateVector, sub: &Subsystem) -> Result<Distribution> {
    let n = state.n_particles();
    sub.check_against(n)?;
    let mut probs = vec![0.0; 1 << sub.len()];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        probs[sub.outcome_of(idx, n)] += amp.norm_sqr();
    }
    Ok(Distribution { particles: sub.particles().to_vec(), probs })
}

/// Outcome of probing a subsystem's marginal against external unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct NoSignalingReport {
    pub trials: usize,
    /// Layer position where the probe unitaries were spliced in.
    pub insert_layer: usize,
    /// Largest |delta| of any marginal outcome across trials.
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Draw `trials` random single-particle unitaries on every particle outside
/// `sub` and measure how far they move the subsystem marginal.
///
/// With `insert_at = None` the probe layer is appended after the whole
/// circuit, which is always strictly after the last interaction with `sub`;
/// marginals must then be unchanged.  An explicit position supports probing
/// mid-circuit, where insertion before an interaction moves the marginal and
/// shows the check has teeth.
pub fn no_signaling_check(
    circuit: &Circuit,
    sub: &Subsystem,
    trials: usize,
    seed: u64,
    tol: f64,
    insert_at: Option<usize>,
) -> Result<NoSignalingReport> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let externals = sub.complement(n);
    if externals.is_empty() {
        return Err(Error::BadSubsystem(String::from(
            "subsystem covers the whole register; nothing to probe",
        )));
    }
    let insert_layer = insert_at.unwrap_or(circuit.layers().len());
    let baseline = marginal_distribution(&circuit.final_state()?, sub)?;

    let mut max_deviation: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = rng::rng_for_trial(seed, trial as u64);
        let gates: Vec<SingleParticleGate> = externals
            .iter()
            .map(|&p| {
                let m = rng::haar_unitary(&mut rng);
                SingleParticleGate {
                    target: p,
                    form: GateForm::Fixed(m),
                    owner: crate::circuit::particle_label(p),
                    matrix: m,
                }
            })
            .collect();
        let probed = circuit.with_layer_inserted(insert_layer, CircuitLayer::Singles(gates))?;
        let marginal = marginal_distribution(&probed.final_state()?, sub)?;
        max_deviation = max_deviation.max(baseline.max_abs_diff(&marginal));
    }

    Ok(NoSignalingReport {
        trials,
        insert_layer,
        max_deviation,
        tol,
        pass: max_deviation < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{one_phase_circuit, LinExpr};
    use crate::rng::{haar_unitary, rng_from_seed};

    #[test]
    fn joint_distribution_is_squared_moduli() {
        let d = joint_distribution(&StateVector::bell());
        assert_eq!(d.probs.len(), 4);
        assert!((d.probs[0] - 0.5).abs() < 1e-15);
        assert!((d.probs[3] - 0.5).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_of_bell_is_uniform_for_each_particle() {
        let s = StateVector::bell();
        for p in 0..2 {
            let m = marginal_distribution(&s, &Subsystem::single(p)).unwrap();
            assert!((m.probs[0] - 0.5).abs() < 1e-15);
            assert!((m.probs[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn marginals_obey_total_probability_on_random_states() {
        let mut rng = rng_from_seed(17);
        for _ in 0..50 {
            let mut s = StateVector::basis(3, 0);
            for p in 0..3 {
                s.apply_single(p, &haar_unitary(&mut rng)).unwrap();
            }
            s.apply_controlled_phase((0, 1), (1, 1), 0.7).unwrap();
            s.apply_controlled_phase((1, 2), (1, 1), 1.3).unwrap();

            let sub = Subsystem::new(vec![0, 2]).unwrap();
            let m = marginal_distribution(&s, &sub).unwrap();
            assert!((m.total() - 1.0).abs() < 1e-12);

            // Summing the two-particle marginal over particle 2 must give the
            // single-particle marginal of particle 0.
            let m0 = marginal_distribution(&s, &Subsystem::single(0)).unwrap();
            assert!((m.probs[0] + m.probs[1] - m0.probs[0]).abs() < 1e-12);
            assert!((m.probs[2] + m.probs[3] - m0.probs[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn subsystem_construction_guards() {
        assert!(Subsystem::new(vec![]).is_err());
        assert!(Subsystem::new(vec![1, 1]).is_err());
        let sub = Subsystem::new(vec![2, 0]).unwrap();
        assert_eq!(sub.particles(), &[0, 2]);
        assert!(sub.check_against(2).is_err());
        assert!(sub.check_against(3).is_ok());
    }

    #[test]
    fn post_interaction_unitaries_leave_marginals_alone() {
        let mut rng = rng_from_seed(23);
        let circuit = one_phase_circuit(
            haar_unitary(&mut rng),
            haar_unitary(&mut rng),
            0.9,
            haar_unitary(&mut rng),
        )
        .unwrap();
        let report = no_signaling_check(&circuit, &Subsystem::single(0), 64, 5, 1e-12, None).unwrap();
        assert!(report.pass, "max deviation {}", report.max_deviation);
    }

    #[test]
    fn pre_interaction_insertion_moves_the_marginal() {
        let mut rng = rng_from_seed(29);
        let circuit = one_phase_circuit(
            haar_unitary(&mut rng),
            haar_unitary(&mut rng),
            0.9,
            haar_unitary(&mut rng),
        )
        .unwrap();
        // Insert before the controlled layer (layer index 1).
        let report =
            no_signaling_check(&circuit, &Subsystem::single(0), 16, 5, 1e-12, Some(1)).unwrap();
        assert!(!report.pass);
        assert!(report.max_deviation > 1e-3, "deviation {}", report.max_deviation);
    }

    #[test]
    fn whole_register_subsystem_is_rejected() {
        let mut circuit = Circuit::new(2, StateVector::basis(2, 0)).unwrap();
        circuit
            .push_controlled((0, 1), None, LinExpr::constant(0.4), None)
            .unwrap();
        let sub = Subsystem::new(vec![0, 1]).unwrap();
        assert!(no_signaling_check(&circuit, &sub, 4, 1, 1e-12, None).is_err());
    }

    #[test]
    fn marginal_respects_msb_ordering_of_listed_particles() {
        // State |1,0>: particle 0 in mode 1.
        let s = StateVector::from_modes(&[1, 0]);
        let m = marginal_distribution(&s, &Subsystem::single(0)).unwrap();
        assert_eq!(m.probs, vec![0.0, 1.0]);
        let m = marginal_distribution(&s, &Subsystem::single(1)).unwrap();
        assert_eq!(m.probs, vec![1.0, 0.0]);
        let pair = marginal_distribution(&s, &Subsystem::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(pair.probs, vec![0.0, 0.0, 1.0, 0.0]);
    }
}
