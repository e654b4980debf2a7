//! Circuits: named parameters, gate forms, layers, and evolution.
//!
//! Gates keep the symbolic form they were built from (a named matrix, a phase
//! expression, a polar-form matrix), so a parameter update rebuilds every
//! dependent matrix and revalidates unitarity.  Angle arguments are linear
//! expressions over the circuit's parameters; that is enough to express
//! shared and offset phases while keeping perturbation analyses exact.

use crate::error::Error;
use crate::state::{Mat2, StateVector, NORM_TOL};
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

/// Handle to a named circuit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

/// A named real-valued parameter with an owner label (typically the particle
/// whose apparatus sets it).
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub owner: String,
}

/// Linear expression `constant + sum(coefficient * parameter)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(f64, ParamId)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { constant: c, terms: Vec::new() }
    }

    pub fn param(id: ParamId) -> Self {
        LinExpr { constant: 0.0, terms: vec![(1.0, id)] }
    }

    pub fn plus_term(mut self, coefficient: f64, id: ParamId) -> Self {
        self.terms.push((coefficient, id));
        self
    }

    /// Multiply the whole expression by a scalar.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.constant *= factor;
        for term in &mut self.terms {
            term.0 *= factor;
        }
        self
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, params: &[Param]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(coef, id)| coef * params[id.0].value)
                .sum::<f64>()
    }

    pub fn depends_on(&self, id: ParamId) -> bool {
        self.terms.iter().any(|(c, p)| *p == id && *c != 0.0)
    }

    fn check_params(&self, n_params: usize) -> Result<()> {
        for (_, id) in &self.terms {
            if id.0 >= n_params {
                return Err(Error::UnknownParam(format!("#{}", id.0)));
            }
        }
        Ok(())
    }
}

/// How a single-particle gate matrix is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum GateForm {
    Hadamard,
    PauliX,
    PauliZ,
    /// diag(1, e^{i expr}).
    Phase(LinExpr),
    /// Rotation from three Euler angles.
    Euler { theta: LinExpr, phi: LinExpr, lambda: LinExpr },
    /// Entry-wise polar form: fixed magnitudes, parameterized phases
    /// (row-major).  Must evaluate to a unitary matrix.
    Polar { mags: [f64; 4], phases: [LinExpr; 4] },
    /// A literal matrix.
    Fixed(Mat2),
}

impl GateForm {
    /// Materialize the matrix under the given parameter values, validating
    /// unitarity for the forms that can break it.
    pub fn matrix(&self, params: &[Param]) -> Result<Mat2> {
        let m = match self {
            GateForm::Hadamard => Mat2::hadamard(),
            GateForm::PauliX => Mat2::pauli_x(),
            GateForm::PauliZ => Mat2::pauli_z(),
            GateForm::Phase(expr) => Mat2::phase(expr.eval(params)),
            GateForm::Euler { theta, phi, lambda } => {
                Mat2::euler(theta.eval(params), phi.eval(params), lambda.eval(params))
            }
            GateForm::Polar { mags, phases } => {
                let entry = |k: usize| Complex::from_polar(mags[k], phases[k].eval(params));
                let m = Mat2::from_rows([[entry(0), entry(1)], [entry(2), entry(3)]]);
                m.check_unitary()?;
                m
            }
            GateForm::Fixed(m) => {
                m.check_unitary()?;
                *m
            }
        };
        Ok(m)
    }

    pub fn depends_on(&self, id: ParamId) -> bool {
        match self {
            GateForm::Hadamard | GateForm::PauliX | GateForm::PauliZ | GateForm::Fixed(_) => false,
            GateForm::Phase(e) => e.depends_on(id),
            GateForm::Euler { theta, phi, lambda } => {
                theta.depends_on(id) || phi.depends_on(id) || lambda.depends_on(id)
            }
            GateForm::Polar { phases, .. } => phases.iter().any(|e| e.depends_on(id)),
        }
    }

    fn check_params(&self, n_params: usize) -> Result<()> {
        match self {
            GateForm::Hadamard | GateForm::PauliX | GateForm::PauliZ | GateForm::Fixed(_) => Ok(()),
            GateForm::Phase(e) => e.check_params(n_params),
            GateForm::Euler { theta, phi, lambda } => {
                theta.check_params(n_params)?;
                phi.check_params(n_params)?;
                lambda.check_params(n_params)
            }
            GateForm::Polar { phases, .. } => {
                for e in phases {
                    e.check_params(n_params)?;
                }
                Ok(())
            }
        }
    }
}

/// A single-particle gate with its generating form and materialized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleGate {
    pub target: usize,
    pub form: GateForm,
    pub owner: String,
    pub matrix: Mat2,
}

/// A two-particle phase gate: amplitude components with both particles in
/// their controlled modes pick up `e^{i theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledPhaseGate {
    pub particles: (usize, usize),
    pub controlled_modes: (u8, u8),
    pub phase: LinExpr,
    pub owner: String,
    pub theta: f64,
}

/// One simultaneous layer of the circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitLayer {
    /// Independent single-particle gates on distinct targets.
    Singles(Vec<SingleParticleGate>),
    /// One controlled-phase interaction.
    Controlled(ControlledPhaseGate),
}

impl CircuitLayer {
    /// Particles the layer acts on.
    pub fn touches(&self, particle: usize) -> bool {
        match self {
            CircuitLayer::Singles(gates) => gates.iter().any(|g| g.target == particle),
            CircuitLayer::Controlled(g) => g.particles.0 == particle || g.particles.1 == particle,
        }
    }
}

/// Default owner label for a particle: letters A, B, C, ...
pub fn particle_label(p: usize) -> String {
    if p < 26 {
        char::from(b'A' + p as u8).to_string()
    } else {
        format!("P{p}")
    }
}

/// An immutable-once-built sequence of layers over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_particles: usize,
    initial: StateVector,
    params: Vec<Param>,
    layers: Vec<CircuitLayer>,
}

impl Circuit {
    pub fn new(n_particles: usize, initial: StateVector) -> Result<Self> {
        if initial.n_particles() != n_particles {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_particles,
                found: initial.dim(),
            });
        }
        Ok(Circuit { n_particles, initial, params: Vec::new(), layers: Vec::new() })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn layers(&self) -> &[CircuitLayer] {
        &self.layers
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn add_param(&mut self, name: &str, value: f64, owner: &str) -> Result<ParamId> {
        if self.params.iter().any(|p| p.name == name) {
            return Err(Error::DuplicateParam(name.to_string()));
        }
        self.params.push(Param { name: name.to_string(), value, owner: owner.to_string() });
        Ok(ParamId(self.params.len() - 1))
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn param_value(&self, id: ParamId) -> f64 {
        self.params[id.0].value
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.n_particles {
            return Err(Error::ParticleOutOfRange {
                particle: target,
                n_particles: self.n_particles,
            });
        }
        Ok(())
    }

    /// Append a layer of simultaneous single-particle gates.  Owners default
    /// to the target particle's label.
    pub fn push_singles(&mut self, gates: Vec<(usize, GateForm, Option<String>)>) -> Result<()> {
        let mut seen = vec![false; self.n_particles];
        let mut layer = Vec::with_capacity(gates.len());
        for (target, form, owner) in gates {
            self.check_target(target)?;
            if seen[target] {
                return Err(Error::DuplicateTarget { particle: target });
            }
            seen[target] = true;
            form.check_params(self.params.len())?;
            let matrix = form.matrix(&self.params)?;
            layer.push(SingleParticleGate {
                target,
                form,
                owner: owner.unwrap_or_else(|| particle_label(target)),
                matrix,
            });
        }
        self.layers.push(CircuitLayer::Singles(layer));
        Ok(())
    }

    /// Append a one-gate layer.
    pub fn push_single(&mut self, target: usize, form: GateForm) -> Result<()> {
        self.push_singles(vec![(target, form, None)])
    }

    /// Append a controlled-phase layer; `controlled_modes` defaults to (1, 1).
    pub fn push_controlled(
        &mut self,
        particles: (usize, usize),
        controlled_modes: Option<(u8, u8)>,
        phase: LinExpr,
        owner: Option<String>,
    ) -> Result<()> {
        self.check_target(particles.0)?;
        self.check_target(particles.1)?;
        if particles.0 == particles.1 {
            return Err(Error::ControlEqualsTarget { particle: particles.0 });
        }
        phase.check_params(self.params.len())?;
        let theta = phase.eval(&self.params);
        let owner = owner.unwrap_or_else(|| {
            let mut s = particle_label(particles.0);
            s.push_str(&particle_label(particles.1));
            s
        });
        self.layers.push(CircuitLayer::Controlled(ControlledPhaseGate {
            particles,
            controlled_modes: controlled_modes.unwrap_or((1, 1)),
            phase,
            owner,
            theta,
        }));
        Ok(())
    }

    /// Update a parameter value, rebuilding every dependent gate matrix.
    /// Unitarity is revalidated, so a perturbation that breaks a polar-form
    /// matrix surfaces here.
    pub fn set_param(&mut self, id: ParamId, value: f64) -> Result<()> {
        if id.0 >= self.params.len() {
            return Err(Error::UnknownParam(format!("#{}", id.0)));
        }
        self.params[id.0].value = value;
        let params = self.params.clone();
        for layer in &mut self.layers {
            match layer {
                CircuitLayer::Singles(gates) => {
                    for g in gates.iter_mut() {
                        if g.form.depends_on(id) {
                            g.matrix = g.form.matrix(&params)?;
                        }
                    }
                }
                CircuitLayer::Controlled(g) => {
                    if g.phase.depends_on(id) {
                        g.theta = g.phase.eval(&params);
                    }
                }
            }
        }
        Ok(())
    }

    /// Clone with one parameter changed.
    pub fn with_param(&self, id: ParamId, value: f64) -> Result<Circuit> {
        let mut c = self.clone();
        c.set_param(id, value)?;
        Ok(c)
    }

    /// Clone with a layer spliced in at `pos` (0..=len).
    pub fn with_layer_inserted(&self, pos: usize, layer: CircuitLayer) -> Result<Circuit> {
        if pos > self.layers.len() {
            return Err(Error::LayerOutOfRange { layer: pos, n_layers: self.layers.len() });
        }
        self.validate_layer(&layer)?;
        let mut c = self.clone();
        c.layers.insert(pos, layer);
        Ok(c)
    }

    /// Clone with the layer at `pos` removed.
    pub fn with_layer_removed(&self, pos: usize) -> Result<Circuit> {
        if pos >= self.layers.len() {
            return Err(Error::LayerOutOfRange { layer: pos, n_layers: self.layers.len() });
        }
        let mut c = self.clone();
        c.layers.remove(pos);
        Ok(c)
    }

    fn validate_layer(&self, layer: &CircuitLayer) -> Result<()> {
        match layer {
            CircuitLayer::Singles(gates) => {
                let mut seen = vec![false; self.n_particles];
                for g in gates {
                    self.check_target(g.target)?;
                    if seen[g.target] {
                        return Err(Error::DuplicateTarget { particle: g.target });
                    }
                    seen[g.target] = true;
                    g.form.check_params(self.params.len())?;
                    g.matrix.check_unitary()?;
                }
                Ok(())
            }
            CircuitLayer::Controlled(g) => {
                self.check_target(g.particles.0)?;
                self.check_target(g.particles.1)?;
                if g.particles.0 == g.particles.1 {
                    return Err(Error::ControlEqualsTarget { particle: g.particles.0 });
                }
                g.phase.check_params(self.params.len())
            }
        }
    }

    /// Apply one layer to a state in place.
    pub fn apply_layer(&self, state: &mut StateVector, layer: &CircuitLayer) -> Result<()> {
        match layer {
            CircuitLayer::Singles(gates) => {
                for g in gates {
                    state.apply_single(g.target, &g.matrix)?;
                }
            }
            CircuitLayer::Controlled(g) => {
                state.apply_controlled_phase(g.particles, g.controlled_modes, g.theta)?;
            }
        }
        Ok(())
    }

    /// All layer-boundary states: element 0 is the initial state, element
    /// `k+1` the state after layer `k`.  Norm is checked at every boundary.
    pub fn evolve(&self) -> Result<Vec<StateVector>> {
        let mut states = Vec::with_capacity(self.layers.len() + 1);
        let mut current = self.initial.clone();
        states.push(current.clone());
        for (step, layer) in self.layers.iter().enumerate() {
            self.apply_layer(&mut current, layer)?;
            let norm_sq = current.norm_sq();
            if (norm_sq - 1.0).abs() > NORM_TOL {
                return Err(Error::NormDrift { step, norm_sq });
            }
            states.push(current.clone());
        }
        Ok(states)
    }

    /// The state after the last layer.
    pub fn final_state(&self) -> Result<StateVector> {
        let mut current = self.initial.clone();
        for (step, layer) in self.layers.iter().enumerate() {
            self.apply_layer(&mut current, layer)?;
            let norm_sq = current.norm_sq();
            if (norm_sq - 1.0).abs() > NORM_TOL {
                return Err(Error::NormDrift { step, norm_sq });
            }
        }
        Ok(current)
    }

    /// Index of the last controlled layer with exactly one side in `sub`,
    /// given as a sorted particle list.
    pub fn last_layer_coupling(&self, sub: &[usize]) -> Option<usize> {
        self.layers
            .iter()
            .enumerate()
            .rev()
            .find(|(_, layer)| match layer {
                CircuitLayer::Controlled(g) => {
                    let a = sub.contains(&g.particles.0);
                    let b = sub.contains(&g.particles.1);
                    a != b
                }
                _ => false,
            })
            .map(|(i, _)| i)
    }
}

/// Convenience: a fixed-matrix gate layer on one particle.
pub fn fixed_gate(target: usize, matrix: Mat2) -> (usize, GateForm, Option<String>) {
    (target, GateForm::Fixed(matrix), None)
}

/// Two particles, one interaction: simultaneous preparation unitaries, a
/// controlled phase, and a final gate on particle 0.
pub fn one_phase_circuit(a1: Mat2, b1: Mat2, theta: f64, a2: Mat2) -> Result<Circuit> {
    let mut circuit = Circuit::new(2, StateVector::basis(2, 0))?;
    circuit.push_singles(vec![fixed_gate(0, a1), fixed_gate(1, b1)])?;
    circuit.push_controlled((0, 1), None, LinExpr::constant(theta), None)?;
    circuit.push_single(0, GateForm::Fixed(a2))?;
    Ok(circuit)
}

/// Two particles, two interactions: preparation, a controlled phase, one
/// further gate on each particle in separate layers, a second controlled
/// phase, and a final gate on particle 0.
#[allow(clippy::too_many_arguments)]
pub fn two_phase_circuit(
    a1: Mat2,
    b1: Mat2,
    theta1: f64,
    a2: Mat2,
    b2: Mat2,
    theta2: f64,
    a3: Mat2,
) -> Result<Circuit> {
    let mut circuit = Circuit::new(2, StateVector::basis(2, 0))?;
    circuit.push_singles(vec![fixed_gate(0, a1), fixed_gate(1, b1)])?;
    circuit.push_controlled((0, 1), None, LinExpr::constant(theta1), None)?;
    circuit.push_single(0, GateForm::Fixed(a2))?;
    circuit.push_single(1, GateForm::Fixed(b2))?;
    circuit.push_controlled((0, 1), None, LinExpr::constant(theta2), None)?;
    circuit.push_single(0, GateForm::Fixed(a3))?;
    Ok(circuit)
}
