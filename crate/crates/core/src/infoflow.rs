//! Licensed-information bookkeeping and the hypothesis-violation search.
//!
//! The locality hypothesis under test says a subsystem's statistics may draw
//! only on "licensed" data: its own gate parameters plus the amplitudes of
//! the basis components that actually undergo each interaction it takes part
//! in. The search looks for a direction in external-parameter space that
//! leaves every licensed quantity stationary while still moving the
//! subsystem's marginal — a certified counterexample to that hypothesis.

use crate::circuit::{Circuit, CircuitLayer, GateForm, LinExpr, ParamId};
use crate::error::Error;
use crate::linalg;
use crate::prob::{marginal_distribution, Subsystem};
use crate::state::{mode_of, C64};
use crate::Result;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float; // float methods for no_std builds

/// Default central-difference step for unit-scale angle parameters.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Step used to re-measure drift and shift along the candidate direction.
pub const PROBE_STEP: f64 = 1e-4;
/// Singular values at or below this are treated as null directions.
pub const NULL_SPACE_TOL: f64 = 1e-9;
/// A violation verdict requires the licensed amplitudes to move slower than
/// this along the candidate direction...
pub const DRIFT_TOL: f64 = 1e-8;
/// ...while the marginal moves faster than this.
pub const SHIFT_MIN: f64 = 1e-6;

/// One basis component undergoing a controlled interaction, with its
/// amplitude read from the state just before the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct LicensedEntry {
    pub layer: usize,
    pub basis_index: usize,
    pub amplitude: C64,
}

/// Everything the locality hypothesis licenses the subsystem to know: the
/// interacting components' amplitudes plus its own parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LicensedSet {
    pub entries: Vec<LicensedEntry>,
    /// Parameters whose owner label involves only subsystem particles.
    pub owned_params: Vec<ParamId>,
}

/// Collect the licensed amplitudes of `sub`: for every controlled-phase
/// layer touching the subsystem, the amplitudes of the basis states whose
/// gate particles both occupy their controlled modes, evaluated just before
/// the gate (exactly one such state in a two-particle register).
pub fn licensed_coefficients(circuit: &Circuit, sub: &Subsystem) -> Result<LicensedSet> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let boundaries = circuit.evolve()?;

    let mut entries = Vec::new();
    for (layer_idx, layer) in circuit.layers().iter().enumerate() {
        let g = match layer {
            CircuitLayer::Controlled(g) => g,
            _ => continue,
        };
        if !sub.contains(g.particles.0) && !sub.contains(g.particles.1) {
            continue;
        }
        let pre = &boundaries[layer_idx];
        for (idx, amp) in pre.amplitudes().iter().enumerate() {
            if mode_of(idx, g.particles.0, n) == g.controlled_modes.0
                && mode_of(idx, g.particles.1, n) == g.controlled_modes.1
            {
                entries.push(LicensedEntry { layer: layer_idx, basis_index: idx, amplitude: *amp });
            }
        }
    }

    let sub_labels: Vec<String> =
        sub.particles().iter().map(|&p| crate::circuit::particle_label(p)).collect();
    let owned_params = circuit
        .params()
        .iter()
        .enumerate()
        .filter(|(_, param)| {
            !param.owner.is_empty()
                && split_owner(&param.owner).all(|label| sub_labels.iter().any(|l| *l == label))
        })
        .map(|(i, _)| ParamId(i))
        .collect();

    Ok(LicensedSet { entries, owned_params })
}

/// Owner labels are concatenated particle labels ("A", "AB", "P27B", ...).
fn split_owner(owner: &str) -> impl Iterator<Item = String> + '_ {
    let mut rest = owner;
    core::iter::from_fn(move || {
        if rest.is_empty() {
            return None;
        }
        let mut end = 1;
        let bytes = rest.as_bytes();
        if bytes[0] == b'P' && rest.len() > 1 && bytes[1].is_ascii_digit() {
            end = 1 + rest[1..].bytes().take_while(|b| b.is_ascii_digit()).count();
        }
        let (head, tail) = rest.split_at(end);
        rest = tail;
        Some(String::from(head))
    })
}

fn check_param(circuit: &Circuit, param: ParamId) -> Result<()> {
    if param.0 >= circuit.params().len() {
        return Err(Error::UnknownParam(alloc::format!("parameter id {}", param.0)));
    }
    Ok(())
}

/// Central-difference gradient of the subsystem's marginal with respect to
/// one parameter: one entry per outcome.
pub fn marginal_sensitivity(
    circuit: &Circuit,
    sub: &Subsystem,
    param: ParamId,
    eps: f64,
) -> Result<Vec<f64>> {
    check_param(circuit, param)?;
    if !(eps > 0.0) {
        return Err(Error::BadParameter(String::from("step must be positive")));
    }
    let base = circuit.param_value(param);
    let plus = circuit.with_param(param, base + eps)?;
    let minus = circuit.with_param(param, base - eps)?;
    let p_plus = marginal_distribution(&plus.final_state()?, sub)?;
    let p_minus = marginal_distribution(&minus.final_state()?, sub)?;
    Ok(p_plus
        .probs
        .iter()
        .zip(&p_minus.probs)
        .map(|(a, b)| (a - b) / (2.0 * eps))
        .collect())
}

/// Row-major real matrix produced by the finite-difference plumbing.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// d(Re a_i, Im a_i)/d(params): 2 rows per licensed amplitude, one column
/// per parameter, by central differences.
pub fn licensed_jacobian(
    circuit: &Circuit,
    sub: &Subsystem,
    params: &[ParamId],
    eps: f64,
) -> Result<Jacobian> {
    if !(eps > 0.0) {
        return Err(Error::BadParameter(String::from("step must be positive")));
    }
    let k = licensed_coefficients(circuit, sub)?.entries.len();
    let rows = 2 * k;
    let cols = params.len();
    let mut data = vec![0.0; rows * cols];
    for (j, &param) in params.iter().enumerate() {
        check_param(circuit, param)?;
        let base = circuit.param_value(param);
        let plus = licensed_coefficients(&circuit.with_param(param, base + eps)?, sub)?;
        let minus = licensed_coefficients(&circuit.with_param(param, base - eps)?, sub)?;
        for i in 0..k {
            let d = (plus.entries[i].amplitude - minus.entries[i].amplitude) / (2.0 * eps);
            data[(2 * i) * cols + j] = d.re;
            data[(2 * i + 1) * cols + j] = d.im;
        }
    }
    Ok(Jacobian { rows, cols, data })
}

/// Orthonormal directions in parameter space along which every licensed
/// amplitude is stationary to first order.
pub fn null_directions(jacobian: &Jacobian) -> Vec<Vec<f64>> {
    if jacobian.rows == 0 {
        // Nothing is licensed, so every direction qualifies.
        return (0..jacobian.cols)
            .map(|j| {
                let mut e = vec![0.0; jacobian.cols];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    linalg::svd(&jacobian.data, jacobian.rows, jacobian.cols).null_space(NULL_SPACE_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A direction was found that moves the marginal without moving any
    /// licensed quantity.
    Violated,
    NotFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub params: Vec<ParamId>,
    /// Unit vector over `params`; empty when the licensed amplitudes pin
    /// down every direction.
    pub direction: Vec<f64>,
    /// Number of independent licensed-stationary directions.
    pub null_dimension: usize,
    /// max_i |d(licensed amplitude i)/ds| along the direction.
    pub licensed_drift: f64,
    /// max_a |dP(a)/ds| along the direction.
    pub marginal_shift: f64,
    pub verdict: Verdict,
}

fn perturbed(circuit: &Circuit, params: &[ParamId], direction: &[f64], step: f64) -> Result<Circuit> {
    let mut out = circuit.clone();
    for (&param, &component) in params.iter().zip(direction) {
        let base = circuit.param_value(param);
        out.set_param(param, base + step * component)?;
    }
    Ok(out)
}

/// Search for a first-order certificate that the subsystem's marginal uses
/// more than its licensed information: a direction in external-parameter
/// space that is in the licensed Jacobian's null space yet carries a nonzero
/// marginal gradient. The candidate direction is the null-space direction of
/// maximal marginal response; drift and shift are then re-measured along it
/// at [`PROBE_STEP`].
pub fn hypothesis_violation_search(
    circuit: &Circuit,
    sub: &Subsystem,
    params: &[ParamId],
    eps: f64,
) -> Result<ViolationReport> {
    if params.is_empty() {
        return Err(Error::BadParameter(String::from(
            "at least one external parameter is required",
        )));
    }
    let jacobian = licensed_jacobian(circuit, sub, params, eps)?;
    let null = null_directions(&jacobian);
    let null_dimension = null.len();
    if null.is_empty() {
        return Ok(ViolationReport {
            params: params.to_vec(),
            direction: Vec::new(),
            null_dimension,
            licensed_drift: 0.0,
            marginal_shift: 0.0,
            verdict: Verdict::NotFound,
        });
    }

    // Marginal gradient matrix: one row per outcome.
    let dim = 1usize << sub.len();
    let mut grad = vec![vec![0.0; params.len()]; dim];
    for (j, &param) in params.iter().enumerate() {
        let g = marginal_sensitivity(circuit, sub, param, eps)?;
        for (a, row) in grad.iter_mut().enumerate() {
            row[j] = g[a];
        }
    }

    // Response of each outcome to each null direction; the best direction is
    // the top right-singular vector of this matrix, mapped back to parameter
    // space.
    let mut response = vec![0.0; dim * null_dimension];
    for a in 0..dim {
        for (l, dir) in null.iter().enumerate() {
            response[a * null_dimension + l] =
                grad[a].iter().zip(dir).map(|(g, d)| g * d).sum::<f64>();
        }
    }
    let top = &linalg::svd(&response, dim, null_dimension).vectors[0];
    let mut direction = vec![0.0; params.len()];
    for (l, dir) in null.iter().enumerate() {
        for (d, n) in direction.iter_mut().zip(dir) {
            *d += top[l] * n;
        }
    }
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > 0.0 {
        for d in &mut direction {
            *d /= norm;
        }
    }

    // Re-measure both quantities along the candidate direction.
    let plus = perturbed(circuit, params, &direction, PROBE_STEP)?;
    let minus = perturbed(circuit, params, &direction, -PROBE_STEP)?;
    let lic_plus = licensed_coefficients(&plus, sub)?;
    let lic_minus = licensed_coefficients(&minus, sub)?;
    let licensed_drift = lic_plus
        .entries
        .iter()
        .zip(&lic_minus.entries)
        .map(|(p, m)| (p.amplitude - m.amplitude).norm() / (2.0 * PROBE_STEP))
        .fold(0.0, f64::max);
    let p_plus = marginal_distribution(&plus.final_state()?, sub)?;
    let p_minus = marginal_distribution(&minus.final_state()?, sub)?;
    let marginal_shift = p_plus
        .probs
        .iter()
        .zip(&p_minus.probs)
        .map(|(p, m)| ((p - m) / (2.0 * PROBE_STEP)).abs())
        .fold(0.0, f64::max);

    let verdict = if licensed_drift < DRIFT_TOL && marginal_shift > SHIFT_MIN {
        Verdict::Violated
    } else {
        Verdict::NotFound
    };
    Ok(ViolationReport {
        params: params.to_vec(),
        direction,
        null_dimension,
        licensed_drift,
        marginal_shift,
        verdict,
    })
}

/// The Bell-pair measurement scenario: shared Bell state, one balanced gate
/// with free phases on the far particle, a controlled phase, and a Hadamard
/// on the measured particle. Returns the circuit plus the ids of ("b1",
/// "b2", "t1").
pub fn bell_scenario_circuit(b1: f64, b2: f64, t1: f64) -> Result<(Circuit, [ParamId; 3])> {
    let mut circuit = Circuit::new(2, crate::state::StateVector::bell())?;
    let id_b1 = circuit.add_param("b1", b1, "B")?;
    let id_b2 = circuit.add_param("b2", b2, "B")?;
    let id_t1 = circuit.add_param("t1", t1, "AB")?;
    let m = core::f64::consts::FRAC_1_SQRT_2;
    circuit.push_singles(vec![(
        1,
        GateForm::Polar {
            mags: [m, m, m, m],
            phases: [
                LinExpr::param(id_b1),
                LinExpr::param(id_b2),
                LinExpr::param(id_b2).scaled(-1.0),
                LinExpr::param(id_b1).scaled(-1.0).plus_constant(core::f64::consts::PI),
            ],
        },
        Some(String::from("B")),
    )])?;
    circuit.push_controlled((0, 1), None, LinExpr::param(id_t1), None)?;
    circuit.push_single(0, GateForm::Hadamard)?;
    Ok((circuit, [id_b1, id_b2, id_t1]))
}

/// Oracle-validated closed form for the scenario's P(A=0).
pub fn bell_closed_form(b1: f64, b2: f64, t1: f64) -> f64 {
    0.5 + 0.25 * ((b2 - b1).cos() - (t1 + b2 - b1).cos())
}

/// The same quantity as printed in the source analysis,
/// `1/2 [1 - Re{e^{i b2} e^{-i b1} (e^{i t1} - 1)}]`; kept for comparison —
/// it disagrees with the direct expansion by a factor of 1/2 on the Re{}
/// term and can leave [0, 1].
pub fn bell_printed_form(b1: f64, b2: f64, t1: f64) -> f64 {
    let inner = C64::from_polar(1.0, b2 - b1) * (C64::from_polar(1.0, t1) - C64::new(1.0, 0.0));
    0.5 * (1.0 - inner.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellScenario {
    pub b1: f64,
    pub b2: f64,
    pub t1: f64,
    pub p0_simulated: f64,
    pub p1_simulated: f64,
    pub p0_closed_form: f64,
    /// The closed form as printed in the source analysis (see
    /// [`bell_printed_form`]).
    pub p0_printed_form: f64,
    /// Whether the printed form agrees with the simulation at this point.
    pub printed_form_consistent: bool,
}

/// Evaluate the Bell scenario by simulation and by closed form.
pub fn bell_scenario(b1: f64, b2: f64, t1: f64) -> Result<BellScenario> {
    let (circuit, _) = bell_scenario_circuit(b1, b2, t1)?;
    let marginal = marginal_distribution(&circuit.final_state()?, &Subsystem::single(0))?;
    let p0_printed_form = bell_printed_form(b1, b2, t1);
    Ok(BellScenario {
        b1,
        b2,
        t1,
        p0_simulated: marginal.probs[0],
        p1_simulated: marginal.probs[1],
        p0_closed_form: bell_closed_form(b1, b2, t1),
        p0_printed_form,
        printed_form_consistent: (p0_printed_form - marginal.probs[0]).abs() <= 1e-9,
    })
}
