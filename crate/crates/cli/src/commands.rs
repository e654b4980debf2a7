//! Subcommand implementations, usable both from `main` and from tests.
//!
//! Each command returns its `results` JSON plus a `violation` flag; the
//! binary maps `violation` to exit code 1 for the checker commands and any
//! [`CliError`] to exit code 2.

use crate::dsl;
use crate::scenario::Scenario;
use dualrail_core::bohm::{
    density_std, effective_wavefunction_monitor, evolve_pde, equivariance_1d, equivariance_2d,
    guide_full_trajectories, guide_marginal_trajectories, sample_density_1d, sample_density_2d,
    Evolution, Grid1D,
};
use dualrail_core::circuit::particle_label;
use dualrail_core::infoflow::{
    bell_scenario, bell_scenario_circuit, hypothesis_violation_search, Verdict, DEFAULT_FD_STEP,
};
use dualrail_core::lhv::{miss_split, partial_collapse_model};
use dualrail_core::paths::{
    classify_interference, endpoint_amplitude_sums, path_count_estimate, remnant_invariance_check,
};
use dualrail_core::prob::{joint_distribution, marginal_distribution, no_signaling_check, Distribution, Subsystem};
use dualrail_core::rng::rng_from_seed;
use dualrail_core::{Circuit, CircuitLayer, ParamId, StateVector, C64};
use serde_json::{json, Value};
use std::io::Write as _;
use std::path::Path;

/// Largest reconstruction residual still reported as local-interpretable.
pub const LHV_TOL: f64 = 1e-9;
/// Largest path-sum mismatch `paths --verify` accepts.
pub const PATH_VERIFY_TOL: f64 = 1e-9;
/// Largest marginal deviation `nosignal` accepts.
pub const NOSIGNAL_TOL: f64 = 1e-9;
/// Total-variation budget for the ensemble at t = 0 (sampling noise only).
pub const MARGINAL_TV_INITIAL_TOL: f64 = 0.03;
/// Total-variation budget for the guided marginal ensemble at t_final.
pub const MARGINAL_TV_FINAL_TOL: f64 = 0.05;
/// Total-variation budget for the guided full-configuration ensemble.
pub const FULL_TV_TOL: f64 = 0.08;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: dualrail_core::Error,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

fn core_err(context: &str) -> impl Fn(dualrail_core::Error) -> CliError + '_ {
    move |source| CliError::Core { context: context.to_string(), source }
}

/// A command's JSON results plus whether a checker found a violation.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub results: Value,
    pub violation: bool,
}

impl CommandOutcome {
    fn ok(results: Value) -> Self {
        CommandOutcome { results, violation: false }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Read and parse a circuit file, with the path in any diagnostic.
pub fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    dsl::parse_circuit(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Read and parse a scenario file.
pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn subsystem(particles: &[usize], circuit: &Circuit) -> CliResult<Subsystem> {
    let sub = Subsystem::new(particles.to_vec()).map_err(core_err("--sub"))?;
    sub.check_against(circuit.n_particles())
        .map_err(core_err("--sub"))?;
    Ok(sub)
}

fn bits_label(index: usize, width: usize) -> String {
    (0..width)
        .map(|p| if (index >> (width - 1 - p)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn dist_json(d: &Distribution) -> Value {
    let width = d.particles.len();
    json!({
        "particles": d.particles,
        "outcomes": (0..d.probs.len()).map(|k| bits_label(k, width)).collect::<Vec<_>>(),
        "probabilities": d.probs,
    })
}

fn c64_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn amplitudes_json(state: &StateVector) -> Value {
    Value::Array(state.amplitudes().iter().map(|&z| c64_json(z)).collect())
}

// ---------------------------------------------------------------------------
// Circuit commands
// ---------------------------------------------------------------------------

/// `simulate`: run the circuit and report the final state.
pub fn simulate(circuit: &Circuit) -> CliResult<CommandOutcome> {
    let final_state = circuit.final_state().map_err(core_err("simulate"))?;
    let joint = joint_distribution(&final_state);
    Ok(CommandOutcome::ok(json!({
        "n_particles": circuit.n_particles(),
        "layers": circuit.layers().len(),
        "final_amplitudes": amplitudes_json(&final_state),
        "joint": dist_json(&joint),
    })))
}

/// `marginals`: outcome distribution of a subsystem after the full circuit.
pub fn marginals(circuit: &Circuit, sub_particles: &[usize]) -> CliResult<CommandOutcome> {
    let sub = subsystem(sub_particles, circuit)?;
    let final_state = circuit.final_state().map_err(core_err("marginals"))?;
    let marginal = marginal_distribution(&final_state, &sub).map_err(core_err("marginals"))?;
    Ok(CommandOutcome::ok(json!({
        "marginal": dist_json(&marginal),
    })))
}

/// `lhv`: reconstruct the subsystem marginal from partial collapses of the
/// crossing gates.  Violation when the residual exceeds `tol`.
pub fn lhv(circuit: &Circuit, sub_particles: &[usize], tol: f64) -> CliResult<CommandOutcome> {
    let sub = subsystem(sub_particles, circuit)?;
    let model = partial_collapse_model(circuit, &sub).map_err(core_err("lhv"))?;
    let local = model.is_local(tol);
    let results = json!({
        "tol": tol,
        "residual": model.residual,
        "verdict": if local { "local-interpretable" } else { "not-local-interpretable" },
        "heuristic": model.heuristic,
        "crossing_layers": model.crossing_layers,
        "branch_count": model.branches.len(),
        "branch_weights": model.branches.iter().map(|b| b.weight).collect::<Vec<_>>(),
        "reconstructed": dist_json(&model.reconstructed),
        "exact": dist_json(&model.exact),
    });
    Ok(CommandOutcome { results, violation: !local })
}

/// `miss-split`: split one controlled layer's marginal into the collapse
/// (miss) part and the interference remainder.  Informational; never a
/// violation.
pub fn miss_split_cmd(
    circuit: &Circuit,
    sub_particles: &[usize],
    layer: Option<usize>,
) -> CliResult<CommandOutcome> {
    let sub = subsystem(sub_particles, circuit)?;
    let layer = match layer {
        Some(l) => l,
        None => circuit
            .layers()
            .iter()
            .rposition(|l| matches!(l, CircuitLayer::Controlled(_)))
            .ok_or_else(|| CliError::Input("circuit has no controlled layer".into()))?,
    };
    let report = miss_split(circuit, &sub, layer).map_err(core_err("miss-split"))?;
    let cross = report.cross_term_check.as_ref().map(|c| {
        json!({
            "residual": c.residual,
            "terms": c
                .terms
                .iter()
                .map(|t| json!({"inner": c64_json(t.inner), "predicted_shift": t.predicted_shift}))
                .collect::<Vec<_>>(),
        })
    });
    Ok(CommandOutcome::ok(json!({
        "layer": report.layer,
        "theta": report.theta,
        "exact": dist_json(&report.exact),
        "miss": dist_json(&report.miss),
        "interference": report.interference,
        "cross_term_check": cross,
    })))
}

/// `infoflow`: look for a direction in parameter space that moves the
/// subsystem marginal while every licensed coefficient is stationary.
/// Violation when one is found.
pub fn infoflow(
    circuit: &Circuit,
    sub_particles: &[usize],
    param_names: Option<&[String]>,
) -> CliResult<CommandOutcome> {
    let sub = subsystem(sub_particles, circuit)?;
    let params: Vec<ParamId> = match param_names {
        Some(names) => {
            let mut ids = Vec::with_capacity(names.len());
            for name in names {
                ids.push(
                    circuit
                        .param_id(name)
                        .ok_or_else(|| CliError::Input(format!("unknown parameter `{name}`")))?,
                );
            }
            ids
        }
        None => {
            // Default: parameters owned entirely outside the subsystem.
            let sub_labels: Vec<String> =
                sub.particles().iter().map(|&p| particle_label(p)).collect();
            circuit
                .params()
                .iter()
                .enumerate()
                .filter(|(_, p)| !sub_labels.iter().any(|l| p.owner.contains(l.as_str())))
                .map(|(i, _)| ParamId(i))
                .collect()
        }
    };
    if params.is_empty() {
        return Err(CliError::Input(
            "no external parameters to vary; declare tagged params or pass --params".into(),
        ));
    }
    let report =
        hypothesis_violation_search(circuit, &sub, &params, DEFAULT_FD_STEP).map_err(core_err("infoflow"))?;
    let violated = report.verdict == Verdict::Violated;

    // When the circuit is exactly the two-particle interference scenario
    // with parameters (b1, b2, t1), attach the closed-form comparison,
    // including whether the commonly printed closed form matches.
    let closed_form = closed_form_section(circuit)?;

    let results = json!({
        "params": report.params.iter().map(|p| circuit.params()[p.0].name.clone()).collect::<Vec<_>>(),
        "direction": report.direction,
        "null_dimension": report.null_dimension,
        "licensed_drift": report.licensed_drift,
        "marginal_shift": report.marginal_shift,
        "verdict": if violated { "violated" } else { "not-found" },
        "closed_form_check": closed_form,
    });
    Ok(CommandOutcome { results, violation: violated })
}

fn closed_form_section(circuit: &Circuit) -> CliResult<Option<Value>> {
    let (Some(b1), Some(b2), Some(t1)) = (
        circuit.param_id("b1"),
        circuit.param_id("b2"),
        circuit.param_id("t1"),
    ) else {
        return Ok(None);
    };
    let (b1v, b2v, t1v) = (
        circuit.param_value(b1),
        circuit.param_value(b2),
        circuit.param_value(t1),
    );
    let (reference, _) = bell_scenario_circuit(b1v, b2v, t1v).map_err(core_err("infoflow"))?;
    if !dsl::circuits_structurally_equal(circuit, &reference) {
        return Ok(None);
    }
    let scenario = bell_scenario(b1v, b2v, t1v).map_err(core_err("infoflow"))?;
    Ok(Some(json!({
        "p0_simulated": scenario.p0_simulated,
        "p0_closed_form": scenario.p0_closed_form,
        "p0_printed_form": scenario.p0_printed_form,
        "printed_form_consistent": scenario.printed_form_consistent,
    })))
}

/// `paths`: enumerate discrete mode histories.  With `--verify`, compare the
/// coherent path sums against the state vector (violation on mismatch).
pub fn paths_cmd(
    circuit: &Circuit,
    sub_particles: &[usize],
    verify: bool,
    interference: bool,
    tol: f64,
) -> CliResult<CommandOutcome> {
    let estimate = path_count_estimate(circuit);
    let sums = endpoint_amplitude_sums(circuit).map_err(core_err("paths"))?;
    let mut violation = false;
    let mut results = serde_json::Map::new();
    results.insert("path_count_estimate".into(), json!(estimate));
    results.insert(
        "endpoint_sums".into(),
        Value::Array(sums.iter().map(|&z| c64_json(z)).collect()),
    );
    results.insert(
        "endpoint_probabilities".into(),
        json!(sums.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()),
    );

    if verify {
        let final_state = circuit.final_state().map_err(core_err("paths"))?;
        let max_diff = sums
            .iter()
            .zip(final_state.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        violation = max_diff > tol;
        results.insert(
            "verify".into(),
            json!({
                "max_amplitude_diff": max_diff,
                "tol": tol,
                "pass": !violation,
            }),
        );
    }

    if interference {
        let sub = subsystem(sub_particles, circuit)?;
        let report = classify_interference(circuit, &sub).map_err(core_err("paths"))?;
        let groups: Vec<Value> = report
            .groups
            .iter()
            .map(|g| {
                json!({
                    "endpoint": bits_label(g.endpoint, circuit.n_particles()),
                    "sub_outcome": bits_label(g.sub_outcome, sub.len()),
                    "path_count": g.paths.len(),
                    "coherent_sum": c64_json(g.coherent_sum),
                })
            })
            .collect();
        results.insert(
            "interference".into(),
            json!({
                "groups": groups,
                "non_interfering_pairs": report.non_interfering,
            }),
        );
    }

    Ok(CommandOutcome { results: Value::Object(results), violation })
}

/// `nosignal`: splice random external unitaries after the last coupling and
/// check the subsystem marginal is unmoved.  Violation when it moves more
/// than `tol`.  With `with_paths`, repeat the check through the discrete
/// path-sum route.
#[allow(clippy::too_many_arguments)]
pub fn nosignal(
    circuit: &Circuit,
    sub_particles: &[usize],
    trials: usize,
    seed: u64,
    tol: f64,
    insert: Option<usize>,
    with_paths: bool,
) -> CliResult<CommandOutcome> {
    if trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let sub = subsystem(sub_particles, circuit)?;
    let report = no_signaling_check(circuit, &sub, trials, seed, tol, insert)
        .map_err(core_err("nosignal"))?;
    let mut violation = !report.pass;
    let mut results = serde_json::Map::new();
    results.insert(
        "state_route".into(),
        json!({
            "trials": report.trials,
            "insert_layer": report.insert_layer,
            "max_deviation": report.max_deviation,
            "tol": report.tol,
            "pass": report.pass,
        }),
    );
    if with_paths {
        let remnant = remnant_invariance_check(circuit, &sub, trials, seed, insert)
            .map_err(core_err("nosignal"))?;
        violation = violation || !remnant.marginal_invariant;
        results.insert(
            "path_route".into(),
            json!({
                "trials": remnant.trials,
                "insert_layer": remnant.insert_layer,
                "last_coupling_layer": remnant.last_coupling_layer,
                "max_marginal_shift": remnant.max_marginal_shift,
                "max_endpoint_shift": remnant.max_endpoint_shift,
                "marginal_invariant": remnant.marginal_invariant,
            }),
        );
    }
    Ok(CommandOutcome { results: Value::Object(results), violation })
}

// ---------------------------------------------------------------------------
// Scenario command
// ---------------------------------------------------------------------------

/// Everything `bohm` computes, in one typed bundle so tests can assert on
/// fields instead of digging through JSON.
#[derive(Debug)]
pub struct BohmRun {
    pub evolution: Evolution,
    pub results: Value,
}

/// `bohm`: evolve the scenario, optionally guide a sampled ensemble and
/// check equivariance, optionally run the conditional-slice monitor, and
/// optionally dump the fields for plotting.
pub fn run_bohm(scenario: &Scenario, fields_dir: Option<&Path>) -> CliResult<BohmRun> {
    let grid = scenario.grid().map_err(core_err("scenario grid"))?;
    let wave = scenario
        .initial_wavefunction()
        .map_err(core_err("scenario initial state"))?;
    let potential = scenario.potential_spec();
    potential.validate().map_err(core_err("scenario potential"))?;
    let params = scenario.evolve_params();
    let evolution = evolve_pde(&wave, &potential, &params).map_err(core_err("evolution"))?;

    let rho1_initial = wave.marginal_density1();
    let rho1_final = evolution.last().marginal_density1();
    let mut results = serde_json::Map::new();
    results.insert(
        "evolution".into(),
        json!({
            "duration": evolution.duration(),
            "snapshots": evolution.times.len(),
            "norm_drift": evolution.norm_drift,
            "initial_width1": density_std(&grid, &rho1_initial),
            "final_width1": density_std(&grid, &rho1_final),
            "final_mode_entanglement_entropy": evolution.last().mode_entanglement_entropy(),
        }),
    );

    if scenario.ensemble.samples > 0 {
        results.insert("ensemble".into(), run_ensemble(scenario, &grid, &evolution)?);
    }

    if let Some(monitor) = &scenario.monitor {
        let conditioning = guide_full_trajectories(
            &evolution,
            &[(monitor.start[0], monitor.start[1])],
            monitor.substeps,
        )
        .map_err(core_err("monitor trajectory"))?;
        let y_path = conditioning.second_coordinate(0);
        let report = effective_wavefunction_monitor(
            &evolution,
            &y_path,
            (monitor.window[0], monitor.window[1]),
            &potential,
            monitor.tol,
        )
        .map_err(core_err("monitor"))?;
        results.insert(
            "monitor".into(),
            json!({
                "effective": report.effective,
                "indeterminate": report.indeterminate,
                "deviation": report.deviation,
                "window": [report.window.0, report.window.1],
                "tol": report.tol,
            }),
        );
    }

    if let Some(dir) = fields_dir {
        write_field_dumps(dir, &grid, &evolution)?;
        results.insert("fields_dir".into(), json!(dir.display().to_string()));
    }

    Ok(BohmRun { evolution, results: Value::Object(results) })
}

fn run_ensemble(
    scenario: &Scenario,
    grid: &Grid1D,
    evolution: &Evolution,
) -> CliResult<Value> {
    let spec = scenario.ensemble;
    let mut rng = rng_from_seed(spec.seed);
    let wave = evolution.initial();

    // Marginal ensemble for the first coordinate.
    let rho0 = wave.marginal_density1();
    let start = sample_density_1d(grid, &rho0, spec.samples, &mut rng)
        .map_err(core_err("ensemble sampling"))?;
    let eq_initial = equivariance_1d(&start, grid, &rho0, spec.bins, MARGINAL_TV_INITIAL_TOL)
        .map_err(core_err("equivariance"))?;
    let guided = guide_marginal_trajectories(evolution, &start, spec.substeps)
        .map_err(core_err("marginal guidance"))?;
    let rho_final = evolution.last().marginal_density1();
    let eq_final = equivariance_1d(
        &guided.final_positions(),
        grid,
        &rho_final,
        spec.bins,
        MARGINAL_TV_FINAL_TOL,
    )
    .map_err(core_err("equivariance"))?;

    // Full-configuration ensemble.
    let rho2_initial = wave.density();
    let start2 = sample_density_2d(grid, &rho2_initial, spec.samples, &mut rng)
        .map_err(core_err("ensemble sampling"))?;
    let eq2_initial = equivariance_2d(&start2, grid, &rho2_initial, spec.bins, FULL_TV_TOL)
        .map_err(core_err("equivariance"))?;
    let guided2 = guide_full_trajectories(evolution, &start2, spec.substeps)
        .map_err(core_err("full guidance"))?;
    let rho2_final = evolution.last().density();
    let eq2_final = equivariance_2d(
        &guided2.final_positions(),
        grid,
        &rho2_final,
        spec.bins,
        FULL_TV_TOL,
    )
    .map_err(core_err("equivariance"))?;

    let eq_json = |r: &dualrail_core::bohm::EquivarianceReport| {
        json!({
            "tv_distance": r.tv_distance,
            "bins": r.bins,
            "samples": r.samples,
            "tol": r.tol,
            "pass": r.pass,
        })
    };
    Ok(json!({
        "samples": spec.samples,
        "seed": spec.seed,
        "substeps": spec.substeps,
        "marginal": {
            "initial": eq_json(&eq_initial),
            "final": eq_json(&eq_final),
            "frozen": guided.frozen.iter().filter(|&&f| f).count(),
            "floor_hits": guided.floor_hits(),
        },
        "full": {
            "initial": eq_json(&eq2_initial),
            "final": eq_json(&eq2_final),
            "frozen": guided2.frozen.iter().filter(|&&f| f).count(),
            "floor_hits": guided2.floor_hits(),
        },
    }))
}

/// CSV dumps of the evolved fields: the first coordinate's marginal density
/// and current per snapshot, and the joint density at the endpoints.
fn write_field_dumps(dir: &Path, grid: &Grid1D, evolution: &Evolution) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let n = grid.n();

    let mut marginal = std::io::BufWriter::new(std::fs::File::create(dir.join("marginal1.csv"))?);
    writeln!(marginal, "t,x,density,current")?;
    for (snapshot, &t) in evolution.snapshots.iter().zip(&evolution.times) {
        let (rho, current) = snapshot.marginal_density_current();
        for j in 0..n {
            writeln!(marginal, "{t},{},{},{}", grid.x(j), rho[j], current[j])?;
        }
    }
    marginal.flush()?;

    for (name, snapshot) in [
        ("density_initial.csv", evolution.initial()),
        ("density_final.csv", evolution.last()),
    ] {
        let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
        writeln!(file, "x1,x2,density")?;
        let rho = snapshot.density();
        for i in 0..n {
            for j in 0..n {
                writeln!(file, "{},{},{}", grid.x(i), grid.x(j), rho[i * n + j])?;
            }
        }
        file.flush()?;
    }
    Ok(())
}
