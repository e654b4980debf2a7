use clap::{Parser, Subcommand};
use dualrail_cli::commands::{self, CliError, CommandOutcome};
use dualrail_cli::report::{render_human, Report};
use serde_json::json;
use std::path::PathBuf;

/// Dual-rail circuit and trajectory toolkit.
///
/// Exit codes: 0 on success, 1 when a checker command (lhv, infoflow,
/// paths --verify, nosignal) detects a violation, 2 on input errors.
#[derive(Debug, Parser)]
#[command(name = "dualrail", version, about, max_term_width = 100)]
struct Cli {
    /// Print the full JSON report to stdout instead of a text summary.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// RNG seed for commands that draw randomness (nosignal trials, bohm
    /// ensembles; overrides the scenario file's seed).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Override the command's default tolerance.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,

    /// Omit the timestamp so reports are byte-reproducible.
    #[arg(long = "no-timestamp", global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a circuit and report the final state and joint distribution.
    Simulate {
        /// Circuit file.
        circuit: PathBuf,
    },
    /// Report a subsystem's marginal outcome distribution.
    Marginals {
        circuit: PathBuf,
        /// Subsystem particles, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
    },
    /// Reconstruct a subsystem marginal from partial collapses of the
    /// boundary-crossing gates.  Exits 1 when the residual exceeds the
    /// tolerance (default 1e-9): the marginal is not reproducible by
    /// weighted local collapses.
    Lhv {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
    },
    /// Split one controlled layer's marginal into the collapse part and the
    /// interference remainder (informational).
    #[command(name = "miss-split")]
    MissSplit {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
        /// Controlled layer to split; defaults to the last one.
        #[arg(long)]
        layer: Option<usize>,
    },
    /// Search for a parameter direction that moves the subsystem marginal
    /// while every licensed coefficient is stationary.  Exits 1 when one is
    /// found.
    Infoflow {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
        /// Parameters to vary (names, comma-separated); defaults to every
        /// parameter owned entirely outside the subsystem.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<String>>,
    },
    /// Enumerate discrete mode histories and their coherent sums.
    Paths {
        circuit: PathBuf,
        /// Check the path sums against the state-vector simulation; exits 1
        /// on mismatch beyond the tolerance (default 1e-9).
        #[arg(long)]
        verify: bool,
        /// Group paths by subsystem outcome and report interference.
        #[arg(long)]
        interference: bool,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
    },
    /// Splice random external unitaries after the last coupling and check
    /// the subsystem marginal is unmoved.  Exits 1 when it moves beyond the
    /// tolerance (default 1e-9).
    Nosignal {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sub: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Insert the probes at this layer instead of after the last
        /// coupling.
        #[arg(long)]
        insert: Option<usize>,
        /// Also run the check through the discrete path-sum route.
        #[arg(long)]
        paths: bool,
    },
    /// Evolve a two-particle scenario, guide a trajectory ensemble, and run
    /// the conditional-slice monitor when configured.
    Bohm {
        /// Scenario JSON file.
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        /// Directory for CSV field dumps (marginal density/current per
        /// snapshot, joint density at the endpoints).
        #[arg(long, value_name = "DIR")]
        fields: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, violation)) => {
            let rendered = report.to_json();
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, rendered.as_bytes()) {
                    eprintln!("error: {}: {e}", path.display());
                    std::process::exit(2);
                }
            }
            if cli.json {
                println!("{rendered}");
            } else {
                print!("{}", render_human(&report.results));
            }
            std::process::exit(if violation { 1 } else { 0 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn run(cli: &Cli) -> Result<(Report, bool), CliError> {
    let (command, outcome, inputs, seed): (&str, CommandOutcome, serde_json::Value, Option<u64>) =
        match &cli.command {
            Cmd::Simulate { circuit } => {
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::simulate(&parsed)?;
                (
                    "simulate",
                    outcome,
                    circuit_inputs(circuit, &parsed, json!({})),
                    None,
                )
            }
            Cmd::Marginals { circuit, sub } => {
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::marginals(&parsed, sub)?;
                (
                    "marginals",
                    outcome,
                    circuit_inputs(circuit, &parsed, json!({ "sub": sub })),
                    None,
                )
            }
            Cmd::Lhv { circuit, sub } => {
                let tol = cli.tol.unwrap_or(commands::LHV_TOL);
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::lhv(&parsed, sub, tol)?;
                (
                    "lhv",
                    outcome,
                    circuit_inputs(circuit, &parsed, json!({ "sub": sub, "tol": tol })),
                    None,
                )
            }
            Cmd::MissSplit { circuit, sub, layer } => {
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::miss_split_cmd(&parsed, sub, *layer)?;
                (
                    "miss-split",
                    outcome,
                    circuit_inputs(circuit, &parsed, json!({ "sub": sub, "layer": layer })),
                    None,
                )
            }
            Cmd::Infoflow { circuit, sub, params } => {
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::infoflow(&parsed, sub, params.as_deref())?;
                (
                    "infoflow",
                    outcome,
                    circuit_inputs(circuit, &parsed, json!({ "sub": sub, "params": params })),
                    None,
                )
            }
            Cmd::Paths { circuit, verify, interference, sub } => {
                let tol = cli.tol.unwrap_or(commands::PATH_VERIFY_TOL);
                let parsed = commands::load_circuit(circuit)?;
                let outcome = commands::paths_cmd(&parsed, sub, *verify, *interference, tol)?;
                (
                    "paths",
                    outcome,
                    circuit_inputs(
                        circuit,
                        &parsed,
                        json!({ "sub": sub, "verify": verify, "interference": interference, "tol": tol }),
                    ),
                    None,
                )
            }
            Cmd::Nosignal { circuit, sub, trials, insert, paths } => {
                let tol = cli.tol.unwrap_or(commands::NOSIGNAL_TOL);
                let seed = cli.seed.unwrap_or(0);
                let parsed = commands::load_circuit(circuit)?;
                let outcome =
                    commands::nosignal(&parsed, sub, *trials, seed, tol, *insert, *paths)?;
                (
                    "nosignal",
                    outcome,
                    circuit_inputs(
                        circuit,
                        &parsed,
                        json!({ "sub": sub, "trials": trials, "insert": insert, "paths": paths, "tol": tol }),
                    ),
                    Some(seed),
                )
            }
            Cmd::Bohm { scenario, fields } => {
                let mut parsed = commands::load_scenario(scenario)?;
                if let Some(seed) = cli.seed {
                    parsed.ensemble.seed = seed;
                }
                let seed = parsed.ensemble.seed;
                let run = commands::run_bohm(&parsed, fields.as_deref())?;
                let inputs = json!({
                    "scenario_file": scenario.display().to_string(),
                    "scenario": serde_json::to_value(&parsed)?,
                });
                (
                    "bohm",
                    CommandOutcome { results: run.results, violation: false },
                    inputs,
                    Some(seed),
                )
            }
        };

    let mut report = Report::new(command, inputs, outcome.results);
    if let Some(seed) = seed {
        report = report.with_seed(seed);
    }
    if !cli.no_timestamp {
        report = report.stamped();
    }
    Ok((report, outcome.violation))
}

/// Inputs echo for circuit commands: the file, its canonical form, and the
/// command options.
fn circuit_inputs(
    path: &std::path::Path,
    circuit: &dualrail_core::Circuit,
    options: serde_json::Value,
) -> serde_json::Value {
    json!({
        "circuit_file": path.display().to_string(),
        "canonical": dualrail_cli::pretty_print(circuit),
        "options": options,
    })
}
