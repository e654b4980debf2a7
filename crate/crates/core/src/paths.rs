//! Sum-over-paths reading of circuit evolution.
//!
//! Every basis-to-basis transition of the register factors into per-particle
//! mode hops.  A configuration-space path records one mode per particle per
//! layer boundary; its amplitude is the initial component's amplitude times
//! the product of traversed single-particle matrix elements, times a
//! controlled-phase factor for every interaction whose two particles both sit
//! in their controlled modes.  Coherent sums of path amplitudes per full
//! endpoint reproduce the evolved state exactly.
//!
//! A subsystem marginal follows in three steps: coherently sum the path
//! amplitudes into each full endpoint, square the modulus, then sum
//! classically over the external particles' endpoints.  The ordering matters:
//! [`incoherent_marginal_via_paths`] keeps the wrong order (classical sum of
//! per-path squared moduli) around as a contrast case, and it disagrees
//! whenever two paths share a full endpoint.  [`classify_interference`]
//! partitions the paths by endpoint to show which pairs can interfere in a
//! marginal, and [`remnant_invariance_check`] demonstrates that gates applied
//! to external particles after their last interaction shift individual
//! endpoint amplitudes but never the subsystem marginal.

use crate::circuit::{particle_label, Circuit, CircuitLayer, GateForm, SingleParticleGate};
use crate::error::Error;
use crate::prob::Subsystem;
use crate::rng;
use crate::state::{mode_of, Mat2, C64};
use crate::Result;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

/// Hard ceiling on the number of paths any enumeration is allowed to visit.
pub const PATH_BUDGET: u64 = 10_000_000;

/// A subsystem marginal is considered untouched by an external gate when no
/// outcome probability moves by more than this.
pub const REMNANT_MARGINAL_TOL: f64 = 1e-12;

/// One configuration-space path: for every particle, the sequence of modes at
/// each layer boundary.  Entry 0 is the initial mode, so each sequence is one
/// longer than the circuit's layer count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    /// Indexed as `modes[particle][boundary]`.
    pub modes: Vec<Vec<u8>>,
}

impl Path {
    pub fn n_particles(&self) -> usize {
        self.modes.len()
    }

    /// Number of layer boundaries recorded (layer count + 1).
    pub fn boundaries(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    fn index_at(&self, boundary: usize) -> usize {
        self.modes
            .iter()
            .fold(0, |acc, seq| (acc << 1) | seq[boundary] as usize)
    }

    /// Basis index of the initial configuration the path starts from.
    pub fn root_index(&self) -> usize {
        self.index_at(0)
    }

    /// Basis index of the configuration the path ends in.
    pub fn endpoint_index(&self) -> usize {
        self.index_at(self.boundaries() - 1)
    }
}

/// A path together with its complex amplitude.  The amplitude is always
/// recomputable from the circuit and the path alone via [`path_amplitude`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathAmplitude {
    pub path: Path,
    pub amplitude: C64,
}

// ---------------------------------------------------------------------------
// Walker
// ---------------------------------------------------------------------------

/// Per-layer lookup tables the walker branches on.
enum LayerTable {
    /// One optional matrix per particle.
    Singles(Vec<Option<Mat2>>),
    Controlled {
        p: usize,
        q: usize,
        modes: (u8, u8),
        factor: C64,
    },
}

fn layer_tables(circuit: &Circuit) -> Vec<LayerTable> {
    let n = circuit.n_particles();
    circuit
        .layers()
        .iter()
        .map(|layer| match layer {
            CircuitLayer::Singles(gates) => {
                let mut table = vec![None; n];
                for g in gates {
                    table[g.target] = Some(g.matrix);
                }
                LayerTable::Singles(table)
            }
            CircuitLayer::Controlled(g) => LayerTable::Controlled {
                p: g.particles.0,
                q: g.particles.1,
                modes: g.controlled_modes,
                factor: Complex::from_polar(1.0, g.theta),
            },
        })
        .collect()
}

/// Depth-first path walker.  Branching happens only at single-particle gates
/// with structurally nonzero column entries; controlled-phase layers are
/// diagonal and merely decorate the running amplitude.
struct Walker<'a, F: FnMut(&[Vec<u8>], C64)> {
    n: usize,
    tables: &'a [LayerTable],
    /// Mode histories built incrementally, `hist[particle][boundary]`.
    hist: Vec<Vec<u8>>,
    visit: F,
}

impl<'a, F: FnMut(&[Vec<u8>], C64)> Walker<'a, F> {
    fn descend(&mut self, layer: usize, amp: C64) {
        let tables = self.tables;
        if layer == tables.len() {
            (self.visit)(&self.hist, amp);
            return;
        }
        match &tables[layer] {
            LayerTable::Controlled { p, q, modes, factor } => {
                let hit = *self.hist[*p].last().unwrap() == modes.0
                    && *self.hist[*q].last().unwrap() == modes.1;
                let f = if hit { *factor } else { Complex::new(1.0, 0.0) };
                for h in self.hist.iter_mut() {
                    let m = *h.last().unwrap();
                    h.push(m);
                }
                self.descend(layer + 1, amp * f);
                for h in self.hist.iter_mut() {
                    h.pop();
                }
            }
            LayerTable::Singles(table) => self.assign(layer, table, 0, amp),
        }
    }

    /// Extend the current singles layer particle by particle, branching over
    /// every structurally possible output mode.  Every push is undone in the
    /// same frame, so the history is restored on the way out.
    fn assign(&mut self, layer: usize, table: &'a [Option<Mat2>], p: usize, amp: C64) {
        if p == self.n {
            self.descend(layer + 1, amp);
            return;
        }
        let cur = *self.hist[p].last().unwrap();
        match &table[p] {
            None => {
                self.hist[p].push(cur);
                self.assign(layer, table, p + 1, amp);
                self.hist[p].pop();
            }
            Some(m) => {
                for out in 0..2u8 {
                    let entry = m.e[out as usize][cur as usize];
                    if entry.norm_sqr() != 0.0 {
                        self.hist[p].push(out);
                        self.assign(layer, table, p + 1, amp * entry);
                        self.hist[p].pop();
                    }
                }
            }
        }
    }
}

/// Walk every configuration-space path of the circuit, invoking `visit` with
/// the full mode history and amplitude of each.  Paths are visited in a fixed
/// depth-first order (initial components ascending, output modes ascending),
/// so any accumulation over them is bit-stable across runs.
fn walk<F: FnMut(&[Vec<u8>], C64)>(circuit: &Circuit, visit: F) -> Result<()> {
    check_budget(circuit)?;
    let n = circuit.n_particles();
    let boundaries = circuit.layers().len() + 1;
    let tables = layer_tables(circuit);
    let mut walker = Walker { n, tables: &tables, hist: Vec::new(), visit };
    for (root, amp) in circuit.initial().amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        walker.hist = (0..n)
            .map(|p| {
                let mut seq = Vec::with_capacity(boundaries);
                seq.push(mode_of(root, p, n));
                seq
            })
            .collect();
        walker.descend(0, *amp);
    }
    Ok(())
}

fn endpoint_of(hist: &[Vec<u8>]) -> usize {
    hist.iter()
        .fold(0, |acc, seq| (acc << 1) | *seq.last().unwrap() as usize)
}

// ---------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------

/// Closed-form count of the paths a walk will visit: one family per nonzero
/// initial component, each of size `prod over particles of 2^(number of
/// mode-mixing layers acting on that particle)`.  Diagonal and anti-diagonal
/// gates (phase shifters, swaps) move a definite mode to a definite mode and
/// add no branching; controlled-phase layers never branch.
pub fn path_count_estimate(circuit: &Circuit) -> u64 {
    let n = circuit.n_particles();
    let mut per_particle = vec![1u64; n];
    for layer in circuit.layers() {
        if let CircuitLayer::Singles(gates) = layer {
            for g in gates {
                let mut branch = 1u64;
                for col in 0..2 {
                    let nonzero = (0..2)
                        .filter(|&row| g.matrix.e[row][col].norm_sqr() != 0.0)
                        .count() as u64;
                    branch = branch.max(nonzero);
                }
                per_particle[g.target] = per_particle[g.target].saturating_mul(branch);
            }
        }
    }
    let per_root = per_particle
        .iter()
        .fold(1u64, |acc, &b| acc.saturating_mul(b));
    let roots = circuit
        .initial()
        .amplitudes()
        .iter()
        .filter(|a| a.norm_sqr() != 0.0)
        .count() as u64;
    roots.saturating_mul(per_root)
}

fn check_budget(circuit: &Circuit) -> Result<()> {
    let estimated = path_count_estimate(circuit);
    if estimated > PATH_BUDGET {
        return Err(Error::PathBudgetExceeded { estimated, limit: PATH_BUDGET });
    }
    Ok(())
}

fn check_endpoint(circuit: &Circuit, endpoint: usize) -> Result<()> {
    let dim = 1usize << circuit.n_particles();
    if endpoint >= dim {
        return Err(Error::BadParameter(format!(
            "endpoint index {endpoint} out of range for dimension {dim}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Enumeration and sums
// ---------------------------------------------------------------------------

/// Every path with nonzero structural support ending at the given basis
/// configuration, with its amplitude.
pub fn enumerate_paths(circuit: &Circuit, endpoint: usize) -> Result<Vec<PathAmplitude>> {
    check_endpoint(circuit, endpoint)?;
    let mut out = Vec::new();
    walk(circuit, |hist, amp| {
        if endpoint_of(hist) == endpoint {
            out.push(PathAmplitude { path: Path { modes: hist.to_vec() }, amplitude: amp });
        }
    })?;
    Ok(out)
}

/// Coherent path-amplitude sums for every basis endpoint, in one walk.  The
/// result equals the evolved final state's amplitude vector.
pub fn endpoint_amplitude_sums(circuit: &Circuit) -> Result<Vec<C64>> {
    let mut sums = vec![Complex::new(0.0, 0.0); 1usize << circuit.n_particles()];
    walk(circuit, |hist, amp| sums[endpoint_of(hist)] += amp)?;
    Ok(sums)
}

/// Coherent sum of all path amplitudes into one endpoint.
pub fn sum_paths_amplitude(circuit: &Circuit, endpoint: usize) -> Result<C64> {
    check_endpoint(circuit, endpoint)?;
    Ok(endpoint_amplitude_sums(circuit)?[endpoint])
}

/// Recompute a path's amplitude from the circuit alone: the initial
/// component's amplitude, times each traversed matrix element, times the
/// controlled-phase factors collected along the way.  A path that asks an
/// untouched particle to change mode (or any particle to move across a
/// diagonal interaction layer) has amplitude zero.
pub fn path_amplitude(circuit: &Circuit, path: &Path) -> Result<C64> {
    let n = circuit.n_particles();
    if path.modes.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: path.modes.len() });
    }
    let boundaries = circuit.layers().len() + 1;
    for seq in &path.modes {
        if seq.len() != boundaries {
            return Err(Error::DimensionMismatch { expected: boundaries, found: seq.len() });
        }
        if seq.iter().any(|&m| m > 1) {
            return Err(Error::BadParameter(String::from("path mode out of range")));
        }
    }

    let zero = Complex::new(0.0, 0.0);
    let mut amp = circuit.initial().amplitudes()[path.index_at(0)];
    for (li, layer) in circuit.layers().iter().enumerate() {
        match layer {
            CircuitLayer::Singles(gates) => {
                let mut touched = vec![false; n];
                for g in gates {
                    touched[g.target] = true;
                    let from = path.modes[g.target][li] as usize;
                    let to = path.modes[g.target][li + 1] as usize;
                    amp *= g.matrix.e[to][from];
                }
                for p in 0..n {
                    if !touched[p] && path.modes[p][li] != path.modes[p][li + 1] {
                        return Ok(zero);
                    }
                }
            }
            CircuitLayer::Controlled(g) => {
                for p in 0..n {
                    if path.modes[p][li] != path.modes[p][li + 1] {
                        return Ok(zero);
                    }
                }
                if path.modes[g.particles.0][li] == g.controlled_modes.0
                    && path.modes[g.particles.1][li] == g.controlled_modes.1
                {
                    amp *= Complex::from_polar(1.0, g.theta);
                }
            }
        }
    }
    Ok(amp)
}

// ---------------------------------------------------------------------------
// Marginals
// ---------------------------------------------------------------------------

fn sub_outcome_index(sub: &Subsystem, outcome: &[u8]) -> Result<usize> {
    if outcome.len() != sub.len() {
        return Err(Error::BadParameter(format!(
            "outcome lists {} modes for a {}-particle subsystem",
            outcome.len(),
            sub.len()
        )));
    }
    let mut index = 0usize;
    for &m in outcome {
        if m > 1 {
            return Err(Error::BadParameter(String::from("outcome mode out of range")));
        }
        index = (index << 1) | m as usize;
    }
    Ok(index)
}

/// Subsystem marginal evaluated by the three-step path algorithm: coherently
/// sum path amplitudes into each full endpoint, square the modulus, then sum
/// classically over the external particles' endpoints with the subsystem
/// outcome held fixed.  Agrees with the squared-modulus marginal of the
/// evolved state.
pub fn marginal_via_paths(circuit: &Circuit, sub: &Subsystem, outcome: &[u8]) -> Result<f64> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let target = sub_outcome_index(sub, outcome)?;
    let sums = endpoint_amplitude_sums(circuit)?;
    Ok(sums
        .iter()
        .enumerate()
        .filter(|(endpoint, _)| sub.outcome_of(*endpoint, n) == target)
        .map(|(_, s)| s.norm_sqr())
        .sum())
}

/// The deliberately wrong ordering: classically sum per-path squared moduli.
/// Disagrees with the exact marginal whenever at least two paths share a full
/// endpoint; kept as the contrast case for the coherent-then-classical rule.
pub fn incoherent_marginal_via_paths(
    circuit: &Circuit,
    sub: &Subsystem,
    outcome: &[u8],
) -> Result<f64> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let target = sub_outcome_index(sub, outcome)?;
    let mut total = 0.0;
    walk(circuit, |hist, amp| {
        if sub.outcome_of(endpoint_of(hist), n) == target {
            total += amp.norm_sqr();
        }
    })?;
    Ok(total)
}

// ---------------------------------------------------------------------------
// Interference classification
// ---------------------------------------------------------------------------

/// All paths sharing one full configuration-space endpoint.  Exactly these
/// paths interfere with each other; their coherent sum is the endpoint's
/// final amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGroup {
    pub endpoint: usize,
    /// The subsystem's share of the endpoint.
    pub sub_outcome: usize,
    pub paths: Vec<PathAmplitude>,
    pub coherent_sum: C64,
}

/// Partition of all paths by full endpoint, plus the pairs of groups that
/// share a subsystem outcome while differing in the external particles'
/// endpoint.  Every path of one group in such a pair lands in the same
/// subsystem outcome as every path of the other, yet the two never interfere:
/// their squared sums enter the marginal classically.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceReport {
    /// Non-empty path groups, ascending by endpoint.  Disjoint and exhaustive.
    pub groups: Vec<PathGroup>,
    /// Index pairs `(i, j)` into `groups` with `i < j`, equal `sub_outcome`,
    /// and (necessarily) different endpoints.
    pub non_interfering: Vec<(usize, usize)>,
}

impl InterferenceReport {
    /// The group ending at `endpoint`, if any path reaches it.
    pub fn group_at(&self, endpoint: usize) -> Option<&PathGroup> {
        self.groups.iter().find(|g| g.endpoint == endpoint)
    }
}

/// Group every path by its full endpoint and flag the cross-group pairs that
/// feed the same subsystem outcome without interfering.
pub fn classify_interference(circuit: &Circuit, sub: &Subsystem) -> Result<InterferenceReport> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let dim = 1usize << n;
    let mut by_endpoint: Vec<Vec<PathAmplitude>> = (0..dim).map(|_| Vec::new()).collect();
    walk(circuit, |hist, amp| {
        by_endpoint[endpoint_of(hist)]
            .push(PathAmplitude { path: Path { modes: hist.to_vec() }, amplitude: amp });
    })?;

    let mut groups = Vec::new();
    for (endpoint, paths) in by_endpoint.into_iter().enumerate() {
        if paths.is_empty() {
            continue;
        }
        let coherent_sum = paths.iter().map(|p| p.amplitude).sum();
        groups.push(PathGroup {
            endpoint,
            sub_outcome: sub.outcome_of(endpoint, n),
            paths,
            coherent_sum,
        });
    }

    let mut non_interfering = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if groups[i].sub_outcome == groups[j].sub_outcome {
                non_interfering.push((i, j));
            }
        }
    }
    Ok(InterferenceReport { groups, non_interfering })
}

// ---------------------------------------------------------------------------
// Remnant invariance
// ---------------------------------------------------------------------------

/// Outcome of probing the path-computed marginal against random gates on the
/// external particles.
#[derive(Debug, Clone, PartialEq)]
pub struct RemnantReport {
    pub trials: usize,
    /// Layer position where the probe gates were spliced in.
    pub insert_layer: usize,
    /// The last layer coupling the subsystem to an external particle.
    pub last_coupling_layer: usize,
    /// Largest change of any subsystem marginal outcome across trials.
    pub max_marginal_shift: f64,
    /// Largest change of any endpoint's coherent path-amplitude sum across
    /// trials.
    pub max_endpoint_shift: f64,
    /// Whether `max_marginal_shift` stayed below [`REMNANT_MARGINAL_TOL`].
    pub marginal_invariant: bool,
}

fn marginal_from_sums(sums: &[C64], sub: &Subsystem, n: usize) -> Vec<f64> {
    let mut probs = vec![0.0; 1usize << sub.len()];
    for (endpoint, s) in sums.iter().enumerate() {
        probs[sub.outcome_of(endpoint, n)] += s.norm_sqr();
    }
    probs
}

/// Splice random single-particle gates on every external particle into the
/// circuit (by default after the last layer, i.e. after the subsystem's last
/// interaction) and measure, through the path sums, how far they move the
/// endpoint amplitudes and the subsystem marginal.
///
/// Appended after the final interaction, such gates rearrange the external
/// particles' remnant transition amplitudes — individual endpoint sums move —
/// while the classical sum over external endpoints cancels every change to
/// the subsystem marginal.  An `insert_at` before the last coupling layer
/// shows the contrast: there the marginal itself moves.
pub fn remnant_invariance_check(
    circuit: &Circuit,
    sub: &Subsystem,
    trials: usize,
    seed: u64,
    insert_at: Option<usize>,
) -> Result<RemnantReport> {
    let n = circuit.n_particles();
    sub.check_against(n)?;
    let externals = sub.complement(n);
    if externals.is_empty() {
        return Err(Error::BadSubsystem(String::from(
            "subsystem covers the whole register; nothing to append",
        )));
    }
    let last_coupling_layer = circuit
        .last_layer_coupling(sub.particles())
        .ok_or_else(|| {
            Error::BadParameter(String::from(
                "no layer couples the subsystem to the external particles",
            ))
        })?;
    let insert_layer = insert_at.unwrap_or(circuit.layers().len());

    let base_sums = endpoint_amplitude_sums(circuit)?;
    let base_marginal = marginal_from_sums(&base_sums, sub, n);

    let mut max_marginal_shift: f64 = 0.0;
    let mut max_endpoint_shift: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = rng::rng_for_trial(seed, trial as u64);
        let gates: Vec<SingleParticleGate> = externals
            .iter()
            .map(|&p| {
                let m = rng::haar_unitary(&mut rng);
                SingleParticleGate {
                    target: p,
                    form: GateForm::Fixed(m),
                    owner: particle_label(p),
                    matrix: m,
                }
            })
            .collect();
        let probed = circuit.with_layer_inserted(insert_layer, CircuitLayer::Singles(gates))?;
        let sums = endpoint_amplitude_sums(&probed)?;
        for (s, b) in sums.iter().zip(&base_sums) {
            max_endpoint_shift = max_endpoint_shift.max((s - b).norm());
        }
        let marginal = marginal_from_sums(&sums, sub, n);
        for (m, b) in marginal.iter().zip(&base_marginal) {
            max_marginal_shift = max_marginal_shift.max((m - b).abs());
        }
    }

    Ok(RemnantReport {
        trials,
        insert_layer,
        last_coupling_layer,
        max_marginal_shift,
        max_endpoint_shift,
        marginal_invariant: max_marginal_shift < REMNANT_MARGINAL_TOL,
    })
}
