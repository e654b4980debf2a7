//! Effective-wavefunction monitor: does the conditional wavefunction of the
//! first particle, sliced along a given path of the second, evolve on its
//! own under the one-particle Hamiltonian
//! `T + V_ext1(x) + V_int(x - Y(t))`?
//!
//! When it does (the branch carrying the configuration is dynamically
//! isolated), the conditional earns the name "effective wavefunction": the
//! rest of the state is ignorable for the first particle's dynamics.  The
//! monitor makes that operational: it propagates the conditional slice taken
//! at the window's start with a one-dimensional split-operator scheme and
//! reports the largest phase-insensitive deviation from the actual slices at
//! later snapshots.

use super::evolve::Evolution;
use super::fft::Fft;
use crate::error::Error;
use crate::state::C64;
use crate::Result;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float; // float methods for no_std builds

/// Verdict of one monitor run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveReport {
    /// True when the largest deviation stayed below `tol`.
    pub effective: bool,
    /// True when a conditional slice inside the window carried no weight, so
    /// the comparison is undefined there (the conditioning path left the
    /// state's support).
    pub indeterminate: bool,
    /// Largest deviation `sqrt(2 (1 - |<a|b>|))` between the autonomously
    /// evolved slice and the actual slice, over the window's snapshots.
    /// `None` when indeterminate.
    pub deviation: Option<f64>,
    /// The window actually used, snapped to snapshot times.
    pub window: (f64, f64),
    pub tol: f64,
}

fn indeterminate_report(window: (f64, f64), tol: f64) -> EffectiveReport {
    EffectiveReport { effective: false, indeterminate: true, deviation: None, window, tol }
}

/// Phase-insensitive distance between unit vectors: the norm of
/// `a - e^{i phi} b` minimized over the global phase.
fn phase_free_distance(a: &[C64], b: &[C64], dx: f64) -> f64 {
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let fidelity = (overlap * dx).norm();
    (2.0 * (1.0 - fidelity)).max(0.0).sqrt()
}

fn normalize_1d(values: &mut [C64], dx: f64) {
    let norm_sq: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
    if norm_sq > 0.0 {
        let scale = 1.0 / norm_sq.sqrt();
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

/// Run the monitor over `window = (t_start, t_end)` (snapped to snapshot
/// times), conditioning on `y_of_t`, one position per snapshot of the
/// evolution.  The autonomous propagation matches the evolution's step
/// length, subdividing each snapshot gap accordingly, and evaluates the
/// interaction at the linearly interpolated midpoint position of the second
/// particle.
pub fn effective_wavefunction_monitor(
    evolution: &Evolution,
    y_of_t: &[f64],
    window: (f64, f64),
    potential: &super::wavefunction::PotentialSpec,
    tol: f64,
) -> Result<EffectiveReport> {
    let times = &evolution.times;
    if y_of_t.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: y_of_t.len() });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::BadParameter(String::from("tolerance must be positive and finite")));
    }
    potential.validate()?;
    let (w0, w1) = window;
    if !(w0 < w1) || !w0.is_finite() || !w1.is_finite() {
        return Err(Error::BadParameter(String::from("window must satisfy start < end")));
    }
    let s0 = times
        .iter()
        .position(|&t| t >= w0 - 1e-12)
        .ok_or_else(|| Error::BadParameter(String::from("window starts after the last snapshot")))?;
    let s1 = times
        .iter()
        .rposition(|&t| t <= w1 + 1e-12)
        .ok_or_else(|| Error::BadParameter(String::from("window ends before the first snapshot")))?;
    if s1 <= s0 {
        return Err(Error::BadParameter(String::from(
            "window covers fewer than two snapshots",
        )));
    }
    let snapped = (times[s0], times[s1]);

    let grid = *evolution.grid();
    let n = grid.n();
    let dx = grid.dx();
    let hbar = evolution.snapshots[0].hbar;
    let mass1 = evolution.snapshots[0].mass1;
    let fft = Fft::new(n)?;

    let mut state = match evolution.snapshots[s0].conditional_wavefunction(y_of_t[s0]) {
        Ok(c) => c.normalized,
        Err(Error::EmptyConditional { .. }) => return Ok(indeterminate_report(snapped, tol)),
        Err(e) => return Err(e),
    };

    let mut worst: f64 = 0.0;
    let mut kick = Vec::with_capacity(n);
    for s in s0..s1 {
        let span = times[s + 1] - times[s];
        let substeps = ((span / evolution.dt).round() as usize).max(1);
        let dt = span / substeps as f64;
        let kin: Vec<C64> = (0..n)
            .map(|j| {
                let k = grid.wavenumber(j);
                Complex::from_polar(1.0, -hbar * k * k * dt / (2.0 * mass1))
            })
            .collect();
        for k in 0..substeps {
            let tau_mid = (k as f64 + 0.5) / substeps as f64;
            let y_mid = y_of_t[s] * (1.0 - tau_mid) + y_of_t[s + 1] * tau_mid;
            kick.clear();
            for j in 0..n {
                let x = grid.x(j);
                let v = potential.external1.eval(x, mass1) + potential.interaction.eval(x - y_mid);
                kick.push(Complex::from_polar(1.0, -v * dt / (2.0 * hbar)));
            }
            for (v, p) in state.iter_mut().zip(&kick) {
                *v *= p;
            }
            fft.forward(&mut state);
            for (v, p) in state.iter_mut().zip(&kin) {
                *v *= p;
            }
            fft.inverse(&mut state);
            for (v, p) in state.iter_mut().zip(&kick) {
                *v *= p;
            }
        }
        normalize_1d(&mut state, dx);

        let actual = match evolution.snapshots[s + 1].conditional_wavefunction(y_of_t[s + 1]) {
            Ok(c) => c.normalized,
            Err(Error::EmptyConditional { .. }) => return Ok(indeterminate_report(snapped, tol)),
            Err(e) => return Err(e),
        };
        worst = worst.max(phase_free_distance(&state, &actual, dx));
    }

    Ok(EffectiveReport {
        effective: worst < tol,
        indeterminate: false,
        deviation: Some(worst),
        window: snapped,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::evolve::{evolve_pde, EvolveParams};
    use crate::bohm::grid::Grid1D;
    use crate::bohm::trajectory::guide_full_trajectories;
    use crate::bohm::wavefunction::{
        gaussian_packet, product_state, superpose, PairPotential, Potential1D, PotentialSpec,
    };

    fn params(dt: f64, steps: usize, stride: usize) -> EvolveParams {
        EvolveParams { dt, steps, snapshot_stride: stride }
    }

    /// Two branch products `gL hL + gR hR` with tunable second-particle
    /// separation and first-particle momenta.
    fn two_branch_state(
        grid: Grid1D,
        g_centers: (f64, f64),
        g_momenta: (f64, f64),
        h_centers: (f64, f64),
        h_momenta: (f64, f64),
        h_sigma: f64,
    ) -> crate::bohm::wavefunction::Wavefunction2P {
        let g_l = gaussian_packet(&grid, g_centers.0, g_momenta.0, 1.0);
        let g_r = gaussian_packet(&grid, g_centers.1, g_momenta.1, 1.0);
        let h_l = gaussian_packet(&grid, h_centers.0, h_momenta.0, h_sigma);
        let h_r = gaussian_packet(&grid, h_centers.1, h_momenta.1, h_sigma);
        let left = product_state(grid, &g_l, &h_l, 1.0, 1.0, 1.0).unwrap();
        let right = product_state(grid, &g_r, &h_r, 1.0, 1.0, 1.0).unwrap();
        let c = Complex::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        superpose(&left, &right, c, c).unwrap()
    }

    #[test]
    fn input_guards() {
        let grid = Grid1D::new(-12.0, 12.0, 32).unwrap();
        let f = gaussian_packet(&grid, 0.0, 0.0, 1.0);
        let psi = product_state(grid, &f, &f, 1.0, 1.0, 1.0).unwrap();
        let run = evolve_pde(&psi, &PotentialSpec::free(), &params(0.01, 10, 5)).unwrap();
        let y = vec![0.0; run.times.len()];
        let free = PotentialSpec::free();

        assert!(matches!(
            effective_wavefunction_monitor(&run, &y[1..], (0.0, 0.1), &free, 1e-3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(effective_wavefunction_monitor(&run, &y, (0.0, 0.1), &free, 0.0).is_err());
        assert!(effective_wavefunction_monitor(&run, &y, (0.1, 0.0), &free, 1e-3).is_err());
        // A window around a single snapshot has nothing to compare.
        assert!(effective_wavefunction_monitor(&run, &y, (0.04, 0.06), &free, 1e-3).is_err());
        // A window past the end of the run never matches a snapshot.
        assert!(effective_wavefunction_monitor(&run, &y, (5.0, 6.0), &free, 1e-3).is_err());
    }

    #[test]
    fn noninteracting_product_is_effective_to_rounding() {
        let grid = Grid1D::new(-12.0, 12.0, 64).unwrap();
        let sigma = (0.5f64).sqrt();
        let f = gaussian_packet(&grid, 1.5, 0.0, 1.0);
        let g = gaussian_packet(&grid, 0.0, 0.0, sigma);
        let psi = product_state(grid, &f, &g, 1.0, 1.0, 1.0).unwrap();
        let wells = PotentialSpec {
            external1: Potential1D::Harmonic { omega: 1.0, center: 0.0 },
            external2: Potential1D::Harmonic { omega: 1.0, center: 0.0 },
            interaction: PairPotential::Zero,
        };
        let run = evolve_pde(&psi, &wells, &params(0.01, 100, 20)).unwrap();
        let y = vec![0.4; run.times.len()];
        let report =
            effective_wavefunction_monitor(&run, &y, (0.0, 1.0), &wells, 1e-6).unwrap();
        assert!(report.effective, "deviation {:?}", report.deviation);
        assert!(!report.indeterminate);
        assert!(report.deviation.unwrap() < 1e-6);
        assert!((report.window.0 - 0.0).abs() < 1e-9);
        assert!((report.window.1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_branches_give_an_effective_wavefunction() {
        let grid = Grid1D::new(-16.0, 16.0, 128).unwrap();
        let psi = two_branch_state(grid, (-2.0, 2.0), (0.5, -0.5), (-6.0, 6.0), (0.0, 0.0), 0.8);
        let free = PotentialSpec::free();
        let run = evolve_pde(&psi, &free, &params(0.005, 100, 20)).unwrap();

        // Condition along a genuine configuration path starting in the left
        // branch.
        let paths = guide_full_trajectories(&run, &[(-2.0, -6.0)], 4).unwrap();
        let y = paths.second_coordinate(0);
        let report =
            effective_wavefunction_monitor(&run, &y, (0.0, 0.5), &free, 1e-3).unwrap();
        assert!(report.effective, "deviation {:?}", report.deviation);
        assert!(report.deviation.unwrap() < 1e-3);

        // The initial conditional is the left branch's first factor.
        let cond = run.initial().conditional_wavefunction(y[0]).unwrap();
        let g_l = gaussian_packet(&grid, -2.0, 0.5, 1.0);
        let overlap: C64 = cond
            .normalized
            .iter()
            .zip(&g_l)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap * grid.dx()).norm_sqr() > 1.0 - 1e-6);
    }

    #[test]
    fn overlapping_branches_are_not_effective() {
        let grid = Grid1D::new(-16.0, 16.0, 128).unwrap();
        // Branches overlap in the second coordinate and carry opposite
        // momenta in both coordinates, so the conditional mixture at the
        // sampled path keeps changing — no autonomous one-particle evolution
        // can follow it.
        let psi = two_branch_state(grid, (-2.0, 2.0), (1.5, -1.5), (-0.6, 0.6), (1.0, -1.0), 0.8);
        let free = PotentialSpec::free();
        let run = evolve_pde(&psi, &free, &params(0.005, 100, 20)).unwrap();

        let paths = guide_full_trajectories(&run, &[(-2.0, 0.3)], 4).unwrap();
        let y = paths.second_coordinate(0);
        let report =
            effective_wavefunction_monitor(&run, &y, (0.0, 0.5), &free, 1e-3).unwrap();
        assert!(!report.effective);
        assert!(!report.indeterminate);
        assert!(
            report.deviation.unwrap() > 0.01,
            "deviation {:?} unexpectedly small",
            report.deviation
        );
    }

    #[test]
    fn paths_outside_the_support_are_indeterminate() {
        let grid = Grid1D::new(-16.0, 16.0, 64).unwrap();
        let psi = two_branch_state(grid, (-2.0, 2.0), (0.0, 0.0), (-6.0, 6.0), (0.0, 0.0), 0.8);
        let free = PotentialSpec::free();
        let run = evolve_pde(&psi, &free, &params(0.01, 40, 10)).unwrap();
        let y = vec![12.5; run.times.len()];
        let report =
            effective_wavefunction_monitor(&run, &y, (0.0, 0.4), &free, 1e-3).unwrap();
        assert!(report.indeterminate);
        assert!(!report.effective);
        assert!(report.deviation.is_none());
    }

    #[test]
    fn interaction_potential_enters_the_effective_hamiltonian() {
        // With disjoint branches AND an interaction, the one-particle
        // evolution is only correct if it includes V_int(x - Y(t)); dropping
        // it (propagating with the free Hamiltonian) must show a deviation.
        let grid = Grid1D::new(-16.0, 16.0, 128).unwrap();
        let psi = two_branch_state(grid, (-2.0, 2.0), (0.0, 0.0), (-6.0, 6.0), (0.0, 0.0), 0.6);
        let coupled = PotentialSpec {
            external1: Potential1D::Zero,
            external2: Potential1D::Zero,
            interaction: PairPotential::Gaussian { height: 1.5, width: 3.0 },
        };
        let run = evolve_pde(&psi, &coupled, &params(0.005, 100, 20)).unwrap();
        let paths = guide_full_trajectories(&run, &[(-2.0, -6.0)], 4).unwrap();
        let y = paths.second_coordinate(0);

        let with_interaction =
            effective_wavefunction_monitor(&run, &y, (0.0, 0.5), &coupled, 0.08).unwrap();
        assert!(
            with_interaction.effective,
            "deviation {:?}",
            with_interaction.deviation
        );

        let without =
            effective_wavefunction_monitor(&run, &y, (0.0, 0.5), &PotentialSpec::free(), 0.08)
                .unwrap();
        assert!(
            without.deviation.unwrap() > 0.05
                && without.deviation.unwrap() > with_interaction.deviation.unwrap() * 10.0,
            "dropping the interaction should visibly spoil the evolution: {:?} vs {:?}",
            without.deviation,
            with_interaction.deviation
        );
    }
}
