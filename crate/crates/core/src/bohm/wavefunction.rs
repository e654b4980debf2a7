//! Two-particle wavefunctions on the grid, their densities, currents, and
//! conditional slices.

use super::grid::Grid1D;
use crate::error::Error;
use crate::linalg;
use crate::state::C64;
use crate::Result;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float; // float methods for no_std builds

/// Tolerated deviation of the squared norm from one.
pub const WAVE_NORM_TOL: f64 = 1e-8;

/// A conditional slice whose squared norm falls below this is undefined.
pub const CONDITIONAL_FLOOR: f64 = 1e-12;

/// One single-coordinate external potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential1D {
    Zero,
    /// `1/2 m omega^2 (x - center)^2`.
    Harmonic { omega: f64, center: f64 },
    /// Gaussian barrier (or well, for negative height)
    /// `height * exp(-(x - center)^2 / (2 width^2))`.
    Barrier { height: f64, center: f64, width: f64 },
}

impl Potential1D {
    pub fn eval(&self, x: f64, mass: f64) -> f64 {
        match self {
            Potential1D::Zero => 0.0,
            Potential1D::Harmonic { omega, center } => {
                let d = x - center;
                0.5 * mass * omega * omega * d * d
            }
            Potential1D::Barrier { height, center, width } => {
                let d = (x - center) / width;
                height * (-0.5 * d * d).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match self {
            Potential1D::Zero => true,
            Potential1D::Harmonic { omega, center } => omega.is_finite() && center.is_finite(),
            Potential1D::Barrier { height, center, width } => {
                height.is_finite() && center.is_finite() && width.is_finite() && *width > 0.0
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::BadParameter(String::from(
                "external potential parameters must be finite (and widths positive)",
            )))
        }
    }
}

/// Interaction potential as a function of the separation `x1 - x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairPotential {
    Zero,
    /// `strength / sqrt(s^2 + softening^2)`; the softening keeps the 1-D
    /// Coulomb singularity off the grid.
    SoftCoulomb { strength: f64, softening: f64 },
    /// `height * exp(-s^2 / (2 width^2))`.
    Gaussian { height: f64, width: f64 },
}

impl PairPotential {
    pub fn eval(&self, separation: f64) -> f64 {
        match self {
            PairPotential::Zero => 0.0,
            PairPotential::SoftCoulomb { strength, softening } => {
                strength / (separation * separation + softening * softening).sqrt()
            }
            PairPotential::Gaussian { height, width } => {
                let d = separation / width;
                height * (-0.5 * d * d).exp()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PairPotential::Zero)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PairPotential::Zero => true,
            PairPotential::SoftCoulomb { strength, softening } => {
                strength.is_finite() && softening.is_finite() && *softening > 0.0
            }
            PairPotential::Gaussian { height, width } => {
                height.is_finite() && width.is_finite() && *width > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadParameter(String::from(
                "interaction potential parameters must be finite (softening/width positive)",
            )))
        }
    }
}

/// The full potential: one external term per particle plus an interaction
/// term in the separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub external1: Potential1D,
    pub external2: Potential1D,
    pub interaction: PairPotential,
}

impl PotentialSpec {
    pub fn free() -> Self {
        PotentialSpec {
            external1: Potential1D::Zero,
            external2: Potential1D::Zero,
            interaction: PairPotential::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.external1.validate()?;
        self.external2.validate()?;
        self.interaction.validate()
    }

    /// Total potential tabulated on the configuration grid, row-major with
    /// the first particle's coordinate as the row index.
    pub fn grid_values(&self, grid: &Grid1D, mass1: f64, mass2: f64) -> Vec<f64> {
        let n = grid.n();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            let x1 = grid.x(i);
            let v1 = self.external1.eval(x1, mass1);
            for j in 0..n {
                let x2 = grid.x(j);
                v.push(v1 + self.external2.eval(x2, mass2) + self.interaction.eval(x1 - x2));
            }
        }
        v
    }
}

/// Current fields on the configuration grid, one component per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
}

/// A two-particle wavefunction on a shared 1-D grid per axis, stored
/// row-major: `values[i * n + j]` is the amplitude at `(x1_i, x2_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction2P {
    grid: Grid1D,
    values: Vec<C64>,
    pub hbar: f64,
    pub mass1: f64,
    pub mass2: f64,
}

impl Wavefunction2P {
    /// Wrap explicit values, requiring unit norm (`sum |psi|^2 dx^2 = 1`).
    pub fn new(grid: Grid1D, values: Vec<C64>, hbar: f64, mass1: f64, mass2: f64) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        if !(hbar > 0.0) || !(mass1 > 0.0) || !(mass2 > 0.0) {
            return Err(Error::BadParameter(String::from(
                "hbar and masses must be positive",
            )));
        }
        let psi = Wavefunction2P { grid, values, hbar, mass1, mass2 };
        let norm_sq = psi.norm_sq();
        if (norm_sq - 1.0).abs() > WAVE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(psi)
    }

    /// Wrap values after rescaling them to unit norm.
    pub fn normalized(
        grid: Grid1D,
        mut values: Vec<C64>,
        hbar: f64,
        mass1: f64,
        mass2: f64,
    ) -> Result<Self> {
        let dx = grid.dx();
        let norm_sq: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx;
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = 1.0 / norm_sq.sqrt();
        for v in values.iter_mut() {
            *v *= scale;
        }
        Wavefunction2P::new(grid, values, hbar, mass1, mass2)
    }

    /// Internal constructor that skips validation; the propagator monitors
    /// norm drift itself and its steps are unitary up to rounding.
    pub(crate) fn from_raw(
        grid: Grid1D,
        values: Vec<C64>,
        hbar: f64,
        mass1: f64,
        mass2: f64,
    ) -> Self {
        Wavefunction2P { grid, values, hbar, mass1, mass2 }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.n() + j]
    }

    /// `sum |psi|^2 dx^2`.
    pub fn norm_sq(&self) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Probability density `|psi|^2` on the configuration grid.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Probability currents `j_i = (hbar/m_i) Im(psi* d_i psi)` by centered
    /// periodic differences.  This is the unique current consistent with the
    /// grid dynamics and the continuity equation, up to divergence-free
    /// additions.
    pub fn current(&self) -> CurrentField {
        let n = self.grid.n();
        let inv_2dx = 1.0 / (2.0 * self.grid.dx());
        let c1 = self.hbar / self.mass1 * inv_2dx;
        let c2 = self.hbar / self.mass2 * inv_2dx;
        let mut j1 = vec![0.0; n * n];
        let mut j2 = vec![0.0; n * n];
        for i in 0..n {
            let up = if i + 1 == n { 0 } else { i + 1 };
            let down = if i == 0 { n - 1 } else { i - 1 };
            for j in 0..n {
                let right = if j + 1 == n { 0 } else { j + 1 };
                let left = if j == 0 { n - 1 } else { j - 1 };
                let psi = self.values[i * n + j];
                let d1 = self.values[up * n + j] - self.values[down * n + j];
                let d2 = self.values[i * n + right] - self.values[i * n + left];
                j1[i * n + j] = c1 * (psi.conj() * d1).im;
                j2[i * n + j] = c2 * (psi.conj() * d2).im;
            }
        }
        CurrentField { j1, j2 }
    }

    fn marginal_axis(&self, field: &[f64], axis: usize) -> Vec<f64> {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let v = field[i * n + j];
                if axis == 0 {
                    out[i] += v;
                } else {
                    out[j] += v;
                }
            }
        }
        for o in out.iter_mut() {
            *o *= dx;
        }
        out
    }

    /// Marginal density of the first particle: `integral |psi|^2 dx2`.
    /// On the periodic uniform grid the trapezoid rule reduces to this
    /// rectangle sum.  Integrates to the state norm.
    pub fn marginal_density1(&self) -> Vec<f64> {
        self.marginal_axis(&self.density(), 0)
    }

    /// Marginal density of the second particle.
    pub fn marginal_density2(&self) -> Vec<f64> {
        self.marginal_axis(&self.density(), 1)
    }

    /// Marginal current of the first particle: `integral j1 dx2`.
    pub fn marginal_current1(&self) -> Vec<f64> {
        self.marginal_axis(&self.current().j1, 0)
    }

    /// Marginal density and current of the first particle in one pass: the
    /// two integrated fields entering the subsystem guidance law.
    pub fn marginal_density_current(&self) -> (Vec<f64>, Vec<f64>) {
        (self.marginal_density1(), self.marginal_current1())
    }

    /// Integral over `x2` of the `x2`-divergence of `j1`, for each `x1` —
    /// the term the divergence theorem kills when turning the configuration-
    /// space continuity equation into the marginal one.  On the periodic
    /// grid the centered differences telescope, so this vanishes to rounding.
    pub fn boundary_flux_residual(&self) -> f64 {
        let n = self.grid.n();
        let j1 = self.current().j1;
        let inv_2dx = 1.0 / (2.0 * self.grid.dx());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut total = 0.0;
            for j in 0..n {
                let right = if j + 1 == n { 0 } else { j + 1 };
                let left = if j == 0 { n - 1 } else { j - 1 };
                total += (j1[i * n + right] - j1[i * n + left]) * inv_2dx;
            }
            worst = worst.max((total * self.grid.dx()).abs());
        }
        worst
    }

    /// Schmidt entanglement entropy (base 2) of the discretized amplitude
    /// matrix.  Zero for products of single-particle states.
    pub fn mode_entanglement_entropy(&self) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let scaled: Vec<C64> = self.values.iter().map(|v| v * dx).collect();
        let singular = linalg::complex_singular_values(&scaled, n, n);
        let mut entropy = 0.0;
        for s in singular {
            let p = s * s;
            if p > 1e-300 {
                entropy -= p * p.log2();
            }
        }
        entropy.max(0.0)
    }

    /// Slice the wavefunction at `x2 = y` (linear interpolation between grid
    /// columns).  Returns the raw slice, a normalized copy, and the slice
    /// norm; a slice with squared norm below [`CONDITIONAL_FLOOR`] is
    /// undefined and reported as an error.
    pub fn conditional_wavefunction(&self, y: f64) -> Result<Conditional> {
        if !self.grid.contains(y) {
            return Err(Error::BadParameter(alloc::format!(
                "conditioning point {y} lies outside the grid"
            )));
        }
        let n = self.grid.n();
        let (a, b, t) = self.grid.interp(y);
        let mut raw = Vec::with_capacity(n);
        for i in 0..n {
            let va = self.values[i * n + a];
            let vb = self.values[i * n + b];
            raw.push(va * (1.0 - t) + vb * t);
        }
        let norm_sq: f64 = raw.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx();
        if norm_sq < CONDITIONAL_FLOOR {
            return Err(Error::EmptyConditional { norm_sq });
        }
        let scale = 1.0 / norm_sq.sqrt();
        let normalized = raw.iter().map(|v| v * scale).collect();
        Ok(Conditional { raw, normalized, norm_sq })
    }
}

/// A conditional slice of the wavefunction at a fixed external coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    /// The un-normalized slice `psi(x1, Y)`.
    pub raw: Vec<C64>,
    /// The slice rescaled to unit norm (`sum |.|^2 dx = 1`).
    pub normalized: Vec<C64>,
    /// Squared norm of the raw slice.
    pub norm_sq: f64,
}

/// Normalized Gaussian packet `exp(-(x-x0)^2/(4 sigma^2) + i k0 x)` tabulated
/// on the grid; `sigma` is the position-space standard deviation.
pub fn gaussian_packet(grid: &Grid1D, x0: f64, k0: f64, sigma: f64) -> Vec<C64> {
    let mut values: Vec<C64> = grid
        .points()
        .iter()
        .map(|&x| {
            let d = x - x0;
            let mag = (-d * d / (4.0 * sigma * sigma)).exp();
            Complex::from_polar(mag, k0 * x)
        })
        .collect();
    let norm_sq: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
    let scale = 1.0 / norm_sq.sqrt();
    for v in values.iter_mut() {
        *v *= scale;
    }
    values
}

/// Product state `f1(x1) f2(x2)`, normalized on the grid.
pub fn product_state(
    grid: Grid1D,
    f1: &[C64],
    f2: &[C64],
    hbar: f64,
    mass1: f64,
    mass2: f64,
) -> Result<Wavefunction2P> {
    let n = grid.n();
    if f1.len() != n || f2.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if f1.len() != n { f1.len() } else { f2.len() },
        });
    }
    let mut values = Vec::with_capacity(n * n);
    for a in f1 {
        for b in f2 {
            values.push(a * b);
        }
    }
    Wavefunction2P::normalized(grid, values, hbar, mass1, mass2)
}

/// Normalized superposition `ca * a + cb * b` of two wavefunctions on the
/// same grid.
pub fn superpose(a: &Wavefunction2P, b: &Wavefunction2P, ca: C64, cb: C64) -> Result<Wavefunction2P> {
    if a.grid() != b.grid() {
        return Err(Error::BadGrid(String::from(
            "superposed wavefunctions live on different grids",
        )));
    }
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| ca * x + cb * y)
        .collect();
    Wavefunction2P::normalized(*a.grid(), values, a.hbar, a.mass1, a.mass2)
}

/// Analytic width of a freely spreading Gaussian:
/// `sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)`.
pub fn free_gaussian_sigma(sigma0: f64, t: f64, hbar: f64, mass: f64) -> f64 {
    let r = hbar * t / (2.0 * mass * sigma0 * sigma0);
    sigma0 * (1.0 + r * r).sqrt()
}

/// Mean of a 1-D density on the grid.
pub fn density_mean(grid: &Grid1D, density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum::<f64>() * grid.dx();
    let mean: f64 = density
        .iter()
        .enumerate()
        .map(|(j, &d)| grid.x(j) * d)
        .sum::<f64>()
        * grid.dx();
    mean / total
}

/// Standard deviation of a 1-D density on the grid.
pub fn density_std(grid: &Grid1D, density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum::<f64>() * grid.dx();
    let mean = density_mean(grid, density);
    let var: f64 = density
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let dev = grid.x(j) - mean;
            dev * dev * d
        })
        .sum::<f64>()
        * grid.dx();
    (var / total).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(-8.0, 8.0, 64).unwrap()
    }

    fn free_product(k0: f64) -> Wavefunction2P {
        let g = grid();
        let f1 = gaussian_packet(&g, 0.0, k0, 1.0);
        let f2 = gaussian_packet(&g, 0.0, 0.0, 1.0);
        product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn construction_validates_shape_and_norm() {
        let g = grid();
        assert!(matches!(
            Wavefunction2P::new(g, vec![Complex::new(0.0, 0.0); 7], 1.0, 1.0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Wavefunction2P::new(g, vec![Complex::new(0.0, 0.0); 64 * 64], 1.0, 1.0, 1.0),
            Err(Error::NotNormalized { .. })
        ));
        let psi = free_product(0.0);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_states_carry_no_current() {
        let psi = free_product(0.0);
        let j = psi.current();
        for (a, b) in j.j1.iter().zip(&j.j2) {
            assert_eq!(*a, 0.0);
            assert_eq!(*b, 0.0);
        }
    }

    #[test]
    fn plane_wave_current_matches_the_phase_gradient() {
        // Centered differences bias the current where the envelope curves,
        // so resolve the packet finely and compare where it carries weight.
        let g = Grid1D::new(-8.0, 8.0, 256).unwrap();
        let k0 = 1.0;
        let f1 = gaussian_packet(&g, 0.0, k0, 1.0);
        let f2 = gaussian_packet(&g, 0.0, 0.0, 1.0);
        let psi = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();
        let rho = psi.density();
        let j = psi.current();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        for (idx, (&r, &cur)) in rho.iter().zip(&j.j1).enumerate() {
            if r > 1e-3 * peak {
                let expected = k0 * r; // hbar k / m with hbar = m = 1
                assert!(
                    (cur - expected).abs() < 0.02 * expected.abs(),
                    "point {idx}: {cur} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn marginals_integrate_to_one_and_match_products() {
        let g = grid();
        let f1 = gaussian_packet(&g, 1.0, 0.4, 0.9);
        let f2 = gaussian_packet(&g, -2.0, 0.0, 1.3);
        let psi = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();

        let rho1 = psi.marginal_density1();
        let total: f64 = rho1.iter().sum::<f64>() * g.dx();
        assert!((total - 1.0).abs() < 1e-8);
        for (j, &d) in rho1.iter().enumerate() {
            assert!((d - f1[j].norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn exchange_symmetric_states_have_equal_marginals() {
        let g = grid();
        let f1 = gaussian_packet(&g, 2.0, 0.0, 1.0);
        let f2 = gaussian_packet(&g, -2.0, 0.0, 1.0);
        let a = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();
        let b = product_state(g, &f2, &f1, 1.0, 1.0, 1.0).unwrap();
        let one = Complex::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = superpose(&a, &b, one, one).unwrap();

        let m1 = psi.marginal_density1();
        let m2 = psi.marginal_density2();
        for (x, y) in m1.iter().zip(&m2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn integrated_cross_divergence_vanishes() {
        let psi = free_product(1.3);
        assert!(psi.boundary_flux_residual() < 1e-8);
    }

    #[test]
    fn product_states_carry_no_mode_entanglement() {
        let g = Grid1D::new(-8.0, 8.0, 32).unwrap();
        let f1 = gaussian_packet(&g, 0.5, 0.7, 1.0);
        let f2 = gaussian_packet(&g, -1.0, -0.2, 0.8);
        let psi = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();
        assert!(psi.mode_entanglement_entropy() < 1e-8);

        // An equal two-branch superposition with disjoint supports carries
        // one bit.
        let ga = gaussian_packet(&g, -3.0, 0.0, 0.6);
        let gb = gaussian_packet(&g, 3.0, 0.0, 0.6);
        let branch_a = product_state(g, &ga, &ga, 1.0, 1.0, 1.0).unwrap();
        let branch_b = product_state(g, &gb, &gb, 1.0, 1.0, 1.0).unwrap();
        let one = Complex::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let cat = superpose(&branch_a, &branch_b, one, one).unwrap();
        assert!((cat.mode_entanglement_entropy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn conditionals_of_products_reproduce_the_first_factor() {
        let g = grid();
        let f1 = gaussian_packet(&g, 0.7, 1.1, 1.0);
        let f2 = gaussian_packet(&g, -0.5, 0.0, 0.9);
        let psi = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();

        for y in [-1.0, 0.3, 1.55] {
            let cond = psi.conditional_wavefunction(y).unwrap();
            // Fidelity with the normalized first factor, up to global phase.
            let overlap: C64 = cond
                .normalized
                .iter()
                .zip(&f1)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let fidelity = (overlap * g.dx()).norm_sqr();
            assert!(fidelity > 1.0 - 1e-10, "fidelity {fidelity}");
        }
    }

    #[test]
    fn conditionals_in_dead_regions_are_undefined() {
        let g = grid();
        let f1 = gaussian_packet(&g, 0.0, 0.0, 0.6);
        let f2 = gaussian_packet(&g, -5.0, 0.0, 0.5);
        let psi = product_state(g, &f1, &f2, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            psi.conditional_wavefunction(6.5),
            Err(Error::EmptyConditional { .. })
        ));
        assert!(matches!(
            psi.conditional_wavefunction(9.0),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn disjoint_branches_condition_onto_a_single_branch() {
        let g = grid();
        let g_l = gaussian_packet(&g, -2.0, 1.0, 0.7);
        let g_r = gaussian_packet(&g, 2.0, -1.0, 0.7);
        let h_l = gaussian_packet(&g, -5.0, 0.0, 0.6);
        let h_r = gaussian_packet(&g, 5.0, 0.0, 0.6);
        let left = product_state(g, &g_l, &h_l, 1.0, 1.0, 1.0).unwrap();
        let right = product_state(g, &g_r, &h_r, 1.0, 1.0, 1.0).unwrap();
        let one = Complex::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = superpose(&left, &right, one, one).unwrap();

        let cond = psi.conditional_wavefunction(-5.0).unwrap();
        let overlap: C64 = cond
            .normalized
            .iter()
            .zip(&g_l)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap * g.dx()).norm_sqr() > 1.0 - 1e-10);
    }

    #[test]
    fn packet_moments_match_their_parameters() {
        let g = Grid1D::new(-16.0, 16.0, 256).unwrap();
        let f = gaussian_packet(&g, 1.5, 0.0, 1.2);
        let rho: Vec<f64> = f.iter().map(|v| v.norm_sqr()).collect();
        assert!((density_mean(&g, &rho) - 1.5).abs() < 1e-10);
        assert!((density_std(&g, &rho) - 1.2).abs() < 1e-6);
        assert!((free_gaussian_sigma(1.0, 2.0, 1.0, 1.0) - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn potential_validation_guards() {
        let bad = PotentialSpec {
            external1: Potential1D::Zero,
            external2: Potential1D::Zero,
            interaction: PairPotential::SoftCoulomb { strength: 1.0, softening: 0.0 },
        };
        assert!(bad.validate().is_err());
        let ok = PotentialSpec {
            external1: Potential1D::Harmonic { omega: 1.0, center: 0.0 },
            external2: Potential1D::Barrier { height: 2.0, center: 0.0, width: 0.5 },
            interaction: PairPotential::SoftCoulomb { strength: 1.0, softening: 1.0 },
        };
        assert!(ok.validate().is_ok());
        assert!((ok.interaction.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((ok.external1.eval(2.0, 3.0) - 6.0).abs() < 1e-15);
    }
}
