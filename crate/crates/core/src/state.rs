//! Dense state vectors for dual-rail registers and the gates acting on them.
//!
//! A register of `n` particles, each in one of two spatial modes, is stored
//! as `2^n` complex amplitudes.  Particle 0 owns the most significant bit of
//! the basis index: for two particles the basis order is
//! `|0,0> |0,1> |1,0> |1,1>`.

use crate::error::Error;
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;
#[allow(unused_imports)] use num_traits::Float; // float methods for no_std builds

pub type C64 = Complex<f64>;

/// Maximum tolerated deviation from unitarity for gate matrices.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Maximum tolerated deviation of a state's squared norm from one.
pub const NORM_TOL: f64 = 1e-10;

const SQRT_HALF: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Mode of `particle` in basis index `index` for an `n`-particle register.
#[inline]
pub fn mode_of(index: usize, particle: usize, n: usize) -> u8 {
    ((index >> (n - 1 - particle)) & 1) as u8
}

/// Basis index with `particle`'s mode bit replaced by `mode`.
#[inline]
pub fn with_mode(index: usize, particle: usize, n: usize, mode: u8) -> usize {
    let bit = 1 << (n - 1 - particle);
    (index & !bit) | ((mode as usize) << (n - 1 - particle))
}

/// A 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub e: [[C64; 2]; 2],
}

impl Mat2 {
    pub fn from_rows(e: [[C64; 2]; 2]) -> Self {
        Mat2 { e }
    }

    pub fn identity() -> Self {
        Mat2::from_rows([
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        ])
    }

    pub fn hadamard() -> Self {
        let h = Complex::new(SQRT_HALF, 0.0);
        Mat2::from_rows([[h, h], [h, -h]])
    }

    pub fn pauli_x() -> Self {
        Mat2::from_rows([
            [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_z() -> Self {
        Mat2::from_rows([
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            [Complex::new(0.0, 0.0), Complex::new(-1.0, 0.0)],
        ])
    }

    /// diag(1, e^{i theta}).
    pub fn phase(theta: f64) -> Self {
        Mat2::from_rows([
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            [Complex::new(0.0, 0.0), Complex::from_polar(1.0, theta)],
        ])
    }

    /// Balanced mode-mixer with independently chosen phase shifts: all four
    /// magnitudes are 1/sqrt(2) and the fourth phase is fixed by unitarity to
    /// `pi + p01 + p10 - p00`.
    pub fn balanced_polar(p00: f64, p01: f64, p10: f64) -> Self {
        let m = core::f64::consts::FRAC_1_SQRT_2;
        let p11 = core::f64::consts::PI + p01 + p10 - p00;
        Mat2::from_rows([
            [Complex::from_polar(m, p00), Complex::from_polar(m, p01)],
            [Complex::from_polar(m, p10), Complex::from_polar(m, p11)],
        ])
    }

    /// General single-particle rotation
    /// `[[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(l+p)} cos(t/2)]]`.
    pub fn euler(theta: f64, phi: f64, lambda: f64) -> Self {
        let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        Mat2::from_rows([
            [
                Complex::new(c, 0.0),
                -Complex::from_polar(s, lambda),
            ],
            [
                Complex::from_polar(s, phi),
                Complex::from_polar(c, lambda + phi),
            ],
        ])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [[Complex::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = self.e[r][0] * rhs.e[0][c] + self.e[r][1] * rhs.e[1][c];
            }
        }
        Mat2::from_rows(out)
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.e[0][0] * v[0] + self.e[0][1] * v[1],
            self.e[1][0] * v[0] + self.e[1][1] * v[1],
        ]
    }

    pub fn dagger(&self) -> Mat2 {
        Mat2::from_rows([
            [self.e[0][0].conj(), self.e[1][0].conj()],
            [self.e[0][1].conj(), self.e[1][1].conj()],
        ])
    }

    /// Largest entry of |U^dagger U - I|.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.dagger().mul(self);
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((p.e[r][c] - Complex::new(target, 0.0)).norm());
            }
        }
        dev
    }

    pub fn check_unitary(&self) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { max_deviation: dev });
        }
        Ok(())
    }
}

/// Normalized amplitudes over the `2^n` basis configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_particles: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state with the given index.
    pub fn basis(n_particles: usize, index: usize) -> Self {
        let dim = 1 << n_particles;
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![Complex::new(0.0, 0.0); dim];
        amps[index] = Complex::new(1.0, 0.0);
        StateVector { n_particles, amps }
    }

    /// Basis state from per-particle modes, particle 0 first.
    pub fn from_modes(modes: &[u8]) -> Self {
        let n = modes.len();
        let mut index = 0usize;
        for (p, &m) in modes.iter().enumerate() {
            index |= (m as usize & 1) << (n - 1 - p);
        }
        StateVector::basis(n, index)
    }

    /// Two-particle state `(|0,0> + |1,1>)/sqrt(2)`.
    pub fn bell() -> Self {
        let h = Complex::new(SQRT_HALF, 0.0);
        StateVector {
            n_particles: 2,
            amps: vec![h, Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), h],
        }
    }

    /// Wrap explicit amplitudes, requiring unit norm.
    pub fn from_amplitudes(n_particles: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_particles;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
        }
        let state = StateVector { n_particles, amps };
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Apply a single-particle unitary to `target` in place.
    pub fn apply_single(&mut self, target: usize, m: &Mat2) -> Result<()> {
        if target >= self.n_particles {
            return Err(Error::ParticleOutOfRange {
                particle: target,
                n_particles: self.n_particles,
            });
        }
        let stride = 1usize << (self.n_particles - 1 - target);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for low in base..base + stride {
                let high = low + stride;
                let a = self.amps[low];
                let b = self.amps[high];
                self.amps[low] = m.e[0][0] * a + m.e[0][1] * b;
                self.amps[high] = m.e[1][0] * a + m.e[1][1] * b;
            }
            base += 2 * stride;
        }
        Ok(())
    }

    /// Multiply by `e^{i theta}` every amplitude whose two named particles sit
    /// in their controlled modes; for two particles that is exactly one
    /// amplitude.
    pub fn apply_controlled_phase(
        &mut self,
        particles: (usize, usize),
        controlled_modes: (u8, u8),
        theta: f64,
    ) -> Result<()> {
        let (p, q) = particles;
        let n = self.n_particles;
        if p >= n {
            return Err(Error::ParticleOutOfRange { particle: p, n_particles: n });
        }
        if q >= n {
            return Err(Error::ParticleOutOfRange { particle: q, n_particles: n });
        }
        if p == q {
            return Err(Error::ControlEqualsTarget { particle: p });
        }
        let factor = Complex::from_polar(1.0, theta);
        for idx in 0..self.amps.len() {
            if mode_of(idx, p, n) == controlled_modes.0 && mode_of(idx, q, n) == controlled_modes.1
            {
                self.amps[idx] *= factor;
            }
        }
        Ok(())
    }

    /// Outcome probability of one basis configuration.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Normalized single-particle slices through the dominant configuration.
    /// For a tensor-product state these are the exact local factors (up to a
    /// per-particle phase); for an entangled state they are only a nearby
    /// product ansatz.
    pub fn slice_factors(&self) -> Vec<[C64; 2]> {
        let n = self.n_particles;
        let anchor = self
            .amps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        (0..n)
            .map(|p| {
                let v0 = self.amps[with_mode(anchor, p, n, 0)];
                let v1 = self.amps[with_mode(anchor, p, n, 1)];
                let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
                [v0 / norm, v1 / norm]
            })
            .collect()
    }

    /// Per-particle local factors if the state is a tensor product of
    /// single-particle states (up to global phase, within `1e-10` in
    /// fidelity); `None` when entangled.
    pub fn local_factors(&self) -> Option<Vec<[C64; 2]>> {
        let n = self.n_particles;
        let factors = self.slice_factors();
        let mut fidelity = Complex::new(0.0, 0.0);
        for (idx, amp) in self.amps.iter().enumerate() {
            let mut recon = Complex::new(1.0, 0.0);
            for (p, f) in factors.iter().enumerate() {
                recon *= f[mode_of(idx, p, n) as usize];
            }
            fidelity += recon.conj() * amp;
        }
        if (fidelity.norm() - 1.0).abs() < 1e-10 {
            Some(factors)
        } else {
            None
        }
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![Complex::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = DenseMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = DenseMatrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    out.data[r * d + c] += a * rhs.get(k, c);
                }
            }
        }
        out
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: state.dim() });
        }
        let amps = (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.get(r, c) * state.amplitudes()[c])
                    .sum()
            })
            .collect();
        Ok(StateVector { n_particles: state.n_particles(), amps })
    }
}

/// Embed a single-particle matrix at `target` into the full register:
/// identity on every other particle, ordered with particle 0 as the most
/// significant factor.
pub fn kron_embed(m: &Mat2, target: usize, n_particles: usize) -> Result<DenseMatrix> {
    if target >= n_particles {
        return Err(Error::ParticleOutOfRange { particle: target, n_particles });
    }
    let dim = 1usize << n_particles;
    let mut out = DenseMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !(1 << (n_particles - 1 - target)) != c & !(1 << (n_particles - 1 - target)) {
                continue;
            }
            let mr = mode_of(r, target, n_particles) as usize;
            let mc = mode_of(c, target, n_particles) as usize;
            out.set(r, c, m.e[mr][mc]);
        }
    }
    Ok(out)
}
