//! One-sided Jacobi singular value decomposition for small dense matrices.
//!
//! Column rotations drive pairwise column inner products to zero; the
//! converged column norms are the singular values and the accumulated
//! rotations form the right singular vectors.  Working on the matrix itself
//! (rather than its Gram matrix) keeps small singular values accurate to
//! machine precision, which the null-space searches in this crate rely on.

use crate::state::C64;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] use num_traits::Float; // float methods for no_std builds

const MAX_SWEEPS: usize = 60;
const ORTHO_EPS: f64 = 1e-15;

/// Singular values (descending) and matching right singular vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    /// One value per matrix column, sorted descending.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit right singular vector paired with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Svd {
    /// Right singular vectors whose singular values are at most `tol`.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .zip(&self.vectors)
            .filter(|(s, _)| **s <= tol)
            .map(|(_, v)| v.clone())
            .collect()
    }
}

/// Decompose a real `rows x cols` matrix given in row-major order.
pub fn svd(a: &[f64], rows: usize, cols: usize) -> Svd {
    assert_eq!(a.len(), rows * cols, "matrix shape mismatch");
    let mut columns: Vec<Vec<f64>> = (0..cols)
        .map(|c| (0..rows).map(|r| a[r * cols + c]).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|c| {
            let mut e = vec![0.0; cols];
            e[c] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for r in 0..rows {
                    aii += columns[i][r] * columns[i][r];
                    ajj += columns[j][r] * columns[j][r];
                    aij += columns[i][r] * columns[j][r];
                }
                if aij.abs() <= ORTHO_EPS * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = {
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let ci = columns[i][r];
                    let cj = columns[j][r];
                    columns[i][r] = c * ci - s * cj;
                    columns[j][r] = s * ci + c * cj;
                }
                for r in 0..cols {
                    let vi = v[i][r];
                    let vj = v[j][r];
                    v[i][r] = c * vi - s * vj;
                    v[j][r] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = columns
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_unstable_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    Svd {
        values: order.iter().map(|&k| norms[k]).collect(),
        vectors: order.iter().map(|&k| v[k].clone()).collect(),
    }
}

/// Singular values of a complex `rows x cols` matrix (row-major), descending.
///
/// The matrix `A + iB` is embedded as the real block matrix
/// `[[A, -B], [B, A]]`, whose singular values are those of the complex matrix
/// with every value doubled up; the pairs are collapsed before returning.
pub fn complex_singular_values(a: &[C64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols, "matrix shape mismatch");
    let rr = 2 * rows;
    let cc = 2 * cols;
    let mut embed = vec![0.0; rr * cc];
    for r in 0..rows {
        for c in 0..cols {
            let z = a[r * cols + c];
            embed[r * cc + c] = z.re;
            embed[r * cc + (cols + c)] = -z.im;
            embed[(rows + r) * cc + c] = z.im;
            embed[(rows + r) * cc + (cols + c)] = z.re;
        }
    }
    let full = svd(&embed, rr, cc);
    full.values.iter().step_by(2).copied().collect()
}
