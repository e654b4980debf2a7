//! In-place radix-2 fast Fourier transform with precomputed tables.
//!
//! Convention: `forward` computes `X_k = sum_j x_j e^{-2*pi*i*j*k/n}`;
//! `inverse` applies the conjugate kernel and divides by `n`, so the pair
//! round-trips exactly.

use crate::error::Error;
use crate::state::C64;
use crate::Result;
use alloc::vec::Vec;
use num_complex::Complex;

/// Transform plan for one length: bit-reversal permutation plus twiddle
/// factors, reusable across many transforms.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    rev: Vec<usize>,
    /// `w[k] = e^{-2*pi*i*k/n}` for `k < n/2`.
    w: Vec<C64>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::GridNotPowerOfTwo { len: n });
        }
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        let w = (0..n / 2)
            .map(|k| {
                Complex::from_polar(1.0, -2.0 * core::f64::consts::PI * k as f64 / n as f64)
            })
            .collect();
        Ok(Fft { n, rev, w })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            let mut base = 0;
            while base < n {
                for k in 0..half {
                    let mut w = self.w[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let u = data[base + k];
                    let v = data[base + k + half] * w;
                    data[base + k] = u + v;
                    data[base + k + half] = u - v;
                }
                base += len;
            }
            len <<= 1;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for d in data.iter_mut() {
                *d *= scale;
            }
        }
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }
}
