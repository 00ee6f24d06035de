//! Vector and sparse kernels.
//!
//! Reductions are split into fixed-size chunks whose partial sums are added in
//! chunk order, so the sequential and the rayon paths produce bit-identical
//! results regardless of the thread count. With the `parallel` feature
//! disabled the dispatching functions fall back to [`seq`].

use crate::sparse::SparseSymmetric;

/// Chunk length for reductions and row-blocked products.
pub const CHUNK: usize = 4096;

/// Single-threaded kernels. Always compiled; used directly by benches.
pub mod seq {
    use super::CHUNK;
    use crate::sparse::SparseSymmetric;

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let mut total = 0.0;
        for (ca, cb) in a.chunks(CHUNK).zip(b.chunks(CHUNK)) {
            total += super::chunk_dot(ca, cb);
        }
        total
    }

    pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    }

    pub fn matvec(a: &SparseSymmetric, x: &[f64], y: &mut [f64]) {
        for (row, yi) in y.iter_mut().enumerate() {
            *yi = a.row_dot(row, x);
        }
    }
}

/// Rayon kernels with the same chunking as [`seq`].
#[cfg(feature = "parallel")]
pub mod par {
    use super::CHUNK;
    use crate::sparse::SparseSymmetric;
    use rayon::prelude::*;

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let partials: Vec<f64> = a
            .par_chunks(CHUNK)
            .zip(b.par_chunks(CHUNK))
            .map(|(ca, cb)| super::chunk_dot(ca, cb))
            .collect();
        partials.iter().fold(0.0, |acc, p| acc + p)
    }

    pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(cy, cx)| {
                for (yi, xi) in cy.iter_mut().zip(cx) {
                    *yi += alpha * xi;
                }
            });
    }

    pub fn matvec(a: &SparseSymmetric, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, cy)| {
            let base = c * CHUNK;
            for (k, yi) in cy.iter_mut().enumerate() {
                *yi = a.row_dot(base + k, x);
            }
        });
    }
}

#[inline]
fn chunk_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

// Below this length the rayon dispatch overhead dominates.
#[cfg(feature = "parallel")]
const PAR_MIN: usize = 4 * CHUNK;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    if a.len() >= PAR_MIN {
        return par::dot(a, b);
    }
    seq::dot(a, b)
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if y.len() >= PAR_MIN {
        return par::axpy(alpha, x, y);
    }
    seq::axpy(alpha, x, y)
}

pub fn matvec(a: &SparseSymmetric, x: &[f64], y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if y.len() >= PAR_MIN {
        return par::matvec(a, x, y);
    }
    seq::matvec(a, x, y)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
