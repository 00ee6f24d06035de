//! Compressed-row symmetric matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Symmetric sparse matrix stored as full compressed rows (both triangles).
///
/// Column indices within a row are sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Only the pattern is checked for symmetry here; numerical symmetry is
    /// the caller's responsibility (see [`SparseSymmetric::is_symmetric`]).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) outside {n}x{n}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0u32; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let at = fill[r];
            cols[at] = c as u32;
            vals[at] = v;
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(u32, f64)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles directly from sorted rows. Used by the Galerkin products.
    pub(crate) fn from_sorted_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let n = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    #[inline]
    pub(crate) fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        let mut s = 0.0;
        for k in a..b {
            s += self.values[k] * x[self.col_idx[k] as usize];
        }
        s
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        crate::kernels::matvec(self, x, y);
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Exact numerical symmetry check.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .all(|(&c, &v)| self.get(c as usize, r) == v)
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        d
    }

    /// Debug export: one `row col value` triplet per line, 17 significant digits.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{r} {c} {v:.16e}");
            }
        }
        out
    }

    /// Parses the format written by [`SparseSymmetric::to_triplet_text`].
    pub fn from_triplet_text(n: usize, text: &str) -> Result<Self> {
        let mut trips = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_err = || Error::InvalidArgument(format!("bad triplet on line {}", ln + 1));
            let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            let c: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            trips.push((r, c, v));
        }
        Self::from_triplets(n, &trips)
    }

    /// Returns the value array, for in-place updates over a fixed pattern.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let a = SparseSymmetric::from_triplets(
            2,
            &[(0, 1, -1.0), (0, 0, 2.0), (0, 0, 1.0), (1, 0, -1.0), (1, 1, 3.0)],
        )
        .unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.row(0).0, &[0, 1]);
        assert!(a.is_symmetric());
        assert_eq!(a.mul(&[1.0, 1.0]), vec![2.0, 2.0]);
    }

    #[test]
    fn triplet_text_round_trip() {
        let a = SparseSymmetric::from_triplets(
            3,
            &[(0, 0, 4.0), (0, 2, -0.1), (2, 0, -0.1), (1, 1, 1.0 / 3.0), (2, 2, 5.0)],
        )
        .unwrap();
        let b = SparseSymmetric::from_triplet_text(3, &a.to_triplet_text()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseSymmetric::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }
}
