//! Masked Cartesian grids.

use crate::error::{Error, Result};

const NO_DOF: u32 = u32::MAX;

/// A cell-centered Cartesian grid with an inside mask.
///
/// Cells whose centers satisfy the inside predicate carry one degree of
/// freedom each; all other cells (and everything outside the bounding box)
/// are Dirichlet cells. Cell `(i, j, k)` has linear index
/// `i + nx * (j + ny * k)`; in 2D `nz = 1`.
#[derive(Debug, Clone)]
pub struct GridDomain {
    dim: usize,
    h: f64,
    lower: [f64; 3],
    shape: [usize; 3],
    inside: Vec<bool>,
    dof_of_cell: Vec<u32>,
    cell_of_dof: Vec<usize>,
    distance: Vec<f64>,
}

impl GridDomain {
    /// Evaluates `inside` at every cell center of the box with lower corner
    /// `lower` and `shape` cells per axis.
    pub fn from_predicate<F>(dim: usize, h: f64, lower: &[f64], shape: &[usize], inside: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidArgument(format!("dimension {dim} not in {{2, 3}}")));
        }
        if !(h > 0.0) || lower.len() != dim || shape.len() != dim {
            return Err(Error::InvalidArgument("grid spacing or box malformed".into()));
        }
        let mut lo = [0.0; 3];
        let mut sh = [1usize; 3];
        lo[..dim].copy_from_slice(lower);
        sh[..dim].copy_from_slice(shape);
        let ncell = sh[0] * sh[1] * sh[2];
        let mut mask = vec![false; ncell];
        let mut x = [0.0; 3];
        for k in 0..sh[2] {
            for j in 0..sh[1] {
                for i in 0..sh[0] {
                    x[0] = lo[0] + (i as f64 + 0.5) * h;
                    x[1] = lo[1] + (j as f64 + 0.5) * h;
                    x[2] = lo[2] + (k as f64 + 0.5) * h;
                    mask[i + sh[0] * (j + sh[1] * k)] = inside(&x[..dim]);
                }
            }
        }
        Self::from_mask(dim, h, &lo[..dim], &sh[..dim], mask)
    }

    /// Box `[-half_width, half_width]^dim` split into `cells` cells per axis.
    pub fn centered<F>(dim: usize, half_width: f64, cells: usize, inside: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        if cells == 0 {
            return Err(Error::InvalidArgument("zero cells".into()));
        }
        let h = 2.0 * half_width / cells as f64;
        Self::from_predicate(dim, h, &vec![-half_width; dim], &vec![cells; dim], inside)
    }

    pub fn from_mask(dim: usize, h: f64, lower: &[f64], shape: &[usize], mask: Vec<bool>) -> Result<Self> {
        let mut lo = [0.0; 3];
        let mut sh = [1usize; 3];
        lo[..dim].copy_from_slice(lower);
        sh[..dim].copy_from_slice(shape);
        if mask.len() != sh[0] * sh[1] * sh[2] {
            return Err(Error::InvalidArgument("mask length does not match shape".into()));
        }
        let mut dof_of_cell = vec![NO_DOF; mask.len()];
        let mut cell_of_dof = Vec::new();
        for (c, &m) in mask.iter().enumerate() {
            if m {
                dof_of_cell[c] = cell_of_dof.len() as u32;
                cell_of_dof.push(c);
            }
        }
        let mut g = Self {
            dim,
            h,
            lower: lo,
            shape: sh,
            inside: mask,
            dof_of_cell,
            cell_of_dof,
            distance: Vec::new(),
        };
        g.distance = g.compute_distance();
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn lower(&self) -> [f64; 3] {
        self.lower
    }

    pub fn n_cells(&self) -> usize {
        self.inside.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.cell_of_dof.len()
    }

    /// Volume of one cell, `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn is_inside(&self, cell: usize) -> bool {
        self.inside[cell]
    }

    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn dof_of_cell(&self, cell: usize) -> Option<usize> {
        match self.dof_of_cell[cell] {
            NO_DOF => None,
            d => Some(d as usize),
        }
    }

    pub fn cell_of_dof(&self, dof: usize) -> usize {
        self.cell_of_dof[dof]
    }

    pub fn cells_of_dofs(&self) -> &[usize] {
        &self.cell_of_dof
    }

    pub fn cell_index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.shape[0] * (ijk[1] + self.shape[1] * ijk[2])
    }

    pub fn cell_coords(&self, cell: usize) -> [usize; 3] {
        let i = cell % self.shape[0];
        let j = (cell / self.shape[0]) % self.shape[1];
        let k = cell / (self.shape[0] * self.shape[1]);
        [i, j, k]
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let c = self.cell_coords(cell);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.lower[a] + (c[a] as f64 + 0.5) * self.h;
        }
        x
    }

    pub fn dof_center(&self, dof: usize) -> [f64; 3] {
        self.cell_center(self.cell_of_dof[dof])
    }

    /// Cell containing `x`, if inside the bounding box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for a in 0..self.dim {
            let t = ((x[a] - self.lower[a]) / self.h).floor();
            if t < 0.0 || t >= self.shape[a] as f64 {
                return None;
            }
            ijk[a] = t as usize;
        }
        Some(self.cell_index(ijk))
    }

    /// Face neighbors of a cell that lie inside the bounding box.
    pub fn cell_neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.cell_coords(cell);
        let dim = self.dim;
        (0..2 * dim).filter_map(move |d| {
            let axis = d / 2;
            let mut n = c;
            if d % 2 == 0 {
                if n[axis] == 0 {
                    return None;
                }
                n[axis] -= 1;
            } else {
                n[axis] += 1;
                if n[axis] >= self.shape[axis] {
                    return None;
                }
            }
            Some(self.cell_index(n))
        })
    }

    /// Distance from each DOF center to the mask boundary, `d(x) ≥ 0`.
    pub fn distance(&self) -> &[f64] {
        &self.distance
    }

    /// Discrete inradius `max d(x)`.
    pub fn inradius(&self) -> f64 {
        self.distance.iter().cloned().fold(0.0, f64::max)
    }

    // Exact Euclidean distance from interior cell centers to the nearest
    // exterior cell center (the box is padded with one exterior layer),
    // shifted by h/2 so that cells touching the boundary sit at ~0.
    fn compute_distance(&self) -> Vec<f64> {
        let dim = self.dim;
        let mut ps = [1usize; 3];
        for a in 0..dim {
            ps[a] = self.shape[a] + 2;
        }
        let np = ps[0] * ps[1] * ps[2];
        let big = 1e12;
        let mut f = vec![0.0; np];
        let pad = |a: usize| if a < dim { 1 } else { 0 };
        for (cell, &m) in self.inside.iter().enumerate() {
            if m {
                let c = self.cell_coords(cell);
                let p = (c[0] + pad(0)) + ps[0] * ((c[1] + pad(1)) + ps[1] * (c[2] + pad(2)));
                f[p] = big;
            }
        }
        let stride = [1, ps[0], ps[0] * ps[1]];
        let mut line = Vec::new();
        let mut out = Vec::new();
        for axis in 0..dim {
            let len = ps[axis];
            let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
            for b in 0..ps[others[1]] {
                for a in 0..ps[others[0]] {
                    let base = a * stride[others[0]] + b * stride[others[1]];
                    line.clear();
                    line.extend((0..len).map(|t| f[base + t * stride[axis]]));
                    squared_edt_1d(&line, &mut out);
                    for t in 0..len {
                        f[base + t * stride[axis]] = out[t];
                    }
                }
            }
        }
        self.cell_of_dof
            .iter()
            .map(|&cell| {
                let c = self.cell_coords(cell);
                let p = (c[0] + pad(0)) + ps[0] * ((c[1] + pad(1)) + ps[1] * (c[2] + pad(2)));
                (f[p].sqrt() * self.h - 0.5 * self.h).max(0.0)
            })
            .collect()
    }
}

/// Felzenszwalb–Huttenlocher lower envelope of parabolas.
fn squared_edt_1d(f: &[f64], d: &mut Vec<f64>) {
    let n = f.len();
    d.clear();
    d.resize(n, 0.0);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let cross = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = cross(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = cross(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = q as f64 - p as f64;
        *dq = dx * dx + f[p];
    }
}
