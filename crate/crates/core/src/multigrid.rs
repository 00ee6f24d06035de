//! Preconditioners for `K + s·D` with `K` a grid stiffness matrix and `D` a
//! non-negative diagonal.
//!
//! The multigrid hierarchy coarsens cells in 2^N blocks, interpolates with
//! cell-centered (bi/tri)linear weights (Dirichlet cells contribute zero) and
//! forms coarse operators by Galerkin products, so masked domains need no
//! special treatment. Smoothing is symmetric Gauss–Seidel and the coarsest
//! level is solved by a dense Cholesky factorization, which keeps the V-cycle
//! a symmetric positive definite preconditioner.

use crate::grid::GridDomain;
use crate::sparse::SparseSymmetric;

/// Applies an approximate inverse of an SPD operator.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// A preconditioner for the family `K + s·D`.
pub trait ShiftedPreconditioner: Preconditioner {
    /// Replaces the diagonal `D` (fine-level values, one per DOF).
    fn set_mass(&mut self, d: &[f64]);
    /// Retargets at `K + shift·D`.
    fn set_shift(&mut self, shift: f64);
    fn shift(&self) -> f64;
}

/// Diagonal scaling by `diag(K) + s·D`.
#[derive(Debug, Clone)]
pub struct Jacobi {
    kdiag: Vec<f64>,
    mass: Vec<f64>,
    shift: f64,
    inv: Vec<f64>,
}

impl Jacobi {
    pub fn new(k: &SparseSymmetric) -> Self {
        let kdiag = k.diagonal();
        let inv = kdiag.iter().map(|d| 1.0 / d).collect();
        Self {
            mass: vec![0.0; kdiag.len()],
            kdiag,
            shift: 0.0,
            inv,
        }
    }

    fn refresh(&mut self) {
        for ((inv, k), m) in self.inv.iter_mut().zip(&self.kdiag).zip(&self.mass) {
            *inv = 1.0 / (k + self.shift * m);
        }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv) {
            *zi = ri * d;
        }
    }
}

impl ShiftedPreconditioner for Jacobi {
    fn set_mass(&mut self, d: &[f64]) {
        self.mass.copy_from_slice(d);
        self.refresh();
    }

    fn set_shift(&mut self, shift: f64) {
        self.shift = shift;
        self.refresh();
    }

    fn shift(&self) -> f64 {
        self.shift
    }
}

/// Rectangular CSR used for the prolongation operators.
#[derive(Debug, Clone)]
struct Csr {
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0u32; self.cols.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for r in 0..self.nrows() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                cols[fill[c]] = r as u32;
                vals[fill[c]] = self.vals[k];
                fill[c] += 1;
            }
        }
        Csr {
            ncols: self.nrows(),
            row_ptr: counts,
            cols,
            vals,
        }
    }
}

#[derive(Debug, Clone)]
struct Level {
    stiff: SparseSymmetric,
    // D on this level, aligned with `stiff`'s pattern.
    mass: Vec<f64>,
    // stiff + shift * mass, same pattern.
    op: SparseSymmetric,
    diag_pos: Vec<usize>,
    // Prolongation from the next coarser level into this one, and its transpose.
    prolong: Option<(Csr, Csr)>,
}

#[derive(Debug, Clone)]
pub struct Multigrid {
    levels: Vec<Level>,
    shift: f64,
    sweeps: usize,
    coarse_chol: Vec<f64>,
}

const COARSEST_DOFS: usize = 160;

impl Multigrid {
    /// Builds the hierarchy for the stiffness matrix `k` assembled on `domain`.
    pub fn new(domain: &GridDomain, k: &SparseSymmetric) -> Self {
        let mut levels = Vec::new();
        let mut grid = domain.clone();
        let mut stiff = k.clone();
        loop {
            let n = stiff.dim();
            let sh = grid.shape();
            let too_small = n <= COARSEST_DOFS || (0..grid.dim()).any(|a| sh[a] <= 2);
            let diag_pos = diagonal_positions(&stiff);
            let mut level = Level {
                mass: vec![0.0; stiff.nnz()],
                op: stiff.clone(),
                stiff,
                diag_pos,
                prolong: None,
            };
            if too_small {
                levels.push(level);
                break;
            }
            let (coarse_grid, p) = coarsen(&grid);
            let pt = p.transpose();
            let coarse = galerkin(&pt, &level.stiff, &p);
            level.prolong = Some((p, pt));
            levels.push(level);
            grid = coarse_grid;
            stiff = coarse;
        }
        let mut mg = Self {
            levels,
            shift: 0.0,
            sweeps: 1,
            coarse_chol: Vec::new(),
        };
        mg.refresh_ops();
        mg
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Number of Gauss–Seidel sweeps before and after each coarse correction.
    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps.max(1);
        self
    }

    fn refresh_ops(&mut self) {
        let s = self.shift;
        for level in &mut self.levels {
            let sv = level.stiff.values();
            let ov = level.op.values_mut();
            for ((o, k), m) in ov.iter_mut().zip(sv).zip(&level.mass) {
                *o = k + s * m;
            }
        }
        let last = self.levels.last().unwrap();
        self.coarse_chol = dense_cholesky(&last.op.to_dense());
    }

    fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        let n = b.len();
        match &level.prolong {
            None => {
                dense_cholesky_solve(&self.coarse_chol, n, b, x);
            }
            Some((p, pt)) => {
                x.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..self.sweeps {
                    gs_forward(&level.op, &level.diag_pos, b, x);
                }
                let mut r = vec![0.0; n];
                level.op.matvec(x, &mut r);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri = bi - *ri;
                }
                let nc = pt.nrows();
                let mut bc = vec![0.0; nc];
                csr_mul(pt, &r, &mut bc);
                let mut xc = vec![0.0; nc];
                self.vcycle(l + 1, &bc, &mut xc);
                let mut corr = vec![0.0; n];
                csr_mul(p, &xc, &mut corr);
                for (xi, ci) in x.iter_mut().zip(&corr) {
                    *xi += ci;
                }
                for _ in 0..self.sweeps {
                    gs_backward(&level.op, &level.diag_pos, b, x);
                }
            }
        }
    }
}

impl Preconditioner for Multigrid {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.vcycle(0, r, z);
    }
}

impl ShiftedPreconditioner for Multigrid {
    fn set_mass(&mut self, d: &[f64]) {
        // Level 0 holds D exactly. Each coarser level holds P^T D_lumped P,
        // where D_lumped is the row-sum diagonal of the level above.
        let mut lumped = d.to_vec();
        for l in 0..self.levels.len() {
            let (upper, rest) = self.levels.split_at_mut(l);
            let level = &mut rest[0];
            level.mass.iter_mut().for_each(|v| *v = 0.0);
            if l == 0 {
                for (row, &pos) in level.diag_pos.iter().enumerate() {
                    level.mass[pos] = lumped[row];
                }
            } else {
                let (p, _) = upper[l - 1].prolong.as_ref().unwrap();
                let rp = level.stiff.row_ptr();
                for i in 0..p.nrows() {
                    let di = lumped[i];
                    if di == 0.0 {
                        continue;
                    }
                    for a in p.row_ptr[i]..p.row_ptr[i + 1] {
                        let ci = p.cols[a] as usize;
                        let wa = p.vals[a] * di;
                        let (cols, _) = level.stiff.row(ci);
                        for b in p.row_ptr[i]..p.row_ptr[i + 1] {
                            let k = cols
                                .binary_search(&p.cols[b])
                                .expect("mass pattern within stiffness pattern");
                            level.mass[rp[ci] + k] += wa * p.vals[b];
                        }
                    }
                }
            }
            let rp = level.stiff.row_ptr();
            lumped = (0..level.stiff.dim())
                .map(|r| level.mass[rp[r]..rp[r + 1]].iter().sum())
                .collect();
        }
        self.refresh_ops();
    }

    fn set_shift(&mut self, shift: f64) {
        self.shift = shift;
        self.refresh_ops();
    }

    fn shift(&self) -> f64 {
        self.shift
    }
}

fn diagonal_positions(a: &SparseSymmetric) -> Vec<usize> {
    let rp = a.row_ptr();
    (0..a.dim())
        .map(|r| {
            let (cols, _) = a.row(r);
            rp[r] + cols.binary_search(&(r as u32)).expect("structural diagonal")
        })
        .collect()
}

fn gs_forward(a: &SparseSymmetric, diag_pos: &[usize], b: &[f64], x: &mut [f64]) {
    let rp = a.row_ptr();
    let ci = a.col_idx();
    let v = a.values();
    for r in 0..b.len() {
        let mut s = b[r];
        for k in rp[r]..rp[r + 1] {
            s -= v[k] * x[ci[k] as usize];
        }
        let d = v[diag_pos[r]];
        x[r] += s / d;
    }
}

fn gs_backward(a: &SparseSymmetric, diag_pos: &[usize], b: &[f64], x: &mut [f64]) {
    let rp = a.row_ptr();
    let ci = a.col_idx();
    let v = a.values();
    for r in (0..b.len()).rev() {
        let mut s = b[r];
        for k in rp[r]..rp[r + 1] {
            s -= v[k] * x[ci[k] as usize];
        }
        let d = v[diag_pos[r]];
        x[r] += s / d;
    }
}

fn csr_mul(a: &Csr, x: &[f64], y: &mut [f64]) {
    for (r, yr) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            s += a.vals[k] * x[a.cols[k] as usize];
        }
        *yr = s;
    }
}

/// Coarsens `grid` by 2 along every axis and returns the interpolation from
/// coarse DOFs to fine DOFs.
fn coarsen(grid: &GridDomain) -> (GridDomain, Csr) {
    let dim = grid.dim();
    let sh = grid.shape();
    let mut csh = [1usize; 3];
    for a in 0..dim {
        csh[a] = sh[a].div_ceil(2);
    }
    let ncc = csh[0] * csh[1] * csh[2];
    let mut cmask = vec![false; ncc];
    let cidx = |c: [usize; 3]| c[0] + csh[0] * (c[1] + csh[1] * c[2]);
    for &cell in grid.cells_of_dofs() {
        let f = grid.cell_coords(cell);
        let mut c = [0usize; 3];
        for a in 0..dim {
            c[a] = f[a] / 2;
        }
        cmask[cidx(c)] = true;
    }
    let lo = grid.lower();
    let coarse = GridDomain::from_mask(dim, 2.0 * grid.spacing(), &lo[..dim], &csh[..dim], cmask)
        .expect("coarse grid");

    let mut row_ptr = vec![0usize];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut entries: Vec<(u32, f64)> = Vec::with_capacity(8);
    for &cell in grid.cells_of_dofs() {
        let f = grid.cell_coords(cell);
        entries.clear();
        let ncomb = 1usize << dim;
        for comb in 0..ncomb {
            let mut c = [0usize; 3];
            let mut w = 1.0;
            let mut valid = true;
            for a in 0..dim {
                let parent = (f[a] / 2) as i64;
                let near = comb >> a & 1 == 0;
                let idx = if near {
                    w *= 0.75;
                    parent
                } else {
                    w *= 0.25;
                    if f[a] % 2 == 0 {
                        parent - 1
                    } else {
                        parent + 1
                    }
                };
                if idx < 0 || idx >= csh[a] as i64 {
                    valid = false;
                    break;
                }
                c[a] = idx as usize;
            }
            if !valid {
                continue;
            }
            if let Some(d) = coarse.dof_of_cell(cidx(c)) {
                entries.push((d as u32, w));
            }
        }
        entries.sort_by_key(|e| e.0);
        for &(c, w) in &entries {
            cols.push(c);
            vals.push(w);
        }
        row_ptr.push(cols.len());
    }
    let p = Csr {
        ncols: coarse.n_dofs(),
        row_ptr,
        cols,
        vals,
    };
    (coarse, p)
}

/// `P^T A P`.
fn galerkin(pt: &Csr, a: &SparseSymmetric, p: &Csr) -> SparseSymmetric {
    let nc = pt.nrows();
    let mut acc = vec![0.0; nc];
    let mut mark = vec![u32::MAX; nc];
    let mut touched: Vec<u32> = Vec::new();
    let mut rows = Vec::with_capacity(nc);
    for ci in 0..nc {
        touched.clear();
        for k in pt.row_ptr[ci]..pt.row_ptr[ci + 1] {
            let fi = pt.cols[k] as usize;
            let wi = pt.vals[k];
            let (acols, avals) = a.row(fi);
            for (&fj, &aij) in acols.iter().zip(avals) {
                let fj = fj as usize;
                let wij = wi * aij;
                for q in p.row_ptr[fj]..p.row_ptr[fj + 1] {
                    let cj = p.cols[q];
                    if mark[cj as usize] != ci as u32 {
                        mark[cj as usize] = ci as u32;
                        acc[cj as usize] = 0.0;
                        touched.push(cj);
                    }
                    acc[cj as usize] += wij * p.vals[q];
                }
            }
        }
        touched.sort_unstable();
        rows.push(touched.iter().map(|&c| (c, acc[c as usize])).collect());
    }
    let mut m = SparseSymmetric::from_sorted_rows(rows);
    symmetrize(&mut m);
    m
}

// Galerkin products are symmetric up to rounding; make them exactly so.
fn symmetrize(m: &mut SparseSymmetric) {
    let n = m.dim();
    let rp = m.row_ptr().to_vec();
    let ci = m.col_idx().to_vec();
    let mut vals = m.values().to_vec();
    for r in 0..n {
        for k in rp[r]..rp[r + 1] {
            let c = ci[k] as usize;
            if c > r {
                let (cols, _) = m.row(c);
                let j = rp[c] + cols.binary_search(&(r as u32)).expect("symmetric pattern");
                let avg = 0.5 * (vals[k] + vals[j]);
                vals[k] = avg;
                vals[j] = avg;
            }
        }
    }
    m.values_mut().copy_from_slice(&vals);
}

fn dense_cholesky(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    l
}

fn dense_cholesky_solve(l: &[f64], n: usize, b: &[f64], x: &mut [f64]) {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    x.copy_from_slice(&y);
}
