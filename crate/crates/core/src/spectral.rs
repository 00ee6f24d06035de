//! Discrete Dirichlet Laplacian, bang-bang weights and the principal
//! eigenvalue of the indefinite pencil `K u = λ M u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::kernels::{axpy, dot, norm};
use crate::multigrid::{Jacobi, Multigrid, Preconditioner, ShiftedPreconditioner};
use crate::sparse::SparseSymmetric;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAXIT: usize = 50_000;

/// Cell-centered `(2N+1)`-point Laplacian scaled so that `uᵀKu ≈ ∫|∇u|²`.
/// Neighbours outside the mask are Dirichlet and simply dropped.
pub fn assemble_stiffness(domain: &GridDomain) -> Result<SparseSymmetric> {
    let n = domain.n_dofs();
    if n == 0 {
        return Err(Error::DegenerateDomain("no interior cells".into()));
    }
    let dim = domain.dim();
    let scale = domain.spacing().powi(dim as i32 - 2);
    let diag = 2.0 * dim as f64 * scale;
    let mut rows = Vec::with_capacity(n);
    for dof in 0..n {
        let cell = domain.cell_of_dof(dof);
        let mut row: Vec<(u32, f64)> = domain
            .cell_neighbors(cell)
            .filter_map(|nb| domain.dof_of_cell(nb))
            .map(|d| (d as u32, -scale))
            .collect();
        row.push((dof as u32, diag));
        row.sort_unstable_by_key(|e| e.0);
        rows.push(row);
    }
    Ok(SparseSymmetric::from_sorted_rows(rows))
}

/// Weight `m̄ χ_E − m̲ χ_{Ω∖E}` on the interior DOFs of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BangBangWeight {
    pub mbar: f64,
    pub munder: f64,
    /// Favorable flag per interior DOF.
    pub favorable: Vec<bool>,
    /// Measure of E, i.e. favorable count times the cell volume.
    pub epsilon: f64,
}

impl BangBangWeight {
    /// Builds the weight from a list of favorable grid cells.
    pub fn from_cells(domain: &GridDomain, mbar: f64, munder: f64, cells: &[usize]) -> Result<Self> {
        check_densities(mbar, munder)?;
        let mut favorable = vec![false; domain.n_dofs()];
        for &c in cells {
            let dof = domain.dof_of_cell(c).ok_or_else(|| {
                Error::InvalidWeight(format!("favorable cell {c} is outside the domain"))
            })?;
            favorable[dof] = true;
        }
        Ok(Self::from_dof_mask(domain, mbar, munder, favorable))
    }

    /// Builds the weight from a per-DOF favorable mask.
    pub fn from_dof_mask(domain: &GridDomain, mbar: f64, munder: f64, favorable: Vec<bool>) -> Self {
        let count = favorable.iter().filter(|&&f| f).count();
        Self {
            mbar,
            munder,
            epsilon: count as f64 * domain.cell_volume(),
            favorable,
        }
    }

    pub fn favorable_count(&self) -> usize {
        self.favorable.iter().filter(|&&f| f).count()
    }

    pub fn value(&self, dof: usize) -> f64 {
        if self.favorable[dof] {
            self.mbar
        } else {
            -self.munder
        }
    }
}

pub(crate) fn check_densities(mbar: f64, munder: f64) -> Result<()> {
    if !(mbar > 0.0 && mbar.is_finite() && munder > 0.0 && munder.is_finite()) {
        return Err(Error::InvalidWeight(format!(
            "densities must be positive and finite (mbar={mbar}, munder={munder})"
        )));
    }
    Ok(())
}

/// Number of favorable cells representing measure `eps`.
pub fn favorable_cell_count(domain: &GridDomain, eps: f64) -> Result<usize> {
    let count = (eps / domain.cell_volume()).round();
    if !(count >= 1.0) {
        return Err(Error::EpsilonBelowResolution(format!(
            "eps={eps} is less than half a cell (cell volume {})",
            domain.cell_volume()
        )));
    }
    Ok(count as usize)
}

/// Lumped mass `m_i h^N` per interior DOF.
pub fn assemble_weight_mass(domain: &GridDomain, w: &BangBangWeight) -> Result<Vec<f64>> {
    if w.favorable.len() != domain.n_dofs() {
        return Err(Error::InvalidWeight(format!(
            "weight has {} entries, domain has {} interior cells",
            w.favorable.len(),
            domain.n_dofs()
        )));
    }
    check_densities(w.mbar, w.munder)?;
    let vol = domain.cell_volume();
    Ok((0..w.favorable.len()).map(|i| w.value(i) * vol).collect())
}

/// Solves `K x = b` by Jacobi-preconditioned conjugate gradients.
pub fn solve_spd(k: &SparseSymmetric, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let pc = Jacobi::new(k);
    let maxit = (10 * k.dim()).max(1000);
    pcg(k, &pc, b, tol, maxit)
}

/// Preconditioned CG from a zero initial guess; stops on `‖r‖ ≤ tol ‖b‖`.
pub fn pcg(
    k: &SparseSymmetric,
    pc: &dyn Preconditioner,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<Vec<f64>> {
    let n = k.dim();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix has {n} rows",
            b.len()
        )));
    }
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = 1.0;
    for _ in 0..maxit {
        k.matvec(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(x);
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NonConvergence {
        iterations: maxit,
        residual: rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `Σ u_i² h^N = 1`.
    L2,
    /// `uᵀ M u = ∫ m u² = 1`.
    Weighted,
}

/// Result of a principal eigenvalue computation.
///
/// When the weight has no favorable cell the eigenvalue is `+∞`, `u` is empty
/// and `iterations` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub normalization: Normalization,
    pub residual: f64,
    pub iterations: usize,
}

impl EigenSolution {
    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite()
    }

    /// Rescales `u` to unit `L²` norm for the given cell volume.
    pub fn normalize_l2(&mut self, cell_volume: f64) {
        let s = (dot(&self.u, &self.u) * cell_volume).sqrt();
        if s > 0.0 {
            self.u.iter_mut().for_each(|v| *v /= s);
        }
        self.normalization = Normalization::L2;
    }

    /// Rescales `u` so that `uᵀ M u = 1`.
    pub fn normalize_weighted(&mut self, mass: &[f64]) {
        let s: f64 = weighted_sq(mass, &self.u).sqrt();
        if s > 0.0 {
            self.u.iter_mut().for_each(|v| *v /= s);
        }
        self.normalization = Normalization::Weighted;
    }
}

fn weighted_sq(mass: &[f64], u: &[f64]) -> f64 {
    let mu: Vec<f64> = mass.iter().zip(u).map(|(m, x)| m * x).collect();
    dot(&mu, u)
}

/// Options for [`principal_eigenvalue_with`].
#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Initial vector; all ones when absent.
    pub start: Option<Vec<f64>>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            start: None,
        }
    }
}

/// Principal eigenvalue `λ¹ = 1/μ*`, with `μ*` the largest eigenvalue of
/// `M v = μ K v`, using diagonal preconditioning.
pub fn principal_eigenvalue(
    k: &SparseSymmetric,
    m: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<EigenSolution> {
    let mut pc = Jacobi::new(k);
    let opts = EigenOptions {
        tol,
        maxit,
        start: None,
    };
    principal_eigenvalue_with(k, m, &mut pc, &opts)
}

/// Locally optimal block preconditioned CG (block size one) maximizing
/// `μ(x) = xᵀMx / xᵀKx`.
///
/// The preconditioner is retargeted at `K + λ D` with `D` the hostile part of
/// `M`, which approximates the shifted operator `K − λ M` away from the
/// favorable cells. Every Ritz step keeps the current iterate in the search
/// space, so `μ` never decreases; started from a vector `v` the returned
/// eigenvalue is at most `vᵀKv / vᵀMv`.
pub fn principal_eigenvalue_with(
    k: &SparseSymmetric,
    m: &[f64],
    pc: &mut dyn ShiftedPreconditioner,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let n = k.dim();
    if m.len() != n {
        return Err(Error::InvalidArgument(format!(
            "mass has length {}, matrix has {n} rows",
            m.len()
        )));
    }
    if m.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidWeight("mass vector is identically zero".into()));
    }
    // xᵀMx > 0 for some x iff some diagonal entry is positive.
    if m.iter().all(|&v| v <= 0.0) {
        return Ok(EigenSolution {
            lambda: f64::INFINITY,
            u: Vec::new(),
            normalization: Normalization::Weighted,
            residual: 0.0,
            iterations: 0,
        });
    }

    let hostile: Vec<f64> = m.iter().map(|&v| (-v).max(0.0)).collect();
    pc.set_mass(&hostile);

    let mut x = match &opts.start {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::InvalidArgument(format!(
                "start vector has length {}, expected {n}",
                s.len()
            )))
        }
        None => vec![1.0; n],
    };
    if weighted_sq(m, &x) <= 0.0 {
        x = m.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    }

    let mut kx = vec![0.0; n];
    let mut mx = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut kw = vec![0.0; n];
    let mut p: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut residual = f64::INFINITY;
    let mut shift = pc.shift();

    for iter in 0..opts.maxit {
        k.matvec(&x, &mut kx);
        let xkx = dot(&x, &kx);
        let s = 1.0 / xkx.sqrt();
        x.iter_mut().for_each(|v| *v *= s);
        kx.iter_mut().for_each(|v| *v *= s);
        for ((mxi, mi), xi) in mx.iter_mut().zip(m).zip(&x) {
            *mxi = mi * xi;
        }
        let mu = dot(&x, &mx);
        for ((ri, mxi), kxi) in r.iter_mut().zip(&mx).zip(&kx) {
            *ri = mxi - mu * kxi;
        }
        residual = if mu > 0.0 {
            norm(&r) / (mu * norm(&kx))
        } else {
            f64::INFINITY
        };
        if residual <= opts.tol {
            return Ok(finish(k, m, x, residual, iter));
        }

        if mu > 0.0 {
            let target = 1.0 / mu;
            if shift == 0.0 || (target - shift).abs() > 0.05 * shift {
                pc.set_shift(target);
                shift = target;
            }
        }
        pc.apply(&r, &mut w);

        // K-orthonormal basis [x, w, p].
        k.matvec(&w, &mut kw);
        k_orthogonalize(&mut w, &mut kw, &x, &kx);
        let wn = dot(&w, &kw);
        if !(wn > 0.0) {
            return Err(Error::NonConvergence {
                iterations: iter,
                residual,
            });
        }
        scale2(&mut w, &mut kw, 1.0 / wn.sqrt());

        let mut basis_p = None;
        if let Some((mut pv, mut kp)) = p.take() {
            let before = dot(&pv, &kp);
            k_orthogonalize(&mut pv, &mut kp, &x, &kx);
            k_orthogonalize(&mut pv, &mut kp, &w, &kw);
            let after = dot(&pv, &kp);
            if after > 1e-16 * before && after > 0.0 {
                scale2(&mut pv, &mut kp, 1.0 / after.sqrt());
                basis_p = Some((pv, kp));
            }
        }

        let mut vecs: Vec<(&[f64], &[f64])> = vec![(&x, &kx), (&w, &kw)];
        if let Some((pv, kp)) = &basis_p {
            vecs.push((pv, kp));
        }
        let coeffs = loop {
            match ritz_top(&vecs, m) {
                Some(c) => break c,
                None if vecs.len() > 2 => {
                    vecs.pop();
                }
                None => {
                    return Err(Error::NonConvergence {
                        iterations: iter,
                        residual,
                    })
                }
            }
        };
        let used_p = vecs.len() == 3;
        drop(vecs);

        // p_new = c1 w + c2 p, x_new = c0 x + p_new.
        let mut pn = vec![0.0; n];
        let mut kpn = vec![0.0; n];
        for i in 0..n {
            pn[i] = coeffs[1] * w[i];
            kpn[i] = coeffs[1] * kw[i];
        }
        if used_p {
            let (pv, kp) = basis_p.as_ref().unwrap();
            axpy(coeffs[2], pv, &mut pn);
            axpy(coeffs[2], kp, &mut kpn);
        }
        for i in 0..n {
            x[i] = coeffs[0] * x[i] + pn[i];
        }
        p = Some((pn, kpn));
    }
    Err(Error::NonConvergence {
        iterations: opts.maxit,
        residual,
    })
}

fn finish(k: &SparseSymmetric, m: &[f64], mut x: Vec<f64>, residual: f64, iterations: usize) -> EigenSolution {
    let total: f64 = x.iter().sum();
    if total < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut residual = residual;
    if x.iter().any(|&v| v <= 0.0) {
        let lambda = dot(&x, &k.mul(&x)) / weighted_sq(m, &x);
        repair_positivity(k, m, lambda, &mut x);
        let kx = k.mul(&x);
        let lambda = dot(&x, &kx) / weighted_sq(m, &x);
        let r: Vec<f64> = kx.iter().zip(m).zip(&x).map(|((kv, mi), xi)| kv - lambda * mi * xi).collect();
        residual = norm(&r) / norm(&kx);
    }
    let mut sol = EigenSolution {
        lambda: 0.0,
        u: x,
        normalization: Normalization::Weighted,
        residual,
        iterations,
    };
    sol.normalize_weighted(m);
    let ku = k.mul(&sol.u);
    sol.lambda = dot(&sol.u, &ku) / weighted_sq(m, &sol.u);
    sol
}

/// Entries far from the favorable set can sit below the solver tolerance and
/// come out zero or negative. Each such entry is re-solved from its own row of
/// `(K + λM₋) u = λM₊ u`; with nonnegative neighbors the result is
/// nonnegative, and positive once a neighbor is.
fn repair_positivity(k: &SparseSymmetric, m: &[f64], lambda: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    for _ in 0..x.len() {
        let mut pending = false;
        for i in 0..x.len() {
            if x[i] > 0.0 {
                continue;
            }
            let (cols, vals) = k.row(i);
            let mut off = 0.0;
            let mut diag = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c as usize == i {
                    diag = v;
                } else {
                    off -= v * x[c as usize];
                }
            }
            // x[i] is zero here, so the favorable self-term drops out.
            x[i] = off / (diag + lambda * (-m[i]).max(0.0));
            pending |= x[i] <= 0.0;
        }
        if !pending {
            break;
        }
    }
}

fn k_orthogonalize(v: &mut [f64], kv: &mut [f64], x: &[f64], kx: &[f64]) {
    let c = dot(x, kv);
    axpy(-c, x, v);
    axpy(-c, kx, kv);
}

fn scale2(a: &mut [f64], b: &mut [f64], s: f64) {
    a.iter_mut().for_each(|v| *v *= s);
    b.iter_mut().for_each(|v| *v *= s);
}

/// Rayleigh–Ritz for the largest eigenvalue of `SᵀMS c = μ SᵀKS c`.
/// Returns `None` when the `K` Gram matrix is numerically singular.
fn ritz_top(vecs: &[(&[f64], &[f64])], m: &[f64]) -> Option<Vec<f64>> {
    let q = vecs.len();
    let mut gk = [[0.0; 3]; 3];
    let mut gm = [[0.0; 3]; 3];
    let mv: Vec<Vec<f64>> = vecs
        .iter()
        .map(|(v, _)| v.iter().zip(m).map(|(a, b)| a * b).collect())
        .collect();
    for i in 0..q {
        for j in 0..=i {
            gk[i][j] = 0.5 * (dot(vecs[i].0, vecs[j].1) + dot(vecs[j].0, vecs[i].1));
            gk[j][i] = gk[i][j];
            gm[i][j] = dot(vecs[i].0, &mv[j]);
            gm[j][i] = gm[i][j];
        }
    }
    // Cholesky of the K Gram matrix.
    let mut l = [[0.0; 3]; 3];
    for j in 0..q {
        let mut d = gk[j][j];
        for t in 0..j {
            d -= l[j][t] * l[j][t];
        }
        if !(d > 1e-12 * gk[j][j].abs().max(1.0)) {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..q {
            let mut s = gk[i][j];
            for t in 0..j {
                s -= l[i][t] * l[j][t];
            }
            l[i][j] = s / d;
        }
    }
    // C = L⁻¹ G_M L⁻ᵀ.
    let linv = lower_inverse(&l, q);
    let mut c = [[0.0; 3]; 3];
    for i in 0..q {
        for j in 0..q {
            let mut s = 0.0;
            for a in 0..q {
                for b in 0..q {
                    s += linv[i][a] * gm[a][b] * linv[j][b];
                }
            }
            c[i][j] = s;
        }
    }
    for i in 0..q {
        for j in 0..i {
            let avg = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = avg;
            c[j][i] = avg;
        }
    }
    let (vals, vecs_c) = jacobi_eigen(c, q);
    let top = (0..q)
        .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap();
    // coefficients = L⁻ᵀ y.
    let mut out = vec![0.0; q];
    for i in 0..q {
        let mut s = 0.0;
        for a in 0..q {
            s += linv[a][i] * vecs_c[a][top];
        }
        out[i] = s;
    }
    Some(out)
}

fn lower_inverse(l: &[[f64; 3]; 3], q: usize) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    for col in 0..q {
        for i in col..q {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for t in col..i {
                s -= l[i][t] * inv[t][col];
            }
            inv[i][col] = s / l[i][i];
        }
    }
    inv
}

/// Cyclic Jacobi for a symmetric matrix of order `q ≤ 3`; eigenvectors are
/// the columns of the returned matrix.
fn jacobi_eigen(mut a: [[f64; 3]; 3], q: usize) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..q {
            for j in 0..i {
                off += a[i][j] * a[i][j];
            }
        }
        let scale: f64 = (0..q).map(|i| a[i][i] * a[i][i]).sum::<f64>() + off;
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for pi in 0..q {
            for qi in pi + 1..q {
                if a[pi][qi] == 0.0 {
                    continue;
                }
                let theta = (a[qi][qi] - a[pi][pi]) / (2.0 * a[pi][qi]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut().take(q) {
                    let (x, y) = (row[pi], row[qi]);
                    row[pi] = c * x - s * y;
                    row[qi] = s * x + c * y;
                }
                for col in 0..q {
                    let (x, y) = (a[pi][col], a[qi][col]);
                    a[pi][col] = c * x - s * y;
                    a[qi][col] = s * x + c * y;
                }
                for row in v.iter_mut().take(q) {
                    let (x, y) = (row[pi], row[qi]);
                    row[pi] = c * x - s * y;
                    row[qi] = s * x + c * y;
                }
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Eigen-solver bound to one grid: the stiffness matrix and its multigrid
/// hierarchy are built once and reused for every weight.
#[derive(Debug, Clone)]
pub struct GridEigenSolver {
    stiffness: SparseSymmetric,
    precond: Multigrid,
    pub tol: f64,
    pub maxit: usize,
}

impl GridEigenSolver {
    pub fn new(domain: &GridDomain) -> Result<Self> {
        let stiffness = assemble_stiffness(domain)?;
        let precond = Multigrid::new(domain, &stiffness);
        Ok(Self {
            stiffness,
            precond,
            tol: DEFAULT_TOL,
            maxit: 2000,
        })
    }

    pub fn stiffness(&self) -> &SparseSymmetric {
        &self.stiffness
    }

    pub fn solve(&mut self, mass: &[f64], start: Option<&[f64]>) -> Result<EigenSolution> {
        let opts = EigenOptions {
            tol: self.tol,
            maxit: self.maxit,
            start: start.map(<[f64]>::to_vec),
        };
        principal_eigenvalue_with(&self.stiffness, mass, &mut self.precond, &opts)
    }

    pub fn solve_weight(
        &mut self,
        domain: &GridDomain,
        w: &BangBangWeight,
        start: Option<&[f64]>,
    ) -> Result<EigenSolution> {
        let mass = assemble_weight_mass(domain, w)?;
        self.solve(&mass, start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector, SymmetricEigen};

    fn dense(a: &SparseSymmetric) -> DMatrix<f64> {
        let d = a.to_dense();
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| d[i][j])
    }

    fn block(nx: usize, ny: usize, h: f64) -> GridDomain {
        GridDomain::from_predicate(2, h, &[0.0, 0.0], &[nx, ny], |_| true).unwrap()
    }

    /// Largest pencil eigenvalue via `L⁻¹ M L⁻ᵀ` with `K = L Lᵀ`.
    fn dense_pencil_lambda(k: &SparseSymmetric, m: &[f64]) -> (f64, DVector<f64>) {
        let kd = dense(k);
        let chol = kd.clone().cholesky().unwrap();
        let l = chol.l();
        let linv = l.clone().try_inverse().unwrap();
        let md = DMatrix::from_diagonal(&DVector::from_column_slice(m));
        let c = &linv * md * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let (imax, mu) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let y = eig.eigenvectors.column(imax).into_owned();
        let v = linv.transpose() * y;
        (1.0 / mu, v)
    }

    #[test]
    fn single_cell_stencil() {
        let d = block(1, 1, 1.0);
        let k = assemble_stiffness(&d).unwrap();
        assert_eq!(k.to_dense(), vec![vec![4.0]]);
    }

    #[test]
    fn two_by_two_block_spectrum() {
        let k = assemble_stiffness(&block(2, 2, 1.0)).unwrap();
        assert!(k.is_symmetric());
        let mut ev: Vec<f64> = SymmetricEigen::new(dense(&k)).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([2.0, 4.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_square_first_eigenvalue() {
        // Interior nodes k·h, k = 1..n−1: the excluded neighbours sit on x = 0 and x = 1.
        let n = 128;
        let h = 1.0 / n as f64;
        let d = GridDomain::from_predicate(2, h, &[0.5 * h, 0.5 * h], &[n - 1, n - 1], |_| true).unwrap();
        let k = assemble_stiffness(&d).unwrap();
        let m = vec![d.cell_volume(); d.n_dofs()];
        let sol = principal_eigenvalue(&k, &m, 1e-10, 5000).unwrap();
        let target = 2.0 * std::f64::consts::PI.powi(2);
        assert!((sol.lambda - target).abs() / target < 0.01, "{}", sol.lambda);
    }

    #[test]
    fn degenerate_domain_rejected() {
        let d = GridDomain::from_predicate(2, 1.0, &[0.0, 0.0], &[3, 3], |_| false).unwrap();
        assert!(matches!(assemble_stiffness(&d), Err(Error::DegenerateDomain(_))));
    }

    #[test]
    fn weight_mass_sum_closed_form() {
        let h = 0.5;
        let d = block(3, 3, h);
        let cells = [0usize, 4, 5];
        let w = BangBangWeight::from_cells(&d, 2.0, 0.7, &cells).unwrap();
        let m = assemble_weight_mass(&d, &w).unwrap();
        let direct: f64 = m.iter().sum();
        let closed = h * h * (2.0 * 3.0 - 0.7 * 6.0);
        assert!((direct - closed).abs() < 1e-15);
        let none = BangBangWeight::from_cells(&d, 2.0, 0.7, &[]).unwrap();
        assert!(assemble_weight_mass(&d, &none).unwrap().iter().all(|&v| v == -0.7 * h * h));
        let all: Vec<usize> = (0..9).collect();
        let all = BangBangWeight::from_cells(&d, 2.0, 0.7, &all).unwrap();
        assert!(assemble_weight_mass(&d, &all).unwrap().iter().all(|&v| v == 2.0 * h * h));
    }

    #[test]
    fn masked_favorable_cell_rejected() {
        let d = GridDomain::from_predicate(2, 1.0, &[0.0, 0.0], &[3, 1], |x| x[0] < 2.0).unwrap();
        assert!(BangBangWeight::from_cells(&d, 1.0, 1.0, &[2]).is_err());
    }

    #[test]
    fn solve_spd_small_cases() {
        let k = SparseSymmetric::from_triplets(1, &[(0, 0, 4.0)]).unwrap();
        assert_eq!(solve_spd(&k, &[8.0], 1e-14).unwrap(), vec![2.0]);
        assert_eq!(solve_spd(&k, &[0.0], 1e-14).unwrap(), vec![0.0]);
    }

    #[test]
    fn solve_spd_matches_dense_factorization() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 10;
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                trips.push((i, j, a[(i, j)]));
            }
        }
        let k = SparseSymmetric::from_triplets(n, &trips).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_spd(&k, &rhs, 1e-14).unwrap();
        let oracle = a.cholesky().unwrap().solve(&DVector::from_column_slice(&rhs));
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn all_favorable_is_dirichlet_over_mbar() {
        let d = block(2, 2, 1.0);
        let k = assemble_stiffness(&d).unwrap();
        let mbar = 3.0;
        let m = vec![mbar * d.cell_volume(); 4];
        let sol = principal_eigenvalue(&k, &m, 1e-12, 1000).unwrap();
        assert!((sol.lambda - 2.0 / mbar).abs() < 1e-10);
    }

    #[test]
    fn all_hostile_is_infinite() {
        let d = block(3, 3, 1.0);
        let k = assemble_stiffness(&d).unwrap();
        let sol = principal_eigenvalue(&k, &vec![-1.0; 9], 1e-10, 100).unwrap();
        assert_eq!(sol.lambda, f64::INFINITY);
        assert!(principal_eigenvalue(&k, &vec![0.0; 9], 1e-10, 100).is_err());
    }

    #[test]
    fn indefinite_block_matches_dense_pencil() {
        let h = 0.25;
        let d = block(3, 3, h);
        let k = assemble_stiffness(&d).unwrap();
        let w = BangBangWeight::from_cells(&d, 1.0, 0.5, &[4, 1]).unwrap();
        let m = assemble_weight_mass(&d, &w).unwrap();
        let sol = principal_eigenvalue(&k, &m, 1e-12, 1000).unwrap();
        let (lam, v) = dense_pencil_lambda(&k, &m);
        assert!((sol.lambda - lam).abs() / lam < 1e-8);
        let s = v.iter().sum::<f64>().signum();
        assert!(v.iter().all(|x| x * s > 0.0));
        assert!(sol.u.iter().all(|&x| x > 0.0));
        let um: f64 = sol.u.iter().zip(&m).map(|(u, m)| u * u * m).sum();
        assert!((um - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multigrid_solver_matches_jacobi_solver() {
        let d = GridDomain::centered(2, 1.0, 48, |x| x[0] * x[0] + x[1] * x[1] < 1.0).unwrap();
        let cells: Vec<usize> = d
            .cells_of_dofs()
            .iter()
            .copied()
            .filter(|&c| {
                let x = d.cell_center(c);
                x[0] * x[0] + x[1] * x[1] < 0.1
            })
            .collect();
        let w = BangBangWeight::from_cells(&d, 1.0, 1.0, &cells).unwrap();
        let m = assemble_weight_mass(&d, &w).unwrap();
        let k = assemble_stiffness(&d).unwrap();
        let a = principal_eigenvalue(&k, &m, 1e-11, 20_000).unwrap();
        let mut gs = GridEigenSolver::new(&d).unwrap();
        gs.tol = 1e-11;
        let b = gs.solve(&m, None).unwrap();
        assert!((a.lambda - b.lambda).abs() / a.lambda < 1e-9);
        assert!(b.iterations < a.iterations);
    }
}
