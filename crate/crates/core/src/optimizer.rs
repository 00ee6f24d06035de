//! Favorable-set optimization by superlevel-set rearrangement, and the
//! geometric diagnostics of the resulting sets.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::incenter_field;
use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::radial::{linear_fit, RadialProfile};
use crate::spectral::{favorable_cell_count, BangBangWeight, EigenSolution, GridEigenSolver, Normalization};

/// Relative slack allowed when certifying that `λ` does not increase.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// The `n_ε` cells closest to the centroid of the incenter set.
    IncenterBall,
    /// `n_ε` cells drawn uniformly at random.
    RandomSeeded(u64),
    /// Per-DOF favorable mask; must hold exactly `n_ε` cells.
    Mask(Vec<bool>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    FixedPoint,
    TolReached,
    Maxit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub lambda: f64,
    pub count: usize,
    /// Cells that entered the set before this solve.
    pub changed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
}

impl OptimizationTrace {
    /// Iterations where `λ` rose by more than the relative slack.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.records
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].lambda > w[0].lambda + MONOTONE_SLACK * w[0].lambda.abs())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations().is_empty()
    }

    pub fn final_lambda(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Stop once `λ` decreases by less than `tol · λ`.
    pub tol: f64,
    pub maxit: usize,
    /// At a fixed point, try one-cell translations of the set and resume the
    /// iteration from any that lowers `λ`.
    pub translate: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            maxit: 500,
            translate: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimization {
    /// Favorable flag per DOF.
    pub favorable: Vec<bool>,
    pub solution: EigenSolution,
    pub trace: OptimizationTrace,
}

/// Indices of the `n` largest entries, ties broken by index.
pub fn top_cells(u: &[f64], n: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    let cmp = |a: &usize, b: &usize| u[*b].total_cmp(&u[*a]).then(a.cmp(b));
    if n < u.len() {
        order.select_nth_unstable_by(n, cmp);
    }
    let mut mask = vec![false; u.len()];
    for &i in order.iter().take(n.min(u.len())) {
        mask[i] = true;
    }
    mask
}

fn initial_mask(domain: &GridDomain, n: usize, init: &Init) -> Result<Vec<bool>> {
    let nd = domain.n_dofs();
    match init {
        Init::IncenterBall => {
            let field = incenter_field(domain)?;
            let mut c = [0.0; 3];
            for &d in &field.argmax {
                let x = domain.dof_center(d);
                (0..3).for_each(|a| c[a] += x[a]);
            }
            c.iter_mut().for_each(|v| *v /= field.argmax.len() as f64);
            let key: Vec<f64> = (0..nd)
                .map(|d| {
                    let x = domain.dof_center(d);
                    -(0..3).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>()
                })
                .collect();
            Ok(top_cells(&key, n))
        }
        Init::RandomSeeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut mask = vec![false; nd];
            for i in sample(&mut rng, nd, n) {
                mask[i] = true;
            }
            Ok(mask)
        }
        Init::Mask(m) => {
            if m.len() != nd {
                return Err(Error::InvalidArgument(format!(
                    "initial mask has {} entries, domain has {nd}",
                    m.len()
                )));
            }
            let k = m.iter().filter(|&&b| b).count();
            if k != n {
                return Err(Error::InvalidArgument(format!(
                    "initial mask has {k} favorable cells, expected {n}"
                )));
            }
            Ok(m.clone())
        }
    }
}

/// Alternates eigen-solves with reselection of the `n_ε = round(ε/h^N)` cells
/// where `u` is largest.
pub fn rearrangement_optimize(
    domain: &GridDomain,
    eps: f64,
    mbar: f64,
    munder: f64,
    init: &Init,
    opts: OptimizeOptions,
) -> Result<Optimization> {
    let mut solver = GridEigenSolver::new(domain)?;
    rearrangement_optimize_with(&mut solver, domain, eps, mbar, munder, init, opts)
}

/// As [`rearrangement_optimize`] with a solver already bound to `domain`.
pub fn rearrangement_optimize_with(
    solver: &mut GridEigenSolver,
    domain: &GridDomain,
    eps: f64,
    mbar: f64,
    munder: f64,
    init: &Init,
    opts: OptimizeOptions,
) -> Result<Optimization> {
    let vol = domain.n_dofs() as f64 * domain.cell_volume();
    if !(eps > 0.0 && eps <= vol) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} must lie in (0, {vol}]"
        )));
    }
    let n = favorable_cell_count(domain, eps)?.min(domain.n_dofs());
    let mut fav = initial_mask(domain, n, init)?;
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let mut pending: Option<EigenSolution> = None;
    let mut changed = 0;
    let mut status = Status::Maxit;
    let mut sol;
    loop {
        sol = match pending.take() {
            Some(s) => s,
            None => {
                let w = BangBangWeight::from_dof_mask(domain, mbar, munder, fav.clone());
                solver.solve_weight(domain, &w, warm.as_deref())?
            }
        };
        records.push(TraceRecord {
            lambda: sol.lambda,
            count: n,
            changed,
        });
        if records.len() >= opts.maxit {
            break;
        }
        let next = top_cells(&sol.u, n);
        if next == fav {
            status = Status::FixedPoint;
            if !opts.translate {
                break;
            }
            match best_translation(solver, domain, &fav, mbar, munder, &sol)? {
                Some((mask, trial)) => {
                    changed = mask.iter().zip(&fav).filter(|(a, b)| **a && !**b).count();
                    fav = mask;
                    pending = Some(trial);
                    status = Status::Maxit;
                    continue;
                }
                None => break,
            }
        }
        if let [.., a, b] = records.as_slice() {
            if a.lambda - b.lambda < opts.tol * b.lambda.abs() {
                status = Status::TolReached;
                break;
            }
        }
        changed = next.iter().zip(&fav).filter(|(a, b)| **a && !**b).count();
        fav = next;
        warm = Some(sol.u.clone());
    }
    Ok(Optimization {
        favorable: fav,
        solution: sol,
        trace: OptimizationTrace { records, status },
    })
}

/// Shifts a DOF mask by whole cells; `None` if a cell leaves the domain.
fn translate_mask(domain: &GridDomain, fav: &[bool], di: i64, dj: i64) -> Option<Vec<bool>> {
    let sh = domain.shape();
    let mut out = vec![false; fav.len()];
    for d in (0..fav.len()).filter(|&d| fav[d]) {
        let c = domain.cell_coords(domain.cell_of_dof(d));
        let (i, j) = (c[0] as i64 + di, c[1] as i64 + dj);
        if i < 0 || j < 0 || i >= sh[0] as i64 || j >= sh[1] as i64 {
            return None;
        }
        out[domain.dof_of_cell(domain.cell_index([i as usize, j as usize, c[2]]))?] = true;
    }
    Some(out)
}

/// Lowest-`λ` one-cell translation of the set, if it beats the current
/// eigenvalue by more than the monotonicity slack.
fn best_translation(
    solver: &mut GridEigenSolver,
    domain: &GridDomain,
    fav: &[bool],
    mbar: f64,
    munder: f64,
    current: &EigenSolution,
) -> Result<Option<(Vec<bool>, EigenSolution)>> {
    if domain.dim() != 2 {
        return Ok(None);
    }
    let mut best: Option<(Vec<bool>, EigenSolution)> = None;
    for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let Some(mask) = translate_mask(domain, fav, di, dj) else {
            continue;
        };
        let w = BangBangWeight::from_dof_mask(domain, mbar, munder, mask.clone());
        let trial = solver.solve_weight(domain, &w, Some(&current.u))?;
        let bar = best.as_ref().map_or(current.lambda * (1.0 - MONOTONE_SLACK), |b| b.1.lambda);
        if trial.lambda < bar {
            best = Some((mask, trial));
        }
    }
    Ok(best)
}

/// Number of cells whose centers `((i+½)h, (j+½)h)` lie in a disk about the
/// origin, taking whole symmetric shells, closest to `target`.
pub fn shell_cell_count(target: f64) -> usize {
    let m = (target.sqrt() + 4.0).ceil() as i64;
    let mut r2: Vec<i64> = Vec::new();
    for i in -m..m {
        for j in -m..m {
            // (2i+1)² + (2j+1)² is 4 × squared distance in units of h.
            r2.push((2 * i + 1).pow(2) + (2 * j + 1).pow(2));
        }
    }
    r2.sort_unstable();
    let mut best = (f64::INFINITY, 0);
    let mut k = 0;
    while k < r2.len() {
        let mut e = k;
        while e < r2.len() && r2[e] == r2[k] {
            e += 1;
        }
        let d = (e as f64 - target).abs();
        if d < best.0 {
            best = (d, e);
        }
        k = e;
    }
    best.1
}

/// Value of a per-DOF field at `x` by bilinear interpolation between cell
/// centers; Dirichlet cells contribute zero.
pub fn interpolate(domain: &GridDomain, values: &[f64], x: [f64; 2]) -> f64 {
    let h = domain.spacing();
    let lo = domain.lower();
    let sh = domain.shape();
    let tx = (x[0] - lo[0]) / h - 0.5;
    let ty = (x[1] - lo[1]) / h - 0.5;
    let (fx, fy) = (tx.floor(), ty.floor());
    let (ax, ay) = (tx - fx, ty - fy);
    let at = |i: f64, j: f64| -> f64 {
        if i < 0.0 || j < 0.0 || i >= sh[0] as f64 || j >= sh[1] as f64 {
            return 0.0;
        }
        let c = domain.cell_index([i as usize, j as usize, 0]);
        domain.dof_of_cell(c).map_or(0.0, |d| values[d])
    };
    (1.0 - ax) * (1.0 - ay) * at(fx, fy)
        + ax * (1.0 - ay) * at(fx + 1.0, fy)
        + (1.0 - ax) * ay * at(fx, fy + 1.0)
        + ax * ay * at(fx + 1.0, fy + 1.0)
}

/// Boundary of a favorable set as a radial graph in blow-up scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarParametrization {
    pub center: [f64; 2],
    pub theta: Vec<f64>,
    /// Boundary radius per ray, physical scale.
    pub rho: Vec<f64>,
    /// `ρ ε^{−1/N} − r₀`.
    pub phi: Vec<f64>,
    /// `L²(S¹)` norm of `φ`.
    pub l2: f64,
    pub sup: f64,
    /// Largest difference quotient between neighboring rays.
    pub c1: f64,
}

/// Traces `N = angular_res` rays from `center` and records where the
/// bilinearly interpolated indicator of the set crosses 1/2.
pub fn extract_polar_parametrization(
    domain: &GridDomain,
    favorable: &[bool],
    eps: f64,
    center: [f64; 2],
    angular_res: usize,
) -> Result<PolarParametrization> {
    if domain.dim() != 2 {
        return Err(Error::InvalidArgument("polar extraction is planar".into()));
    }
    if angular_res < 4 {
        return Err(Error::InvalidArgument("need at least 4 rays".into()));
    }
    let chi: Vec<f64> = favorable.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    if interpolate(domain, &chi, center) <= 0.5 {
        return Err(Error::CenterOutside);
    }
    let h = domain.spacing();
    let sh = domain.shape();
    let reach = h * ((sh[0] * sh[0] + sh[1] * sh[1]) as f64).sqrt();
    let ds = 0.25 * h;
    let steps = (reach / ds).ceil() as usize;
    let scale = eps.sqrt().recip();
    let r0 = crate::radial::unit_ball_radius(2);

    let mut theta = Vec::with_capacity(angular_res);
    let mut rho = Vec::with_capacity(angular_res);
    let mut bad = 0;
    for j in 0..angular_res {
        let th = 2.0 * PI * j as f64 / angular_res as f64;
        let (c, s) = (th.cos(), th.sin());
        let mut prev = interpolate(domain, &chi, center) - 0.5;
        let mut crossings = 0;
        let mut first = None;
        for k in 1..=steps {
            let r = k as f64 * ds;
            let v = interpolate(domain, &chi, [center[0] + r * c, center[1] + r * s]) - 0.5;
            if (prev > 0.0) != (v > 0.0) {
                crossings += 1;
                if first.is_none() {
                    first = Some(r - ds * v / (v - prev));
                }
            }
            prev = v;
        }
        if crossings != 1 {
            bad += 1;
        }
        theta.push(th);
        rho.push(first.unwrap_or(0.0));
    }
    if bad > 0 {
        return Err(Error::NotStarShaped { rays: bad });
    }
    let phi: Vec<f64> = rho.iter().map(|r| r * scale - r0).collect();
    let dth = 2.0 * PI / angular_res as f64;
    let l2 = (phi.iter().map(|p| p * p).sum::<f64>() * dth).sqrt();
    let sup = phi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    let c1 = (0..angular_res)
        .map(|j| (phi[(j + 1) % angular_res] - phi[j]).abs() / dth)
        .fold(0.0, f64::max);
    Ok(PolarParametrization {
        center,
        theta,
        rho,
        phi,
        l2,
        sup,
        c1,
    })
}

/// Geometric and spectral summary of an optimized set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub components_4: usize,
    pub components_8: usize,
    pub local_maxima: usize,
    pub barycenter: [f64; 2],
    pub max_point: [f64; 2],
    pub barycenter_distance: f64,
    pub max_point_distance: f64,
    pub scaled_lambda: f64,
    pub lambda_ratio: Option<f64>,
    pub alpha: f64,
}

fn point_set_distance(p: [f64; 2], set: &[[f64; 2]]) -> f64 {
    set.iter()
        .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Incenter points used as the target of the distance diagnostics: the
/// analytic incenter when given, the argmax cells of the distance field
/// otherwise.
pub fn incenter_points(domain: &GridDomain, analytic: Option<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    if let Some(p) = analytic {
        return Ok(vec![p]);
    }
    let f = incenter_field(domain)?;
    Ok(f.argmax
        .iter()
        .map(|&d| {
            let x = domain.dof_center(d);
            [x[0], x[1]]
        })
        .collect())
}

/// Barycenter of a set of DOFs, summed in integer cell coordinates so that
/// symmetric sets on symmetric grids give an exact zero.
pub fn barycenter(domain: &GridDomain, favorable: &[bool]) -> [f64; 2] {
    let sh = domain.shape();
    let lo = domain.lower();
    let h = domain.spacing();
    let mut s = [0i64; 2];
    let mut n = 0i64;
    for (d, _) in favorable.iter().enumerate().filter(|(_, f)| **f) {
        let c = domain.cell_coords(domain.cell_of_dof(d));
        for a in 0..2 {
            s[a] += 2 * c[a] as i64 + 1 - sh[a] as i64;
        }
        n += 1;
    }
    let mut out = [0.0; 2];
    for a in 0..2 {
        let mid = lo[a] + 0.5 * sh[a] as f64 * h;
        out[a] = mid + if n > 0 { 0.5 * h * s[a] as f64 / n as f64 } else { 0.0 };
    }
    out
}

fn count_components(domain: &GridDomain, favorable: &[bool], diagonal: bool) -> usize {
    let sh = domain.shape();
    let (nx, ny) = (sh[0] as i64, sh[1] as i64);
    let in_set = |i: i64, j: i64| -> Option<usize> {
        if i < 0 || j < 0 || i >= nx || j >= ny {
            return None;
        }
        let c = domain.cell_index([i as usize, j as usize, 0]);
        domain.dof_of_cell(c).filter(|&d| favorable[d])
    };
    let offsets: &[(i64, i64)] = if diagonal {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    };
    let mut seen = vec![false; favorable.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..favorable.len() {
        if !favorable[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(d) = queue.pop_front() {
            let c = domain.cell_coords(domain.cell_of_dof(d));
            for &(di, dj) in offsets {
                if let Some(e) = in_set(c[0] as i64 + di, c[1] as i64 + dj) {
                    if !seen[e] {
                        seen[e] = true;
                        queue.push_back(e);
                    }
                }
            }
        }
    }
    count
}

pub fn diagnostics(
    domain: &GridDomain,
    favorable: &[bool],
    solution: &EigenSolution,
    eps: f64,
    incenter: &[[f64; 2]],
    lambda0: Option<f64>,
) -> Diagnostics {
    let u = &solution.u;
    let value = |c: usize| domain.dof_of_cell(c).map_or(0.0, |d| u[d]);
    let mut local_maxima = 0;
    let mut alpha = f64::INFINITY;
    let mut imax = 0;
    for d in 0..u.len() {
        if u[d] > u[imax] {
            imax = d;
        }
        let cell = domain.cell_of_dof(d);
        let nbrs: Vec<usize> = domain.cell_neighbors(cell).collect();
        if nbrs.len() == 4 && nbrs.iter().all(|&c| value(c) < u[d]) {
            local_maxima += 1;
        }
        if favorable[d]
            && (nbrs.len() < 4
                || nbrs
                    .iter()
                    .any(|&c| domain.dof_of_cell(c).map_or(true, |e| !favorable[e])))
        {
            alpha = alpha.min(u[d]);
        }
    }
    let bary = barycenter(domain, favorable);
    let m = domain.dof_center(imax);
    let max_point = [m[0], m[1]];
    let n = domain.dim() as f64;
    let scaled = eps.powf(2.0 / n) * solution.lambda;
    Diagnostics {
        components_4: count_components(domain, favorable, false),
        components_8: count_components(domain, favorable, true),
        local_maxima,
        barycenter: bary,
        max_point,
        barycenter_distance: point_set_distance(bary, incenter),
        max_point_distance: point_set_distance(max_point, incenter),
        scaled_lambda: scaled,
        lambda_ratio: lambda0.map(|l| scaled / l),
        alpha,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupComparison {
    pub l2_distance: f64,
    pub sup_distance: f64,
    /// `sup_distance / w(0)`.
    pub sup_relative: f64,
    pub out_of_regime: bool,
}

/// Compares the angular average of `ũ(x) = k^{N/2} u(p + k x)`, `k = ε^{1/N}`,
/// around the maximum point `p` with the `L²`-normalized limit profile.
pub fn blowup_compare(
    domain: &GridDomain,
    solution: &EigenSolution,
    eps: f64,
    profile: &RadialProfile,
) -> Result<BlowupComparison> {
    if domain.dim() != 2 || profile.dim != 2 {
        return Err(Error::InvalidArgument("blow-up comparison is planar".into()));
    }
    if profile.normalization != Normalization::L2 {
        return Err(Error::InvalidArgument("profile must be L²-normalized".into()));
    }
    let vol = domain.cell_volume();
    let norm = (solution.u.iter().map(|v| v * v).sum::<f64>() * vol).sqrt();
    let u: Vec<f64> = solution.u.iter().map(|v| v / norm).collect();
    let imax = (0..u.len()).fold(0, |a, d| if u[d] > u[a] { d } else { a });
    let p = domain.dof_center(imax);
    let k = eps.sqrt();

    const RAYS: usize = 64;
    let stride = (profile.r.len() / 400).max(1);
    let idx: Vec<usize> = (0..profile.r.len()).step_by(stride).collect();
    let mut diff_sq = Vec::with_capacity(idx.len());
    let mut sup: f64 = 0.0;
    for &i in &idx {
        let r = profile.r[i];
        let mut avg = 0.0;
        for j in 0..RAYS {
            let th = 2.0 * PI * j as f64 / RAYS as f64;
            avg += interpolate(domain, &u, [p[0] + k * r * th.cos(), p[1] + k * r * th.sin()]);
        }
        let ut = k * avg / RAYS as f64;
        let d = ut - profile.w[i];
        sup = sup.max(d.abs());
        diff_sq.push(d * d * 2.0 * PI * r);
    }
    let mut l2 = 0.0;
    for w in 0..idx.len() - 1 {
        l2 += 0.5 * (diff_sq[w] + diff_sq[w + 1]) * (profile.r[idx[w + 1]] - profile.r[idx[w]]);
    }
    let d_star = domain.inradius();
    let vol_omega = domain.n_dofs() as f64 * vol;
    Ok(BlowupComparison {
        l2_distance: l2.sqrt(),
        sup_distance: sup,
        sup_relative: sup / profile.w[0],
        out_of_regime: eps > 0.25 * vol_omega || d_star / k < 2.0 * profile.r0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGapFit {
    pub slope: f64,
    pub intercept: f64,
    pub pair_slopes: Vec<f64>,
    /// `−2 √(λ̃₀ m̲) d*`.
    pub target: f64,
    /// Indices of the sweep points above the noise floor.
    pub used: Vec<usize>,
    pub status: FitStatus,
}

/// Slope of `log(ε^{2/N} λ_ε − λ̃₀)` against `ε^{−1/N}` over sweep points
/// `(ε, λ_ε)`. Points whose gap does not exceed `noise_floor` are dropped;
/// fewer than three usable points leave the fit inconclusive.
pub fn gap_fit_domain(
    points: &[(f64, f64)],
    dim: usize,
    lambda0: f64,
    munder: f64,
    d_star: f64,
    noise_floor: f64,
) -> DomainGapFit {
    let n = dim as f64;
    let target = -2.0 * (lambda0 * munder).sqrt() * d_star;
    let mut used = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &(eps, lam)) in points.iter().enumerate() {
        let gap = eps.powf(2.0 / n) * lam - lambda0;
        if gap > noise_floor {
            used.push(i);
            xs.push(eps.powf(-1.0 / n));
            ys.push(gap.ln());
        }
    }
    if used.len() < 3 {
        return DomainGapFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            pair_slopes: Vec::new(),
            target,
            used,
            status: FitStatus::Inconclusive,
        };
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    let pair_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    DomainGapFit {
        slope,
        intercept,
        pair_slopes,
        target,
        used,
        status: FitStatus::Fitted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    #[test]
    fn top_cells_breaks_ties_by_index() {
        let m = top_cells(&[1.0, 3.0, 3.0, 2.0, 3.0], 2);
        assert_eq!(m, vec![false, true, true, false, false]);
    }

    #[test]
    fn synthetic_gap_rate_is_exact() {
        let (lam0, rate) = (8.0, -0.5);
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.02, 0.01]
            .iter()
            .map(|&e| (e, (lam0 + (rate * e.powf(-0.5)).exp()) / e))
            .collect();
        let fit = gap_fit_domain(&pts, 2, lam0, 1.0, 1.0, 0.0);
        assert_eq!(fit.status, FitStatus::Fitted);
        assert!((fit.slope - rate).abs() < 1e-9, "{}", fit.slope);
        let none = gap_fit_domain(&pts, 2, lam0, 1.0, 1.0, 1.0);
        assert_eq!(none.status, FitStatus::Inconclusive);
    }

    #[test]
    fn components_count_diagonal_touching() {
        let g = DomainSpec::Rectangle { width: 4.0, height: 4.0 }.grid(4).unwrap();
        // Cells (0,0) and (1,1) touch at a corner.
        let mut fav = vec![false; g.n_dofs()];
        fav[g.dof_of_cell(g.cell_index([0, 0, 0])).unwrap()] = true;
        fav[g.dof_of_cell(g.cell_index([1, 1, 0])).unwrap()] = true;
        assert_eq!(count_components(&g, &fav, false), 2);
        assert_eq!(count_components(&g, &fav, true), 1);
    }

    #[test]
    fn shells_are_symmetric() {
        assert_eq!(shell_cell_count(4.0), 4);
        assert_eq!(shell_cell_count(11.0), 12);
        for t in [50.0, 800.0, 1809.5] {
            let n = shell_cell_count(t);
            assert_eq!(n % 4, 0);
            assert!((n as f64 - t).abs() < 0.1 * t);
        }
    }

    #[test]
    fn barycenter_of_symmetric_set_is_zero() {
        let g = DomainSpec::Disk { radius: 1.0 }.grid(40).unwrap();
        let fav: Vec<bool> = (0..g.n_dofs())
            .map(|d| {
                let x = g.dof_center(d);
                x[0].hypot(x[1]) < 0.4
            })
            .collect();
        assert_eq!(barycenter(&g, &fav), [0.0, 0.0]);
    }
}
