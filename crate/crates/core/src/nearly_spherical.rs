//! Nearly spherical sets `A = {ρθ : ρ < r₀ + φ(θ)}` in the plane, their
//! volume and barycenter normalization, the divergence-free deformation from
//! the unit-measure ball, and eigenvalue gaps computed on a common grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::modes::{predicted_second_derivative, ModeTable};
use crate::radial::unit_ball_radius;
use crate::spectral::{BangBangWeight, EigenSolution, GridEigenSolver};

/// Angular quadrature size; exact for trigonometric polynomials of degree
/// below this.
const QUAD: usize = 4096;

/// One Fourier mode `a cos kθ + b sin kθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: usize,
    pub a: f64,
    pub b: f64,
}

/// User part of a perturbation: `s Σ (a_k cos kθ + b_k sin kθ)` with `k ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub terms: Vec<Harmonic>,
}

impl PerturbationSpec {
    pub fn single(k: usize, amplitude: f64) -> Self {
        Self {
            amplitude,
            terms: vec![Harmonic { k, a: 1.0, b: 0.0 }],
        }
    }

    fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.k < 2 {
                return Err(Error::InvalidArgument(format!(
                    "degree {} is reserved for the normalization",
                    t.k
                )));
            }
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument("amplitude must be finite".into()));
        }
        Ok(())
    }
}

/// A planar nearly spherical set `ρ < r₀ + φ(θ)` with
/// `φ = c₀ + a₁ cos θ + b₁ sin θ + ψ(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearlySphericalSet {
    pub r0: f64,
    pub c0: f64,
    pub a1: f64,
    pub b1: f64,
    /// Scaled user modes (degree ≥ 2).
    pub terms: Vec<Harmonic>,
    /// Alternating sweeps used by the normalization (0 when not normalized).
    pub sweeps: usize,
}

/// Norms of `φ` on the quadrature grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiMeasures {
    /// `∫_{S¹} φ² dθ`.
    pub l2_sq_sphere: f64,
    /// `∫_{∂B} φ² dS = r₀ ∫ φ² dθ`.
    pub l2_sq_boundary: f64,
    pub sup: f64,
    /// `max |φ'|`.
    pub c1: f64,
}

impl NearlySphericalSet {
    /// The unit-measure ball itself.
    pub fn ball() -> Self {
        Self::raw(0.0, 0.0, 0.0, Vec::new())
    }

    /// A set with explicit coefficients and no normalization.
    pub fn raw(c0: f64, a1: f64, b1: f64, terms: Vec<Harmonic>) -> Self {
        Self {
            r0: unit_ball_radius(2),
            c0,
            a1,
            b1,
            terms,
            sweeps: 0,
        }
    }

    pub fn phi(&self, theta: f64) -> f64 {
        let mut v = self.c0 + self.a1 * theta.cos() + self.b1 * theta.sin();
        for t in &self.terms {
            let kt = t.k as f64 * theta;
            v += t.a * kt.cos() + t.b * kt.sin();
        }
        v
    }

    pub fn dphi(&self, theta: f64) -> f64 {
        let mut v = -self.a1 * theta.sin() + self.b1 * theta.cos();
        for t in &self.terms {
            let k = t.k as f64;
            v += k * (-t.a * (k * theta).sin() + t.b * (k * theta).cos());
        }
        v
    }

    pub fn boundary_radius(&self, theta: f64) -> f64 {
        self.r0 + self.phi(theta)
    }

    fn thetas() -> impl Iterator<Item = f64> {
        (0..QUAD).map(|i| 2.0 * PI * i as f64 / QUAD as f64)
    }

    /// `(1/2)∫ (r₀+φ)² dθ − 1`.
    pub fn volume_residual(&self) -> f64 {
        let s: f64 = Self::thetas().map(|t| self.boundary_radius(t).powi(2)).sum();
        0.5 * s * 2.0 * PI / QUAD as f64 - 1.0
    }

    /// `∫ (cos θ, sin θ) (r₀+φ)³/3 dθ`, the first moment of `A`.
    pub fn first_moment(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for t in Self::thetas() {
            let r3 = self.boundary_radius(t).powi(3) / 3.0;
            m[0] += t.cos() * r3;
            m[1] += t.sin() * r3;
        }
        let dt = 2.0 * PI / QUAD as f64;
        [m[0] * dt, m[1] * dt]
    }

    pub fn measures(&self) -> PhiMeasures {
        let mut l2 = 0.0;
        let mut sup = 0.0f64;
        let mut c1 = 0.0f64;
        for t in Self::thetas() {
            let p = self.phi(t);
            l2 += p * p;
            sup = sup.max(p.abs());
            c1 = c1.max(self.dphi(t).abs());
        }
        let l2 = l2 * 2.0 * PI / QUAD as f64;
        PhiMeasures {
            l2_sq_sphere: l2,
            l2_sq_boundary: self.r0 * l2,
            sup,
            c1,
        }
    }

    /// Radial component of `X = [(r₀+φ)^N − r₀^N]/(N ρ^{N−1}) θ` (N = 2).
    pub fn vector_field_x(&self, rho: f64, theta: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
        }
        Ok(self.boundary_delta(theta) / (2.0 * rho))
    }

    /// `(r₀+φ)² − r₀²`.
    fn boundary_delta(&self, theta: f64) -> f64 {
        self.boundary_radius(theta).powi(2) - self.r0 * self.r0
    }

    /// Boundary radius of `Φ(t, B)`: `[r₀² + t((r₀+φ)² − r₀²)]^{1/2}`.
    pub fn path_radius(&self, t: f64, theta: f64) -> Result<f64> {
        let inside = self.r0 * self.r0 + t * self.boundary_delta(theta);
        if !(inside > 0.0) {
            return Err(Error::DeformationTooLarge(format!(
                "non-positive radicand {inside:e} at t = {t}, theta = {theta}"
            )));
        }
        Ok(inside.sqrt())
    }

    /// `Φ(t, x) = [ρ² + t h(ρ)((r₀+φ)² − r₀²)]^{1/2} θ`, `x = ρθ`.
    pub fn deformation_map(&self, t: f64, x: [f64; 2]) -> Result<[f64; 2]> {
        if !(-0.5..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [-0.5, 1]")));
        }
        let rho = x[0].hypot(x[1]);
        if rho == 0.0 {
            return Ok(x);
        }
        let theta = x[1].atan2(x[0]);
        let inside = rho * rho + t * cutoff(rho, self.r0) * self.boundary_delta(theta);
        if !(inside > 0.0) {
            return Err(Error::DeformationTooLarge(format!(
                "non-positive radicand {inside:e} at rho = {rho}, t = {t}"
            )));
        }
        let s = inside.sqrt() / rho;
        Ok([x[0] * s, x[1] * s])
    }

    /// Boundary trace `X(r₀, θ)·n = [(r₀+φ)² − r₀²]/(2r₀)` on `m` uniform angles.
    pub fn normal_trace(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|i| self.boundary_delta(2.0 * PI * i as f64 / m as f64) / (2.0 * self.r0))
            .collect()
    }

    /// `λ̈₀` predicted from the harmonic coefficients of `X·n`.
    pub fn predicted_second_derivative(&self, table: &ModeTable) -> Result<f64> {
        let coeffs = spherical_coefficients(&self.normal_trace(1024), self.r0);
        let mut pairs = coeffs.by_degree();
        // The degree-0 coefficient vanishes up to quadrature rounding.
        pairs.retain(|&(l, _)| l != 0);
        let lmax = table.entries.last().map(|e| e.degree).unwrap_or(0);
        let tail: f64 = pairs.iter().filter(|p| p.0 > lmax).map(|p| p.1 * p.1).sum();
        let total: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
        if tail > 1e-12 * total.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "trace has content above degree {lmax}"
            )));
        }
        pairs.retain(|&(l, _)| l <= lmax);
        predicted_second_derivative(&pairs, table)
    }
}

/// C² cutoff: 1 on `[3r₀/4, 5r₀/4]`, 0 outside `(r₀/2, 3r₀/2)`.
pub fn cutoff(rho: f64, r0: f64) -> f64 {
    let step = |x: f64| {
        let x = x.clamp(0.0, 1.0);
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    };
    if rho <= 0.5 * r0 || rho >= 1.5 * r0 {
        0.0
    } else if rho < 0.75 * r0 {
        step((rho - 0.5 * r0) / (0.25 * r0))
    } else if rho <= 1.25 * r0 {
        1.0
    } else {
        step((1.5 * r0 - rho) / (0.25 * r0))
    }
}

/// Adds the constant and degree-1 modes that make `|A| = 1` and `bar(A) = 0`.
pub fn normalize_volume_barycenter(spec: &PerturbationSpec) -> Result<NearlySphericalSet> {
    spec.validate()?;
    let terms: Vec<Harmonic> = spec
        .terms
        .iter()
        .map(|t| Harmonic {
            k: t.k,
            a: spec.amplitude * t.a,
            b: spec.amplitude * t.b,
        })
        .collect();
    let max_k = terms.iter().map(|t| t.k).max().unwrap_or(1);
    if 3 * max_k + 2 > QUAD {
        return Err(Error::InvalidArgument(format!("degree {max_k} too high")));
    }
    let mut set = NearlySphericalSet::raw(0.0, 0.0, 0.0, terms);
    let r0 = set.r0;
    // ‖φ − c₀‖² over S¹ for mean-free modes: π Σ (a² + b²).
    let user_sq: f64 = set.terms.iter().map(|t| t.a * t.a + t.b * t.b).sum();
    for sweep in 1..=20 {
        // (1) Volume: 2π(r₀+c₀)² + π Σ(a²+b²) = 2π r₀².
        let s = user_sq + set.a1 * set.a1 + set.b1 * set.b1;
        let rad = r0 * r0 - 0.5 * s;
        if !(rad > 0.0) {
            return Err(Error::DeformationTooLarge(
                "perturbation too large to keep unit measure".into(),
            ));
        }
        set.c0 = -0.5 * s / (rad.sqrt() + r0);
        // (2) Barycenter: Newton step on (a₁, b₁) for the first moment.
        let m = set.first_moment();
        if set.volume_residual().abs() <= 1e-12 && m[0].hypot(m[1]) <= 1e-12 {
            return finish(set);
        }
        let mut j = [[0.0; 2]; 2];
        for t in NearlySphericalSet::thetas() {
            let r2 = set.boundary_radius(t).powi(2);
            let e = [t.cos(), t.sin()];
            for p in 0..2 {
                for q in 0..2 {
                    j[p][q] += e[p] * e[q] * r2;
                }
            }
        }
        let dt = 2.0 * PI / QUAD as f64;
        let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * dt * dt;
        let da = (m[0] * j[1][1] - m[1] * j[0][1]) * dt / det;
        let db = (m[1] * j[0][0] - m[0] * j[1][0]) * dt / det;
        set.a1 -= da;
        set.b1 -= db;
        set.sweeps = sweep;
        let vol_res = set.volume_residual().abs();
        let m = set.first_moment();
        if vol_res <= 1e-12 && m[0].hypot(m[1]) <= 1e-12 {
            return finish(set);
        }
    }
    Err(Error::NormalizationFailure(
        "volume/barycenter alternation did not converge in 20 sweeps".into(),
    ))
}

fn finish(set: NearlySphericalSet) -> Result<NearlySphericalSet> {
    let sup = set.measures().sup;
    if sup > 0.5 * set.r0 {
        return Err(Error::DeformationTooLarge(format!(
            "sup |phi| = {sup} exceeds r0/2"
        )));
    }
    Ok(set)
}

/// Fourier coefficients of a trace sampled on `m` uniform angles, in the
/// basis `1/√(2πr₀)`, `cos kθ/√(πr₀)`, `sin kθ/√(πr₀)` that is orthonormal in
/// `L²(∂B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub r0: f64,
    pub c0: f64,
    /// `a[k-1]`, `b[k-1]` for `k = 1..m/2`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FourierCoefficients {
    /// `(degree, coefficient)` pairs including degree 0.
    pub fn by_degree(&self) -> Vec<(usize, f64)> {
        let mut out = vec![(0, self.c0)];
        for k in 0..self.a.len() {
            out.push((k + 1, self.a[k]));
            out.push((k + 1, self.b[k]));
        }
        out
    }

    pub fn sum_sq(&self) -> f64 {
        self.c0 * self.c0 + self.a.iter().chain(&self.b).map(|c| c * c).sum::<f64>()
    }
}

pub fn spherical_coefficients(trace: &[f64], r0: f64) -> FourierCoefficients {
    let m = trace.len();
    let dt = 2.0 * PI / m as f64;
    let mean: f64 = trace.iter().sum::<f64>() * dt;
    let c0 = mean * r0 / (2.0 * PI * r0).sqrt();
    let kmax = m / 2;
    let mut a = vec![0.0; kmax];
    let mut b = vec![0.0; kmax];
    for k in 1..=kmax {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (i, &f) in trace.iter().enumerate() {
            // Exact angle reduction keeps the sums clean for large k.
            let ang = 2.0 * PI * ((k * i) % m) as f64 / m as f64;
            sa += f * ang.cos();
            sb += f * ang.sin();
        }
        let scale = r0 * dt / (PI * r0).sqrt();
        if 2 * k == m {
            // Nyquist: cos(kθ) has norm √(2π r₀) on the sampled grid.
            a[k - 1] = sa * r0 * dt / (2.0 * PI * r0).sqrt();
            b[k - 1] = 0.0;
        } else {
            a[k - 1] = sa * scale;
            b[k - 1] = sb * scale;
        }
    }
    FourierCoefficients { r0, c0, a, b }
}

/// How a star-shaped set is turned into favorable cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Raster {
    /// A cell is favorable iff its center lies inside.
    CenterTest,
    /// The `round(1/h²)` cells with the smallest `|x − c|/ρ(θ)` are
    /// favorable, so every set has exactly the same discrete measure.
    EqualMeasure,
}

/// Eigenvalue problems for planar sets on one fixed grid: the disk of radius
/// `R` discretized with `gridres` cells across its diameter.
#[derive(Debug, Clone)]
pub struct PlaneSolver {
    pub domain: GridDomain,
    pub solver: GridEigenSolver,
    pub radius: f64,
    pub mbar: f64,
    pub munder: f64,
    pub raster: Raster,
    warm: Option<Vec<f64>>,
}

impl PlaneSolver {
    pub fn new(radius: f64, gridres: usize, mbar: f64, munder: f64, raster: Raster) -> Result<Self> {
        let r0 = unit_ball_radius(2);
        if !(radius > r0) {
            return Err(Error::InvalidArgument(format!("R = {radius} must exceed r0")));
        }
        let domain = GridDomain::centered(2, radius, gridres, |x| x[0].hypot(x[1]) < radius)?;
        let solver = GridEigenSolver::new(&domain)?;
        Ok(Self {
            domain,
            solver,
            radius,
            mbar,
            munder,
            raster,
            warm: None,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.domain.spacing()
    }

    /// Favorable DOF mask of the star-shaped set `|x − c| < ρ(θ)`.
    pub fn rasterize(&self, center: [f64; 2], rho: impl Fn(f64) -> f64) -> Vec<bool> {
        let d = &self.domain;
        let n = d.n_dofs();
        let keys: Vec<f64> = (0..n)
            .map(|dof| {
                let x = d.dof_center(dof);
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                dx.hypot(dy) / rho(dy.atan2(dx))
            })
            .collect();
        match self.raster {
            Raster::CenterTest => keys.iter().map(|&k| k < 1.0).collect(),
            Raster::EqualMeasure => {
                let count = (1.0 / d.cell_volume()).round() as usize;
                let mut order: Vec<usize> = (0..n).collect();
                let cmp = |a: &usize, b: &usize| keys[*a].total_cmp(&keys[*b]).then(a.cmp(b));
                if count < n {
                    order.select_nth_unstable_by(count, cmp);
                }
                let mut mask = vec![false; n];
                for &i in order.iter().take(count.min(n)) {
                    mask[i] = true;
                }
                mask
            }
        }
    }

    pub fn solve_mask(&mut self, mask: Vec<bool>) -> Result<EigenSolution> {
        let w = BangBangWeight::from_dof_mask(&self.domain, self.mbar, self.munder, mask);
        let sol = self.solver.solve_weight(&self.domain, &w, self.warm.as_deref())?;
        self.warm = Some(sol.u.clone());
        Ok(sol)
    }

    /// `λ¹` of the path set `Φ(t, B)`.
    pub fn lambda_on_path(&mut self, set: &NearlySphericalSet, t: f64) -> Result<f64> {
        // Validate the radicand on a fine angular grid before rasterizing.
        for i in 0..QUAD {
            set.path_radius(t, 2.0 * PI * i as f64 / QUAD as f64)?;
        }
        let mask = self.rasterize([0.0, 0.0], |th| set.path_radius(t, th).unwrap_or(0.0));
        Ok(self.solve_mask(mask)?.lambda)
    }

    pub fn lambda_of_set(&mut self, set: &NearlySphericalSet) -> Result<f64> {
        let mask = self.rasterize([0.0, 0.0], |th| set.boundary_radius(th));
        Ok(self.solve_mask(mask)?.lambda)
    }

    pub fn lambda_of_ball(&mut self, center: [f64; 2]) -> Result<f64> {
        let r0 = unit_ball_radius(2);
        let mask = self.rasterize(center, |_| r0);
        Ok(self.solve_mask(mask)?.lambda)
    }
}

/// Rasterization noise of `λ` on this grid: the largest change under
/// sub-cell translations of the ball, which leave the continuum value fixed.
pub fn raster_noise(ps: &mut PlaneSolver) -> Result<f64> {
    let h = ps.spacing();
    let base = ps.lambda_of_ball([0.0, 0.0])?;
    let mut worst = 0.0f64;
    for (f, angle) in [(0.5, 0.0), (0.5, 0.25 * PI), (0.3, 1.0), (0.25, 2.0)] {
        let shifted = ps.lambda_of_ball([f * h * f64::cos(angle), f * h * f64::sin(angle)])?;
        worst = worst.max((shifted - base).abs());
    }
    Ok(worst)
}

/// `(λ_A, λ_B)` on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneEigen {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub h: f64,
}

pub fn eigenvalue_on_plane(
    set: &NearlySphericalSet,
    radius: f64,
    gridres: usize,
    mbar: f64,
    munder: f64,
) -> Result<PlaneEigen> {
    let mut ps = PlaneSolver::new(radius, gridres, mbar, munder, Raster::EqualMeasure)?;
    plane_pair(&mut ps, set)
}

pub fn plane_pair(ps: &mut PlaneSolver, set: &NearlySphericalSet) -> Result<PlaneEigen> {
    let lambda_b = ps.lambda_of_ball([0.0, 0.0])?;
    let lambda_a = ps.lambda_of_set(set)?;
    Ok(PlaneEigen {
        lambda_a,
        lambda_b,
        h: ps.spacing(),
    })
}

/// One asymmetry measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryRecord {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub gap: f64,
    /// `‖φ‖²` on `∂B`; the ratio uses this measure.
    pub phi_l2_sq: f64,
    /// `‖φ‖²` on the unit circle.
    pub phi_l2_sq_sphere: f64,
    pub ratio: f64,
    /// `|gap(h) − gap(2h)|`.
    pub noise_floor: f64,
    pub inconclusive: bool,
}

/// `gap / ‖φ‖²`, with a noise floor from a second solve at half resolution.
pub fn asymmetry_ratio(
    set: &NearlySphericalSet,
    radius: f64,
    gridres: usize,
    mbar: f64,
    munder: f64,
) -> Result<AsymmetryRecord> {
    let fine = eigenvalue_on_plane(set, radius, gridres, mbar, munder)?;
    let coarse = eigenvalue_on_plane(set, radius, gridres / 2, mbar, munder)?;
    Ok(asymmetry_record(set, &fine, &coarse))
}

pub fn asymmetry_record(set: &NearlySphericalSet, fine: &PlaneEigen, coarse: &PlaneEigen) -> AsymmetryRecord {
    let m = set.measures();
    let gap = fine.lambda_a - fine.lambda_b;
    let gap_coarse = coarse.lambda_a - coarse.lambda_b;
    let noise_floor = (gap - gap_coarse).abs();
    let ratio = if m.l2_sq_boundary > 0.0 {
        gap / m.l2_sq_boundary
    } else {
        0.0
    };
    AsymmetryRecord {
        lambda_a: fine.lambda_a,
        lambda_b: fine.lambda_b,
        gap,
        phi_l2_sq: m.l2_sq_boundary,
        phi_l2_sq_sphere: m.l2_sq_sphere,
        ratio,
        noise_floor,
        inconclusive: gap.abs() <= noise_floor,
    }
}

/// Finite-difference derivatives of `t ↦ λ¹(Φ(t, B))` at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDerivatives {
    pub h_t: f64,
    pub samples: Vec<(f64, f64)>,
    pub first: f64,
    pub second: f64,
}

pub fn fd_derivatives_along_path(
    ps: &mut PlaneSolver,
    set: &NearlySphericalSet,
    h_t: f64,
) -> Result<PathDerivatives> {
    if !(0.05..=0.25).contains(&h_t) {
        return Err(Error::InvalidArgument(format!("h_t = {h_t} outside [0.05, 0.25]")));
    }
    let ts = [-2.0 * h_t, -h_t, 0.0, h_t, 2.0 * h_t];
    let mut samples = Vec::with_capacity(5);
    for &t in &ts {
        samples.push((t, ps.lambda_on_path(set, t)?));
    }
    let l: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let first = (l[0] - 8.0 * l[1] + 8.0 * l[3] - l[4]) / (12.0 * h_t);
    let second = (-l[0] + 16.0 * l[1] - 30.0 * l[2] + 16.0 * l[3] - l[4]) / (12.0 * h_t * h_t);
    Ok(PathDerivatives {
        h_t,
        samples,
        first,
        second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spec_is_the_ball() {
        let set = normalize_volume_barycenter(&PerturbationSpec::single(2, 0.0)).unwrap();
        assert_eq!(set.c0, 0.0);
        assert_eq!(set.a1, 0.0);
        assert_eq!(set.b1, 0.0);
    }

    #[test]
    fn low_degrees_rejected() {
        assert!(normalize_volume_barycenter(&PerturbationSpec::single(1, 0.01)).is_err());
    }

    #[test]
    fn cutoff_shape() {
        let r0 = 0.5;
        assert_eq!(cutoff(0.2, r0), 0.0);
        assert_eq!(cutoff(r0, r0), 1.0);
        assert_eq!(cutoff(0.8, r0), 0.0);
        assert!((cutoff(0.3125, r0) - 0.5).abs() < 1e-15);
    }
}
