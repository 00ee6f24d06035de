//! Radial limit problem `−Δw = λ m̃₀ w` on ℝ^N with `m̃₀ = m̄ χ_B − m̲ χ_{ℝ^N∖B}`
//! and `B` the ball of unit measure, solved by shooting from both sides of
//! `∂B` and bisecting on the mismatch of logarithmic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_densities, Normalization};

/// Steps per shortest length scale.
pub const STEPS_PER_SCALE: usize = 2000;
/// Default relative tolerance of the eigenvalue bisection.
pub const DEFAULT_TOL: f64 = 1e-13;
/// Minimal truncation radius in decay lengths past `r₀`.
pub const MIN_DECAY_LENGTHS: f64 = 6.0;

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n >= 1);
    let mut g = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// Surface area `ω_N` of the unit sphere in ℝ^N.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Radius of the ball of unit volume in ℝ^N.
pub fn unit_ball_radius(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    (n as f64 / sphere_area(n)).powf(1.0 / n as f64)
}

/// Decay length `1/√(λ m̲)`.
pub fn decay_length(lambda: f64, munder: f64) -> f64 {
    1.0 / (lambda * munder).sqrt()
}

/// Logarithmic derivative at `r` of the decaying solution
/// `r^{−(N−2)/2} K_ν(κr)` of `g'' + (N−1)/r g' − (κ² + σ/r²) g = 0`, with
/// `ν² = ((N−2)/2)² + σ`, from the asymptotic expansion of `K_ν`. The
/// leading terms are `−κ − (N−1)/(2r)`.
pub fn decaying_log_derivative(dim: usize, kappa: f64, sigma: f64, r: f64) -> f64 {
    let half = 0.5 * (dim as f64 - 2.0);
    let mu = 4.0 * (half * half + sigma);
    let z = kappa * r;
    let (mut s, mut ds) = (1.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..12 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0);
        let term = a / z.powi(k);
        // Stop before the asymptotic series starts to diverge.
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        s += term;
        ds -= kf * term / z;
    }
    -kappa - (dim as f64 - 1.0) / (2.0 * r) + kappa * ds / s
}

/// The limit eigenpair sampled on a radial grid.
///
/// Nodes `0..=i0` cover `[0, r₀]` uniformly and nodes `i0..` cover `[r₀, R]`
/// uniformly; node `i0` sits exactly on `r₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub mbar: f64,
    pub munder: f64,
    pub r0: f64,
    pub lambda0: f64,
    pub radius: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    pub i0: usize,
    pub normalization: Normalization,
    /// `w'/w(r₀⁻) − w'/w(r₀⁺)` before the legs were glued.
    pub matching_defect: f64,
}

impl RadialProfile {
    pub fn w_at_r0(&self) -> f64 {
        self.w[self.i0]
    }

    pub fn inner_step(&self) -> f64 {
        self.r0 / self.i0 as f64
    }

    pub fn outer_step(&self) -> f64 {
        (self.radius - self.r0) / (self.r.len() - 1 - self.i0) as f64
    }

    /// `∫ f(r_i, w_i) ω_N r^{N−1} dr` by Simpson's rule on both legs.
    fn radial_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let omega = sphere_area(self.dim);
        let nm1 = self.dim as i32 - 1;
        let g = |i: usize| f(i) * self.r[i].powi(nm1);
        let n = self.r.len() - 1;
        omega * (simpson(0, self.i0, self.inner_step(), &g) + simpson(self.i0, n, self.outer_step(), &g))
    }

    /// `∫ w² ω_N r^{N−1} dr`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.radial_integral(|i| self.w[i] * self.w[i])
    }

    /// `∫ m̃₀ w² ω_N r^{N−1} dr`, splitting the interface node between legs.
    pub fn weighted_norm_sq(&self) -> f64 {
        let omega = sphere_area(self.dim);
        let nm1 = self.dim as i32 - 1;
        let n = self.r.len() - 1;
        let wsq = |i: usize| self.w[i] * self.w[i] * self.r[i].powi(nm1);
        let inner = simpson(0, self.i0, self.inner_step(), &wsq);
        let outer = simpson(self.i0, n, self.outer_step(), &wsq);
        omega * (self.mbar * inner - self.munder * outer)
    }

    /// Rescales `w` to the requested normalization.
    pub fn normalized(mut self, tag: Normalization) -> Result<Self> {
        let s = match tag {
            Normalization::L2 => self.l2_norm_sq(),
            Normalization::Weighted => self.weighted_norm_sq(),
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NormalizationFailure(format!(
                "cannot normalize profile: integral {s:e}"
            )));
        }
        let f = 1.0 / s.sqrt();
        self.w.iter_mut().for_each(|v| *v *= f);
        self.dw.iter_mut().for_each(|v| *v *= f);
        self.normalization = tag;
        Ok(self)
    }

    /// Linear interpolation of `w` at radius `r`; zero beyond `R`.
    pub fn w_interp(&self, r: f64) -> f64 {
        interp(&self.r, &self.w, self.i0, self.inner_step(), self.outer_step(), self.r0, r)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,w,dw\n");
        for i in 0..self.r.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::io::fmt17(self.r[i]),
                crate::io::fmt17(self.w[i]),
                crate::io::fmt17(self.dw[i])
            ));
        }
        out
    }
}

pub(crate) fn interp(rs: &[f64], vs: &[f64], i0: usize, hin: f64, hout: f64, r0: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return vs[0];
    }
    let last = rs.len() - 1;
    if r >= rs[last] {
        return if r == rs[last] { vs[last] } else { 0.0 };
    }
    let i = if r < r0 {
        ((r / hin) as usize).min(i0 - 1)
    } else {
        (i0 + ((r - r0) / hout) as usize).min(last - 1)
    };
    let t = (r - rs[i]) / (rs[i + 1] - rs[i]);
    vs[i] * (1.0 - t) + vs[i + 1] * t
}

/// Composite Simpson over nodes `a..=b` with spacing `h`; the last panel
/// falls back to the trapezoid rule when the count is odd.
pub(crate) fn simpson(a: usize, b: usize, h: f64, f: &impl Fn(usize) -> f64) -> f64 {
    let n = b - a;
    if n == 0 {
        return 0.0;
    }
    let even = n - n % 2;
    let mut s = 0.0;
    let mut i = a;
    while i < a + even {
        s += f(i) + 4.0 * f(i + 1) + f(i + 2);
        i += 2;
    }
    let mut total = s * h / 3.0;
    if n % 2 == 1 {
        total += 0.5 * h * (f(b - 1) + f(b));
    }
    total
}

/// Classical RK4 for `y'' = F(r, y, y')` over `steps` uniform steps from
/// `r_start` to `r_end` (either direction). Returns `(y, y')` at all nodes.
pub(crate) fn rk4(
    r_start: f64,
    r_end: f64,
    steps: usize,
    y0: f64,
    dy0: f64,
    f: impl Fn(f64, f64, f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let h = (r_end - r_start) / steps as f64;
    let mut ys = Vec::with_capacity(steps + 1);
    let mut ds = Vec::with_capacity(steps + 1);
    let (mut y, mut d) = (y0, dy0);
    ys.push(y);
    ds.push(d);
    for s in 0..steps {
        let r = r_start + s as f64 * h;
        let k1y = d;
        let k1d = f(r, y, d);
        let k2y = d + 0.5 * h * k1d;
        let k2d = f(r + 0.5 * h, y + 0.5 * h * k1y, k2y);
        let k3y = d + 0.5 * h * k2d;
        let k3d = f(r + 0.5 * h, y + 0.5 * h * k2y, k3y);
        let k4y = d + h * k3d;
        let k4d = f(r + h, y + h * k3y, k4y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        d += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        // Keep magnitudes tame on long inward legs; only ratios matter.
        if y.abs() > 1e150 {
            y *= 1e-150;
            d *= 1e-150;
            ys.iter_mut().for_each(|v| *v *= 1e-150);
            ds.iter_mut().for_each(|v| *v *= 1e-150);
        }
        ys.push(y);
        ds.push(d);
    }
    (ys, ds)
}

/// Regular solution of `f'' + (d−1)/r f' + k f = 0`, `f(0) = 1`, on `n`
/// uniform steps over `[0, r_end]`. The first `SERIES_NODES` nodes come from
/// the power series, which avoids the singular coefficient at the origin.
pub(crate) fn regular_inner(d_eff: f64, k: f64, r_end: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = r_end / n as f64;
    let start = SERIES_NODES.min(n);
    let mut ys = Vec::with_capacity(n + 1);
    let mut ds = Vec::with_capacity(n + 1);
    for i in 0..=start {
        let (y, d) = series(d_eff, k, i as f64 * h);
        ys.push(y);
        ds.push(d);
    }
    if start < n {
        let (y0, d0) = (ys[start], ds[start]);
        let (y, d) = rk4(start as f64 * h, r_end, n - start, y0, d0, |r, y, dy| {
            -(d_eff - 1.0) / r * dy - k * y
        });
        ys.extend_from_slice(&y[1..]);
        ds.extend_from_slice(&d[1..]);
    }
    (ys, ds)
}

const SERIES_NODES: usize = 10;

/// `f = Σ c_j r^{2j}` with `c_j = −k c_{j−1} / (2j (2j + d − 2))`.
fn series(d_eff: f64, k: f64, r: f64) -> (f64, f64) {
    let mut c = 1.0;
    let (mut y, mut dy) = (1.0, 0.0);
    let r2 = r * r;
    let mut pow = 1.0;
    for j in 1..8 {
        let jf = j as f64;
        c *= -k / (2.0 * jf * (2.0 * jf + d_eff - 2.0));
        dy += 2.0 * jf * c * pow * r;
        pow *= r2;
        y += c * pow;
    }
    (y, dy)
}

/// Outer boundary condition of the shooting problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outer {
    /// Decaying solution on ℝ^N, asymptotic Robin seed at `R`.
    Decaying,
    /// `w(R) = 0`.
    Dirichlet,
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    n_in: usize,
    n_out: usize,
    radius: f64,
}

fn make_grid(r0: f64, radius: f64, scale: f64, refine: usize) -> Grid {
    let h = scale / (STEPS_PER_SCALE * refine) as f64;
    let even = |x: f64| {
        let n = x.ceil() as usize;
        (n + n % 2).max(2 * SERIES_NODES)
    };
    Grid {
        n_in: even(r0 / h),
        n_out: even((radius - r0) / h),
        radius,
    }
}

/// Outer leg integrated inward from `R` to `r₀`; returned in increasing-`r`
/// order (index 0 at `r₀`).
fn outer_leg(dim: usize, lambda: f64, munder: f64, r0: f64, g: &Grid, bc: Outer, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let kappa = (lambda * munder).sqrt();
    let nm1 = dim as f64 - 1.0;
    let big = g.radius;
    let (y0, d0) = match bc {
        Outer::Decaying => (1.0, decaying_log_derivative(dim, kappa, sigma, big)),
        Outer::Dirichlet => (0.0, -1.0),
    };
    let (mut y, mut d) = rk4(big, r0, g.n_out, y0, d0, |r, y, dy| {
        -nm1 / r * dy + (kappa * kappa + sigma / (r * r)) * y
    });
    y.reverse();
    d.reverse();
    (y, d)
}

fn defect(dim: usize, mbar: f64, munder: f64, r0: f64, lambda: f64, g: &Grid, bc: Outer) -> f64 {
    let (fi, di) = regular_inner(dim as f64, lambda * mbar, r0, g.n_in);
    let (wi, dwi) = (fi[g.n_in], di[g.n_in]);
    if wi <= 0.0 {
        // Past the first Dirichlet eigenvalue of the ball.
        return f64::NEG_INFINITY;
    }
    let (fo, dout) = outer_leg(dim, lambda, munder, r0, g, bc, 0.0);
    dwi / wi - dout[0] / fo[0]
}

/// Parameters of a shooting solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shoot {
    pub dim: usize,
    pub mbar: f64,
    pub munder: f64,
    pub radius: Option<f64>,
    pub tol: f64,
    pub refine: usize,
    pub bc: Outer,
}

fn shoot(p: Shoot) -> Result<RadialProfile> {
    check_densities(p.mbar, p.munder)?;
    if !(p.dim >= 1 && p.dim <= 3) {
        return Err(Error::InvalidArgument(format!("dimension {} not in 1..=3", p.dim)));
    }
    let r0 = unit_ball_radius(p.dim);
    if let Some(rr) = p.radius {
        if !(rr > r0) {
            return Err(Error::InvalidArgument(format!("R = {rr} must exceed r0 = {r0}")));
        }
    }
    let grid_for = |lambda: f64| -> Grid {
        let len = decay_length(lambda, p.munder);
        let radius = match (p.radius, p.bc) {
            (Some(rr), Outer::Dirichlet) => rr,
            (Some(rr), Outer::Decaying) => rr.max(r0 + MIN_DECAY_LENGTHS * len),
            (None, _) => r0 + MIN_DECAY_LENGTHS * len,
        };
        make_grid(r0, radius, r0.min(len), p.refine)
    };
    let d = |lambda: f64, g: &Grid| defect(p.dim, p.mbar, p.munder, r0, lambda, g, p.bc);

    // Phase 1: bracket and locate the root coarsely, regridding with λ. Past
    // the first Dirichlet eigenvalue of B the defect is −∞, so doubling from
    // below always finds a sign change.
    let mut hi = 1.0 / (p.mbar * r0 * r0);
    let mut tries = 0;
    while d(hi, &grid_for(hi)) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::BracketFailure("no sign change of the matching defect".into()));
        }
    }
    let mut lo = hi / 2.0;
    while d(lo, &grid_for(lo)) <= 0.0 {
        lo /= 2.0;
        tries += 1;
        if tries > 120 {
            return Err(Error::BracketFailure("defect non-positive near zero".into()));
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if d(mid, &grid_for(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Phase 2: freeze the grid and bisect to the requested tolerance.
    let grid = grid_for(hi);
    let mut width = hi - lo;
    let (mut d_lo, mut d_hi);
    loop {
        d_lo = d(lo, &grid);
        d_hi = d(hi, &grid);
        if d_lo > 0.0 && d_hi <= 0.0 {
            break;
        }
        width *= 4.0;
        if width > hi {
            return Err(Error::BracketFailure("lost the bracket on the frozen grid".into()));
        }
        lo -= width;
        hi += width;
    }
    let mut iterations = 0;
    while hi - lo > p.tol * hi {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NonConvergence {
                iterations,
                residual: (hi - lo) / hi,
            });
        }
        let mid = 0.5 * (lo + hi);
        let dm = d(mid, &grid);
        if dm > 0.0 {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
            d_hi = dm;
        }
    }
    // Secant step inside the final bracket.
    let lambda = if d_hi.is_finite() && d_lo != d_hi {
        (lo - d_lo * (hi - lo) / (d_hi - d_lo)).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    Ok(assemble(p, r0, lambda, &grid))
}

fn assemble(p: Shoot, r0: f64, lambda: f64, g: &Grid) -> RadialProfile {
    let (fi, di) = regular_inner(p.dim as f64, lambda * p.mbar, r0, g.n_in);
    let (fo, dout) = outer_leg(p.dim, lambda, p.munder, r0, g, p.bc, 0.0);
    let scale = fi[g.n_in] / fo[0];
    let hin = r0 / g.n_in as f64;
    let hout = (g.radius - r0) / g.n_out as f64;
    let mut r = Vec::with_capacity(g.n_in + g.n_out + 1);
    let mut w = Vec::with_capacity(r.capacity());
    let mut dw = Vec::with_capacity(r.capacity());
    for i in 0..=g.n_in {
        r.push(i as f64 * hin);
        w.push(fi[i]);
        dw.push(di[i]);
    }
    for i in 1..=g.n_out {
        r.push(r0 + i as f64 * hout);
        w.push(fo[i] * scale);
        dw.push(dout[i] * scale);
    }
    r[g.n_in] = r0;
    *r.last_mut().unwrap() = g.radius;
    let matching_defect = di[g.n_in] / fi[g.n_in] - dout[0] / fo[0];
    RadialProfile {
        dim: p.dim,
        mbar: p.mbar,
        munder: p.munder,
        r0,
        lambda0: lambda,
        radius: g.radius,
        r,
        w,
        dw,
        i0: g.n_in,
        normalization: Normalization::L2,
        matching_defect,
    }
}

/// Limit eigenpair `(λ̃₀, w)` on ℝ^N, truncated at `R` (enlarged to at least
/// `r₀ + 6` decay lengths) and normalized as requested.
pub fn solve_limit_eigen(
    dim: usize,
    mbar: f64,
    munder: f64,
    radius: Option<f64>,
    tol: f64,
    norm: Normalization,
) -> Result<RadialProfile> {
    solve_limit_eigen_refined(dim, mbar, munder, radius, tol, norm, 1)
}

/// As [`solve_limit_eigen`] with the radial step divided by `refine`.
pub fn solve_limit_eigen_refined(
    dim: usize,
    mbar: f64,
    munder: f64,
    radius: Option<f64>,
    tol: f64,
    norm: Normalization,
    refine: usize,
) -> Result<RadialProfile> {
    shoot(Shoot {
        dim,
        mbar,
        munder,
        radius,
        tol,
        refine: refine.max(1),
        bc: Outer::Decaying,
    })?
    .normalized(norm)
}

/// `Λ(R) = λ¹(B, B_R)`: principal eigenvalue with the unit ball favorable
/// inside the ball of radius `R` and a Dirichlet condition on `∂B_R`.
pub fn lambda_finite_ball(dim: usize, mbar: f64, munder: f64, radius: f64) -> Result<f64> {
    Ok(shoot(Shoot {
        dim,
        mbar,
        munder,
        radius: Some(radius),
        tol: DEFAULT_TOL,
        refine: 1,
        bc: Outer::Dirichlet,
    })?
    .lambda0)
}

/// Least-squares line `y = a + b x`; returns `(b, a)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fitted exponential rate of a gap sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Slopes between consecutive samples.
    pub pair_slopes: Vec<f64>,
}

/// Slope of `log(Λ(R) − λ̃₀)` against `R`. Samples whose gap does not exceed
/// `noise_floor` are an error.
pub fn fit_gap_rate(samples: &[(f64, f64)], lambda0: f64, noise_floor: f64) -> Result<RateFit> {
    if samples.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(rr, lam) in samples {
        let gap = lam - lambda0;
        if !(gap > noise_floor) {
            return Err(Error::ResolutionExceeded(format!(
                "gap {gap:e} at R = {rr} is below the noise floor {noise_floor:e}"
            )));
        }
        xs.push(rr);
        ys.push(gap.ln());
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    let pair_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    Ok(RateFit {
        slope,
        intercept,
        pair_slopes,
    })
}

/// Slope of `log(w r^{(N−1)/2})` over the outer third of the profile,
/// skipping values too small to carry a meaningful logarithm.
pub fn decay_rate(profile: &RadialProfile) -> Result<f64> {
    let n = profile.r.len();
    let start = n - (n - profile.i0) / 3;
    let wmax = profile.w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let half = 0.5 * (profile.dim as f64 - 1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in start..n {
        let (r, w) = (profile.r[i], profile.w[i]);
        if w > 1e-250 * wmax && w > f64::MIN_POSITIVE * 1e10 {
            xs.push(r);
            ys.push((w * r.powf(half)).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::ResolutionExceeded("profile tail underflows".into()));
    }
    Ok(linear_fit(&xs, &ys).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_radii() {
        assert!((unit_ball_radius(1) - 0.5).abs() < 1e-15);
        assert!((unit_ball_radius(2) - 0.564_189_583_547_756_3).abs() < 1e-15);
        assert!((unit_ball_radius(3) - 0.620_350_490_899_400_1).abs() < 1e-15);
        for n in 1..=3 {
            let r = unit_ball_radius(n);
            assert!((sphere_area(n) * r.powi(n as i32) / n as f64 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rk4_exponential_exact_enough() {
        let (y, d) = rk4(0.0, 1.0, 1000, 1.0, 1.0, |_, y, _| y);
        assert!((y[1000] - 1f64.exp()).abs() < 1e-12);
        assert!((d[1000] - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn simpson_integrates_cubics() {
        let f = |i: usize| (i as f64 * 0.1).powi(3);
        assert!((simpson(0, 10, 0.1, &f) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn synthetic_gap_rate_is_exact() {
        let c = 3.7;
        let samples: Vec<(f64, f64)> = (0..6).map(|i| {
            let r = 1.0 + 0.5 * i as f64;
            (r, 2.0 + (-c * r).exp())
        }).collect();
        let fit = fit_gap_rate(&samples, 2.0, 0.0).unwrap();
        assert!((fit.slope + c).abs() < 1e-10);
        assert!(fit.pair_slopes.iter().all(|s| (s + c).abs() < 1e-9));
        assert!(fit_gap_rate(&samples[..2], 2.0, 0.0).is_err());
    }

    #[test]
    fn synthetic_decay_is_exact() {
        let r0 = unit_ball_radius(3);
        let r: Vec<f64> = (0..=200).map(|i| if i <= 100 { r0 * i as f64 / 100.0 } else { r0 + (i - 100) as f64 * 0.05 }).collect();
        let w: Vec<f64> = r.iter().map(|&x| (-2.0 * x).exp() / x.max(1e-3)).collect();
        let p = RadialProfile {
            dim: 3,
            mbar: 1.0,
            munder: 1.0,
            r0,
            lambda0: 4.0,
            radius: *r.last().unwrap(),
            dw: vec![0.0; r.len()],
            r,
            w,
            i0: 100,
            normalization: Normalization::L2,
            matching_defect: 0.0,
        };
        assert!((decay_rate(&p).unwrap() + 2.0).abs() < 1e-10);
    }
}
