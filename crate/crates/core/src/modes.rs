//! Spherical-harmonic components of the shape derivative of the limit
//! eigenfunction: transmission problems for `g_ℓ` and the coercivity constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{decaying_log_derivative, regular_inner, rk4, simpson, RadialProfile};
use crate::spectral::Normalization;

/// Eigenvalue `ℓ(ℓ + N − 2)` of the Laplace–Beltrami operator on `S^{N−1}`.
pub fn laplace_beltrami_eigenvalue(dim: usize, l: usize) -> f64 {
    (l * (l + dim - 2)) as f64
}

/// Solution of one transmission problem, sampled on the profile's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub sigma: f64,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    /// `g'(r₀⁻)` and `g'(r₀⁺)`.
    pub dg_inner: f64,
    pub dg_outer: f64,
    pub g_r0: f64,
}

/// Solves `g'' + (N−1)/r g' + (λ̃₀ m̃₀ − σ/r²) g = 0` on both sides of `r₀`,
/// regular at 0, decaying at ∞, continuous at `r₀` with
/// `g'(r₀⁻) − g'(r₀⁺) = j` where `j = λ̃₀(m̄+m̲)w(r₀)`.
///
/// For `σ` of the form `ℓ(ℓ+N−2)` the inner solution is written as `r^ℓ f`,
/// which turns the inner equation into the radial one in dimension `N + 2ℓ`.
pub fn solve_mode(profile: &RadialProfile, sigma: f64) -> Result<ModeProfile> {
    if profile.normalization != Normalization::Weighted {
        return Err(Error::InvalidArgument(
            "mode problems need the weighted profile normalization".into(),
        ));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be non-negative")));
    }
    let n = profile.dim as f64;
    let lam = profile.lambda0;
    let r0 = profile.r0;
    let n_in = profile.i0;
    let n_out = profile.r.len() - 1 - n_in;
    let jump = jump(profile);

    // Degree with ℓ(ℓ+N−2) = σ.
    let half = 0.5 * (n - 2.0);
    let l = -half + (half * half + sigma).sqrt();

    let (f, df) = regular_inner(n + 2.0 * l, lam * profile.mbar, r0, n_in);
    let mut g_in = Vec::with_capacity(n_in + 1);
    let mut dg_in = Vec::with_capacity(n_in + 1);
    for i in 0..=n_in {
        let r = profile.r[i];
        let (rl, drl) = if i == 0 {
            (if l == 0.0 { 1.0 } else { 0.0 }, if (l - 1.0).abs() < 1e-15 { 1.0 } else { 0.0 })
        } else {
            (r.powf(l), l * r.powf(l - 1.0))
        };
        g_in.push(rl * f[i]);
        dg_in.push(drl * f[i] + rl * df[i]);
    }

    let kappa2 = lam * profile.munder;
    let big = profile.radius;
    let seed = decaying_log_derivative(profile.dim, kappa2.sqrt(), sigma, big);
    let (mut g_out, mut dg_out) = rk4(big, r0, n_out, 1.0, seed, |r, y, dy| {
        -(n - 1.0) / r * dy + (kappa2 + sigma / (r * r)) * y
    });
    g_out.reverse();
    dg_out.reverse();

    // A φ_in(r₀) = B φ_out(r₀);  A φ_in'(r₀) − B φ_out'(r₀) = j.
    let (pi, dpi) = (g_in[n_in], dg_in[n_in]);
    let (po, dpo) = (g_out[0], dg_out[0]);
    let det = -pi * dpo + po * dpi;
    let scale = (pi * dpo).abs().max((po * dpi).abs());
    let threshold = 1e-12 * scale;
    if !(det.abs() > threshold) {
        return Err(Error::ResonantMode {
            determinant: det,
            threshold,
        });
    }
    let a = jump * po / det;
    let b = jump * pi / det;

    let mut g = Vec::with_capacity(profile.r.len());
    let mut dg = Vec::with_capacity(profile.r.len());
    for i in 0..=n_in {
        g.push(a * g_in[i]);
        dg.push(a * dg_in[i]);
    }
    for i in 1..=n_out {
        g.push(b * g_out[i]);
        dg.push(b * dg_out[i]);
    }
    Ok(ModeProfile {
        sigma,
        g_r0: a * pi,
        dg_inner: a * dpi,
        dg_outer: b * dpo,
        dg,
        g,
    })
}

/// `j = λ̃₀ (m̄ + m̲) w(r₀)`.
pub fn jump(profile: &RadialProfile) -> f64 {
    profile.lambda0 * (profile.mbar + profile.munder) * profile.w_at_r0()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub degree: usize,
    pub mode: ModeProfile,
}

/// Mode profiles for degrees `1..=l_max` plus the coercivity constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub dim: usize,
    pub profile: RadialProfile,
    pub jump: f64,
    pub entries: Vec<ModeEntry>,
    pub coercivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummaryRow {
    pub degree: usize,
    pub sigma: f64,
    pub g_r0: f64,
}

impl ModeTable {
    pub fn build(profile: RadialProfile, l_max: usize) -> Result<Self> {
        if l_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "l_max = {l_max}; degrees 1 and 2 are required"
            )));
        }
        let dim = profile.dim;
        let entries = (1..=l_max)
            .map(|l| {
                solve_mode(&profile, laplace_beltrami_eigenvalue(dim, l)).map(|mode| ModeEntry {
                    degree: l,
                    mode,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self {
            dim,
            jump: jump(&profile),
            profile,
            entries,
            coercivity: 0.0,
        };
        table.coercivity = coercivity_constant(&table)?;
        Ok(table)
    }

    pub fn g_r0(&self, degree: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.degree == degree)
            .map(|e| e.mode.g_r0)
    }

    pub fn summary(&self) -> Vec<ModeSummaryRow> {
        self.entries
            .iter()
            .map(|e| ModeSummaryRow {
                degree: e.degree,
                sigma: e.mode.sigma,
                g_r0: e.mode.g_r0,
            })
            .collect()
    }

    /// Single-mode prediction of `gap / ‖φ‖²`: `j (g₁(r₀) − g_ℓ(r₀))`.
    pub fn single_mode_ratio(&self, degree: usize) -> Result<f64> {
        let g1 = self.g_r0(1).ok_or_else(|| missing(1))?;
        let gl = self.g_r0(degree).ok_or_else(|| missing(degree))?;
        Ok(self.jump * (g1 - gl))
    }
}

fn missing(l: usize) -> Error {
    Error::InvalidArgument(format!("degree {l} is not in the mode table"))
}

/// `C = 2 j (g₁(r₀) − g₂(r₀))`.
pub fn coercivity_constant(table: &ModeTable) -> Result<f64> {
    let g1 = table.g_r0(1).ok_or_else(|| missing(1))?;
    let g2 = table.g_r0(2).ok_or_else(|| missing(2))?;
    let c = 2.0 * table.jump * (g1 - g2);
    if !(c > 0.0) {
        return Err(Error::NonPositiveCoercivity(c));
    }
    Ok(c)
}

/// `λ̈₀ = 2 j Σ_k (g₁(r₀) − g_{ℓ(k)}(r₀)) c_k²` for coefficients given as
/// `(degree, c)` pairs in a basis orthonormal on `∂B`. Degree-0 entries are
/// rejected unless zero.
pub fn predicted_second_derivative(coeffs: &[(usize, f64)], table: &ModeTable) -> Result<f64> {
    let g1 = table.g_r0(1).ok_or_else(|| missing(1))?;
    let mut sum = 0.0;
    for &(l, c) in coeffs {
        if c == 0.0 {
            continue;
        }
        if l == 0 {
            return Err(Error::InvalidArgument(format!(
                "degree-0 coefficient {c:e} must vanish for volume-preserving paths"
            )));
        }
        let gl = table.g_r0(l).ok_or_else(|| missing(l))?;
        sum += (g1 - gl) * c * c;
    }
    Ok(2.0 * table.jump * sum)
}

/// Both sides of the Sturm-type identity for degrees `h`, `k` over `(0, R)`:
/// `(σ_k−σ_h)∫ r^{N−3} g_h g_k dr + r₀^{N−1} j (g_k(r₀) − g_h(r₀))` and
/// `[r^{N−1}(g_h g_k' − g_k g_h')]₀^R`.
pub fn sturm_identity(table: &ModeTable, h: usize, k: usize) -> Result<(f64, f64)> {
    let find = |l: usize| {
        table
            .entries
            .iter()
            .find(|e| e.degree == l)
            .map(|e| &e.mode)
            .ok_or_else(|| missing(l))
    };
    let (gh, gk) = (find(h)?, find(k)?);
    let p = &table.profile;
    let nm3 = p.dim as i32 - 3;
    let nm1 = p.dim as i32 - 1;
    let f = |i: usize| {
        if i == 0 {
            // r^{N−3} g_h g_k ~ r^{N−3+h+k} vanishes at the origin for h+k ≥ 2.
            0.0
        } else {
            p.r[i].powi(nm3) * gh.g[i] * gk.g[i]
        }
    };
    let last = p.r.len() - 1;
    let integral = simpson(0, p.i0, p.inner_step(), &f) + simpson(p.i0, last, p.outer_step(), &f);
    let lhs = (gk.sigma - gh.sigma) * integral
        + p.r0.powi(nm1) * table.jump * (gk.g_r0 - gh.g_r0);
    let rr = p.r[last];
    let rhs = rr.powi(nm1) * (gh.g[last] * gk.dg[last] - gk.g[last] * gh.dg[last]);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_beltrami_values() {
        assert_eq!(laplace_beltrami_eigenvalue(2, 1), 1.0);
        assert_eq!(laplace_beltrami_eigenvalue(2, 0), 0.0);
        assert_eq!(laplace_beltrami_eigenvalue(3, 2), 6.0);
    }
}
