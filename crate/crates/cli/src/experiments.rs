//! Experiment drivers shared by the subcommands and the acceptance battery.

use std::f64::consts::PI;

use bbspectra::domain::DomainSpec;
use bbspectra::grid::GridDomain;
use bbspectra::modes::ModeTable;
use bbspectra::nearly_spherical::{
    asymmetry_record, normalize_volume_barycenter, raster_noise, AsymmetryRecord, NearlySphericalSet, PerturbationSpec, PlaneEigen,
    PlaneSolver, Raster,
};
use bbspectra::optimizer::{
    blowup_compare, diagnostics, extract_polar_parametrization, incenter_points, rearrangement_optimize,
    shell_cell_count, BlowupComparison, Diagnostics, Init, Optimization, OptimizeOptions,
    PolarParametrization,
};
use bbspectra::radial::{decay_length, unit_ball_radius, RadialProfile};
use bbspectra::Result;
use serde::Serialize;

/// Rays used for the polar parametrization of optimal sets.
pub const POLAR_RAYS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    /// Fixed grid with this many cells across the longer side.
    Cells(usize),
    /// Grid spacing chosen per ε so the blow-up radius spans this many cells.
    CellsPerRadius(f64),
}

impl GridChoice {
    pub fn grid(self, spec: &DomainSpec, eps: f64) -> Result<GridDomain> {
        match self {
            GridChoice::Cells(n) => spec.grid(n),
            GridChoice::CellsPerRadius(c) => {
                let n = shell_cell_count(PI * c * c) as f64;
                spec.grid_with_spacing((eps / n).sqrt())
            }
        }
    }
}

/// One optimization with everything the reports need.
pub struct OptimizeRun {
    pub eps_frac: f64,
    pub eps: f64,
    pub domain: GridDomain,
    pub opt: Optimization,
    pub diag: Diagnostics,
    pub polar: std::result::Result<PolarParametrization, String>,
    pub blowup: Option<BlowupComparison>,
}

/// Optimizes the favorable set of measure `eps_frac·|Ω|` and evaluates the
/// diagnostics. `profile` is the planar limit profile for the same densities.
pub fn optimize_point(
    spec: &DomainSpec,
    eps_frac: f64,
    choice: GridChoice,
    init: &Init,
    opts: OptimizeOptions,
    profile: &RadialProfile,
) -> Result<OptimizeRun> {
    let eps = eps_frac * spec.area();
    let domain = choice.grid(spec, eps)?;
    let opt = rearrangement_optimize(&domain, eps, profile.mbar, profile.munder, init, opts)?;
    let centers = incenter_points(&domain, spec.incenter())?;
    let diag = diagnostics(&domain, &opt.favorable, &opt.solution, eps, &centers, Some(profile.lambda0));
    let polar = extract_polar_parametrization(&domain, &opt.favorable, eps, diag.barycenter, POLAR_RAYS)
        .map_err(|e| e.to_string());
    let blowup = blowup_compare(&domain, &opt.solution, eps, profile).ok();
    Ok(OptimizeRun {
        eps_frac,
        eps,
        domain,
        opt,
        diag,
        polar,
        blowup,
    })
}

/// Flat per-point record, one CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eps_frac: f64,
    pub eps: f64,
    pub h: f64,
    pub n_dofs: usize,
    pub favorable_cells: usize,
    pub lambda: f64,
    pub scaled_lambda: f64,
    pub lambda_ratio: f64,
    pub components_4: usize,
    pub components_8: usize,
    pub local_maxima: usize,
    pub barycenter_distance: f64,
    pub max_point_distance: f64,
    pub phi_l2: Option<f64>,
    pub phi_sup: Option<f64>,
    pub polar_error: Option<String>,
    pub blowup_sup_relative: Option<f64>,
    pub blowup_l2: Option<f64>,
    pub out_of_regime: Option<bool>,
    pub alpha: f64,
    pub iterations: usize,
    pub status: String,
    pub monotone: bool,
}

impl SweepRecord {
    pub fn from_run(run: &OptimizeRun) -> Self {
        let d = &run.diag;
        let polar = run.polar.as_ref().ok();
        Self {
            eps_frac: run.eps_frac,
            eps: run.eps,
            h: run.domain.spacing(),
            n_dofs: run.domain.n_dofs(),
            favorable_cells: run.opt.favorable.iter().filter(|&&f| f).count(),
            lambda: run.opt.solution.lambda,
            scaled_lambda: d.scaled_lambda,
            lambda_ratio: d.lambda_ratio.unwrap_or(f64::NAN),
            components_4: d.components_4,
            components_8: d.components_8,
            local_maxima: d.local_maxima,
            barycenter_distance: d.barycenter_distance,
            max_point_distance: d.max_point_distance,
            phi_l2: polar.map(|p| p.l2),
            phi_sup: polar.map(|p| p.sup),
            polar_error: run.polar.as_ref().err().cloned(),
            blowup_sup_relative: run.blowup.as_ref().map(|b| b.sup_relative),
            blowup_l2: run.blowup.as_ref().map(|b| b.l2_distance),
            out_of_regime: run.blowup.as_ref().map(|b| b.out_of_regime),
            alpha: d.alpha,
            iterations: run.opt.trace.records.len(),
            status: format!("{:?}", run.opt.trace.status),
            monotone: run.opt.trace.is_monotone(),
        }
    }

    /// Rasterization floor of `‖φ_ε‖_{L²}` in blow-up units: a boundary
    /// uncertain by two cells on every ray.
    pub fn phi_floor(&self) -> f64 {
        2.0 * self.h / self.eps.sqrt() * (2.0 * PI).sqrt()
    }
}

/// Plane truncation radius `r₀ + n` decay lengths.
pub fn plane_radius(profile: &RadialProfile, decay_lengths: f64) -> f64 {
    profile.r0 + decay_lengths * decay_length(profile.lambda0, profile.munder)
}

/// Bounds on `gap/‖φ‖²`: the single degree-2 prediction scaled by 0.9 below,
/// and ten times the largest single-mode prediction up to degree 6 above.
pub fn ratio_band(table: &ModeTable) -> Result<(f64, f64)> {
    let lo = 0.9 * table.single_mode_ratio(2)?;
    let hi = (2..=table.entries.len().min(6))
        .map(|l| table.single_mode_ratio(l))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((lo, 10.0 * hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryRow {
    pub mode: usize,
    pub amp_frac: f64,
    pub s: f64,
    #[serde(flatten)]
    pub record: AsymmetryRecord,
    /// `λ̈/2 / ‖φ‖²` from the mode table.
    pub predicted_ratio: f64,
    /// Largest change of the ball eigenvalue under sub-cell shifts.
    pub raster_noise: f64,
    /// The gap agrees with the prediction to within the noise floor.
    pub within_noise: bool,
    pub band_lo: f64,
    pub band_hi: f64,
    pub in_band: bool,
}

/// Asymmetry records for every (mode, amplitude) pair. The fine and the
/// half-resolution solver are each built once; the ball eigenvalue is shared.
pub fn asymmetry_rows(
    table: &ModeTable,
    modes: &[usize],
    amps: &[f64],
    radius: f64,
    grid: usize,
) -> Result<Vec<AsymmetryRow>> {
    let p = &table.profile;
    let mut sets = Vec::new();
    for &k in modes {
        for &a in amps {
            let set = normalize_volume_barycenter(&PerturbationSpec::single(k, a * p.r0))?;
            sets.push((k, a, set));
        }
    }
    let (band_lo, band_hi) = ratio_band(table)?;
    let mut fine = PlaneSolver::new(radius, grid, p.mbar, p.munder, Raster::EqualMeasure)?;
    let mut coarse = PlaneSolver::new(radius, grid / 2, p.mbar, p.munder, Raster::EqualMeasure)?;
    let noise = raster_noise(&mut fine)?;
    let fine_ball = BallSolve::new(&mut fine)?;
    let coarse_ball = BallSolve::new(&mut coarse)?;
    let mut rows = Vec::new();
    for (k, a, set) in sets {
        let f = fine_ball.pair(&mut fine, &set)?;
        let c = coarse_ball.pair(&mut coarse, &set)?;
        let mut record = asymmetry_record(&set, &f, &c);
        // Both eigenvalues carry rasterization noise.
        record.noise_floor = record.noise_floor.max(2.0 * noise);
        record.inconclusive = record.gap.abs() <= record.noise_floor;
        let predicted_ratio = if record.phi_l2_sq > 0.0 {
            0.5 * set.predicted_second_derivative(table)? / record.phi_l2_sq
        } else {
            0.0
        };
        let in_band = record.ratio >= band_lo && record.ratio <= band_hi;
        let within_noise = (record.gap - predicted_ratio * record.phi_l2_sq).abs() <= record.noise_floor;
        rows.push(AsymmetryRow {
            mode: k,
            amp_frac: a,
            s: a * p.r0,
            record,
            predicted_ratio,
            raster_noise: noise,
            within_noise,
            band_lo,
            band_hi,
            in_band,
        });
    }
    Ok(rows)
}

struct BallSolve {
    mask: Vec<bool>,
    lambda: f64,
}

impl BallSolve {
    fn new(ps: &mut PlaneSolver) -> Result<Self> {
        let r0 = unit_ball_radius(2);
        let mask = ps.rasterize([0.0, 0.0], |_| r0);
        let lambda = ps.solve_mask(mask.clone())?.lambda;
        Ok(Self { mask, lambda })
    }

    /// Sets that rasterize to the ball reuse its eigenvalue, so the gap is
    /// exactly zero.
    fn pair(&self, ps: &mut PlaneSolver, set: &NearlySphericalSet) -> Result<PlaneEigen> {
        let mask = ps.rasterize([0.0, 0.0], |th| set.boundary_radius(th));
        let lambda_a = if mask == self.mask {
            self.lambda
        } else {
            ps.solve_mask(mask)?.lambda
        };
        Ok(PlaneEigen {
            lambda_a,
            lambda_b: self.lambda,
            h: ps.spacing(),
        })
    }
}
