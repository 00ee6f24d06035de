//! The acceptance battery: ten numbered criteria, each evaluated to pass,
//! fail or inconclusive with its measured values.

use std::collections::BTreeMap;
use std::time::Instant;

use bbspectra::domain::DomainSpec;
use bbspectra::modes::ModeTable;
use bbspectra::nearly_spherical::{
    fd_derivatives_along_path, normalize_volume_barycenter, Harmonic, PathDerivatives, PerturbationSpec,
    PlaneSolver, Raster, raster_noise,
};
use bbspectra::optimizer::{
    gap_fit_domain, rearrangement_optimize, FitStatus, Init, OptimizationTrace, OptimizeOptions, Status as OptStatus,
};
use bbspectra::radial::{
    decay_length, decay_rate, fit_gap_rate, lambda_finite_ball, solve_limit_eigen, solve_limit_eigen_refined,
    RadialProfile, DEFAULT_TOL,
};
use bbspectra::spectral::Normalization;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bessel::planar_limit_lambda;
use crate::experiments::{asymmetry_rows, optimize_point, plane_radius, GridChoice, SweepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub status: Status,
    pub summary: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    pub measured: Value,
    pub notes: Vec<String>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let budget = self.budget_seconds.map(|b| format!(" / {b} s")).unwrap_or_default();
        format!(
            "criterion {:>2} [{}] {}: {} ({:.2} s{budget})",
            self.id,
            self.status.label(),
            self.title,
            self.summary,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct BatteryOptions {
    pub quick: bool,
    /// Criteria to run; all when empty.
    pub only: Vec<u32>,
    /// Grid override for the planar criteria 5 and 6.
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub quick: bool,
    pub criteria: Vec<CriterionReport>,
    pub passed: usize,
    pub inconclusive: usize,
    pub failed: usize,
}

impl BatteryReport {
    /// Failures always count; inconclusive items count only when strict.
    pub fn ok(&self, strict: bool) -> bool {
        self.failed == 0 && (!strict || self.inconclusive == 0)
    }
}

struct Outcome {
    status: Status,
    summary: String,
    measured: Value,
    notes: Vec<String>,
}

type Res = bbspectra::Result<Outcome>;

#[derive(Default)]
struct Ctx {
    quick: bool,
    grid: Option<usize>,
    traces: Vec<(String, OptimizationTrace)>,
    sweep: Option<Vec<SweepRecord>>,
    results: BTreeMap<u32, Status>,
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Option<f64>,
    run: fn(&mut Ctx) -> Res,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "limit eigenvalue vs Bessel matching", budget: Some(1.0), run: c1 },
    Criterion { id: 2, title: "exterior decay rate", budget: Some(1.0), run: c2 },
    Criterion { id: 3, title: "finite-ball gap", budget: Some(10.0), run: c3 },
    Criterion { id: 4, title: "mode profiles and coercivity", budget: Some(5.0), run: c4 },
    Criterion { id: 5, title: "quantitative asymmetry", budget: Some(600.0), run: c5 },
    Criterion { id: 6, title: "path derivatives", budget: Some(600.0), run: c6 },
    Criterion { id: 7, title: "disk optimum", budget: Some(120.0), run: c7 },
    Criterion { id: 8, title: "ellipse sweep", budget: Some(900.0), run: c8 },
    Criterion { id: 9, title: "rearrangement monotonicity", budget: None, run: c9 },
    Criterion { id: 10, title: "non-reproducible rates", budget: None, run: c10 },
];

/// Runs the selected criteria in order, handing each report to `on_report`
/// as soon as it is available.
pub fn run_battery(opts: &BatteryOptions, mut on_report: impl FnMut(&CriterionReport)) -> BatteryReport {
    let mut ctx = Ctx {
        quick: opts.quick,
        grid: opts.grid,
        ..Ctx::default()
    };
    let mut criteria = Vec::new();
    for c in CRITERIA.iter().filter(|c| opts.only.is_empty() || opts.only.contains(&c.id)) {
        let t = Instant::now();
        let out = (c.run)(&mut ctx);
        let seconds = t.elapsed().as_secs_f64();
        let mut report = match out {
            Ok(o) => CriterionReport {
                id: c.id,
                title: c.title,
                status: o.status,
                summary: o.summary,
                seconds,
                budget_seconds: c.budget,
                measured: o.measured,
                notes: o.notes,
            },
            Err(e) => CriterionReport {
                id: c.id,
                title: c.title,
                status: Status::Fail,
                summary: format!("error: {e}"),
                seconds,
                budget_seconds: c.budget,
                measured: Value::Null,
                notes: Vec::new(),
            },
        };
        if let Some(b) = c.budget {
            if seconds > b {
                report.status = Status::Fail;
                report.notes.push(format!("runtime {seconds:.2} s exceeds {b} s"));
            }
        }
        ctx.results.insert(c.id, report.status);
        on_report(&report);
        criteria.push(report);
    }
    let count = |s: Status| criteria.iter().filter(|r| r.status == s).count();
    BatteryReport {
        quick: opts.quick,
        passed: count(Status::Pass),
        inconclusive: count(Status::Inconclusive),
        failed: count(Status::Fail),
        criteria,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn limit_profile(norm: Normalization) -> bbspectra::Result<RadialProfile> {
    solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, norm)
}

fn c1(_: &mut Ctx) -> Res {
    let p = limit_profile(Normalization::L2)?;
    let oracle = planar_limit_lambda(1.0, 1.0);
    let err = rel(p.lambda0, oracle);
    Ok(Outcome {
        status: Status::from_bool(err <= 1e-6),
        summary: format!("lambda0 = {:.12}, oracle = {oracle:.12}, rel = {err:.2e} (tol 1e-6)", p.lambda0),
        measured: json!({ "lambda0": p.lambda0, "oracle": oracle, "relative_error": err, "r0": p.r0 }),
        notes: Vec::new(),
    })
}

fn c2(_: &mut Ctx) -> Res {
    let base = limit_profile(Normalization::L2)?;
    let far = base.r0 + 12.0 * decay_length(base.lambda0, base.munder);
    let p = solve_limit_eigen(2, 1.0, 1.0, Some(far), DEFAULT_TOL, Normalization::L2)?;
    let rate = decay_rate(&p)?;
    let target = -(p.lambda0 * p.munder).sqrt();
    let err = rel(rate, target);
    Ok(Outcome {
        status: Status::from_bool(err <= 0.01),
        summary: format!("rate = {rate:.8}, target = {target:.8}, rel = {err:.2e} (tol 1e-2)"),
        measured: json!({ "rate": rate, "target": target, "relative_error": err, "radius": far }),
        notes: Vec::new(),
    })
}

fn c3(_: &mut Ctx) -> Res {
    let p = limit_profile(Normalization::L2)?;
    let len = decay_length(p.lambda0, p.munder);
    let mut samples = Vec::new();
    for k in 2..=10 {
        let r = p.r0 + k as f64 * len;
        samples.push((r, lambda_finite_ball(2, 1.0, 1.0, r)?));
    }
    let positive = samples.iter().all(|s| s.1 > p.lambda0);
    let decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);
    let fit = fit_gap_rate(&samples, p.lambda0, 1e-12 * p.lambda0)?;
    let target = -2.0 * (p.lambda0 * p.munder).sqrt();
    let err = rel(fit.slope, target);
    let ok = positive && decreasing && err <= 0.05;
    Ok(Outcome {
        status: Status::from_bool(ok),
        summary: format!(
            "gap positive = {positive}, decreasing = {decreasing}, slope = {:.6}, target = {target:.6}, rel = {err:.2e} (tol 5e-2)",
            fit.slope
        ),
        measured: json!({
            "radii": samples.iter().map(|s| s.0).collect::<Vec<_>>(),
            "lambda": samples.iter().map(|s| s.1).collect::<Vec<_>>(),
            "lambda0": p.lambda0,
            "slope": fit.slope,
            "target": target,
            "relative_error": err,
        }),
        notes: Vec::new(),
    })
}

fn c4(_: &mut Ctx) -> Res {
    let table = |refine| -> bbspectra::Result<ModeTable> {
        let p = solve_limit_eigen_refined(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::Weighted, refine)?;
        ModeTable::build(p, 6)
    };
    let a = table(1)?;
    let b = table(2)?;
    let g1 = &a.entries[0].mode;
    let sup_w = a.profile.dw.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let sup_err = g1.g.iter().zip(&a.profile.dw).fold(0.0f64, |m, (g, d)| m.max((g + d).abs())) / sup_w;
    let g_r0: Vec<f64> = a.entries.iter().map(|e| e.mode.g_r0).collect();
    let decreasing = g_r0.windows(2).all(|w| w[1] < w[0]);
    let c_drift = rel(b.coercivity, a.coercivity);
    let ok = sup_err <= 1e-6 && decreasing && a.coercivity > 0.0 && c_drift <= 1e-6;
    Ok(Outcome {
        status: Status::from_bool(ok),
        summary: format!(
            "sup|g1 + w'|/sup|w'| = {sup_err:.2e}, g(r0) decreasing = {decreasing}, C = {:.10}, drift under refinement = {c_drift:.2e}",
            a.coercivity
        ),
        measured: json!({
            "degree_one_sup_error": sup_err,
            "g_r0": g_r0,
            "coercivity": a.coercivity,
            "coercivity_refined": b.coercivity,
            "coercivity_drift": c_drift,
        }),
        notes: Vec::new(),
    })
}

fn planar_grid(ctx: &Ctx) -> usize {
    ctx.grid.unwrap_or(if ctx.quick { 512 } else { 1024 })
}

fn c5(ctx: &mut Ctx) -> Res {
    let grid = planar_grid(ctx);
    let p = limit_profile(Normalization::Weighted)?;
    let table = ModeTable::build(p, 6)?;
    let radius = plane_radius(&table.profile, 8.0);
    let rows = asymmetry_rows(&table, &[2], &[0.02, 0.04, 0.08], radius, grid)?;
    let pred = table.single_mode_ratio(2)?;
    let near = rel(rows[0].record.ratio, pred);
    let in_band = rows.iter().all(|r| r.in_band);
    let unresolved = rows.iter().any(|r| r.record.inconclusive);
    let status = if near <= 0.1 && in_band {
        if unresolved {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    } else {
        // A miss is blamed on resolution when every offending gap agrees
        // with the prediction to within its noise floor.
        let offending = rows
            .iter()
            .enumerate()
            .filter(|(i, r)| !r.in_band || (*i == 0 && near > 0.1));
        if offending.clone().all(|(_, r)| r.within_noise) {
            Status::Inconclusive
        } else {
            Status::Fail
        }
    };
    let mut notes = Vec::new();
    if status == Status::Inconclusive {
        notes.push(format!(
            "gaps not resolved above the noise floor (rasterization noise {:.2e})",
            rows[0].raster_noise
        ));
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.record.ratio).collect();
    Ok(Outcome {
        status,
        summary: format!(
            "grid {grid}, ratios {:?}, prediction {pred:.6}, rel at smallest s = {near:.3e} (tol 0.1), band [{:.4}, {:.4}] held = {in_band}",
            ratios.iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>(),
            rows[0].band_lo,
            rows[0].band_hi
        ),
        measured: json!({
            "grid": grid,
            "radius": radius,
            "prediction": pred,
            "coercivity": table.coercivity,
            "rows": rows,
            "relative_error_smallest": near,
        }),
        notes,
    })
}

fn c6(ctx: &mut Ctx) -> Res {
    let grid = planar_grid(ctx);
    let h_t = 0.25;
    let p = limit_profile(Normalization::Weighted)?;
    // The trace of the mixed case carries products up to degree 8.
    let table = ModeTable::build(p, 10)?;
    let radius = plane_radius(&table.profile, 8.0);
    let amp = 0.08 * table.profile.r0;
    let cases = [
        ("l2", PerturbationSpec::single(2, amp)),
        ("l3", PerturbationSpec::single(3, amp)),
        (
            "mixed",
            PerturbationSpec {
                amplitude: amp,
                terms: vec![
                    Harmonic { k: 2, a: 0.6, b: 0.0 },
                    Harmonic { k: 3, a: 0.0, b: 0.5 },
                    Harmonic { k: 4, a: 0.4, b: 0.3 },
                ],
            },
        ),
    ];
    let mut fine = PlaneSolver::new(radius, grid, 1.0, 1.0, Raster::EqualMeasure)?;
    let mut coarse = PlaneSolver::new(radius, grid / 2, 1.0, 1.0, Raster::EqualMeasure)?;
    let noise = raster_noise(&mut fine)?;
    let mut status = Status::Pass;
    let mut measured = Vec::new();
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (name, spec) in &cases {
        let set = normalize_volume_barycenter(spec)?;
        let pred = set.predicted_second_derivative(&table)?;
        let d: PathDerivatives = fd_derivatives_along_path(&mut fine, &set, h_t)?;
        let dc = fd_derivatives_along_path(&mut coarse, &set, h_t)?;
        let first_ok = d.first.abs() <= 0.05 * d.second.abs() * h_t;
        let second_err = rel(d.second, pred);
        let second_ok = second_err <= 0.1;
        // Below the floor a miss is blamed on resolution, not on the method.
        // Sample noise ν propagates through the five-point stencils.
        let floor_first = (d.first - dc.first).abs().max(1.5 * noise / h_t);
        let floor_second = (d.second - dc.second).abs().max(16.0 / 3.0 * noise / (h_t * h_t));
        let mut s = Status::from_bool(first_ok && second_ok);
        if s == Status::Fail
            && (first_ok || d.first.abs() <= floor_first)
            && (second_ok || (d.second - pred).abs() <= floor_second)
        {
            s = Status::Inconclusive;
            notes.push(format!("{name}: miss within the grid-refinement noise floor"));
        }
        status = status.max(s);
        parts.push(format!("{name}: first {:.2e}, second {:.5} vs {pred:.5} ({second_err:.2e})", d.first, d.second));
        measured.push(json!({
            "case": name,
            "first": d.first,
            "second": d.second,
            "predicted_second": pred,
            "relative_error": second_err,
            "first_bound": 0.05 * d.second.abs() * h_t,
            "coarse_first": dc.first,
            "coarse_second": dc.second,
            "samples": d.samples,
        }));
    }
    Ok(Outcome {
        status,
        summary: format!("grid {grid}, h_t {h_t}: {}", parts.join("; ")),
        measured: json!({ "grid": grid, "h_t": h_t, "radius": radius, "raster_noise": noise, "cases": measured }),
        notes,
    })
}

fn c7(ctx: &mut Ctx) -> Res {
    let grid = if ctx.quick { 128 } else { 256 };
    let spec = DomainSpec::Disk { radius: 1.0 };
    let profile = limit_profile(Normalization::L2)?;
    let eps = 0.25 * spec.area();
    let cross = lambda_finite_ball(2, 1.0, 1.0, 1.0 / eps.sqrt())? / eps;
    let mut inits = vec![("incenter", Init::IncenterBall), ("random-1", Init::RandomSeeded(1))];
    if !ctx.quick {
        inits.push(("random-2", Init::RandomSeeded(2)));
    }
    let mut ok = true;
    let mut runs = Vec::new();
    let mut lams = Vec::new();
    for (name, init) in &inits {
        let run = optimize_point(&spec, 0.25, GridChoice::Cells(grid), init, OptimizeOptions::default(), &profile)?;
        let h = run.domain.spacing();
        let lam = run.opt.solution.lambda;
        let converged = run.opt.trace.status != OptStatus::Maxit;
        let concentric = run.diag.barycenter_distance <= 2.0 * h;
        let err = rel(lam, cross);
        ok &= converged && concentric && err <= 0.01;
        lams.push(lam);
        runs.push(json!({
            "init": name,
            "lambda": lam,
            "relative_error": err,
            "status": format!("{:?}", run.opt.trace.status),
            "iterations": run.opt.trace.records.len(),
            "barycenter_distance": run.diag.barycenter_distance,
            "h": h,
        }));
        ctx.traces.push((format!("disk {name}"), run.opt.trace));
    }
    let lo = lams.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lams.iter().cloned().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    Ok(Outcome {
        status: Status::from_bool(ok),
        summary: format!(
            "grid {grid}, eps = pi/4: lambda {:?} vs cross-check {cross:.6} (tol 1e-2), spread across inits {spread:.2e}",
            lams.iter().map(|l| format!("{l:.6}")).collect::<Vec<_>>()
        ),
        measured: json!({ "grid": grid, "eps": eps, "cross_check": cross, "runs": runs, "spread": spread }),
        notes: Vec::new(),
    })
}

/// Ellipse sweep shared by criteria 8 and 10.
fn ellipse_sweep(quick: bool) -> bbspectra::Result<(Vec<SweepRecord>, Vec<OptimizationTrace>, f64)> {
    let spec = DomainSpec::Ellipse { a: 1.0, b: 0.6 };
    let profile = limit_profile(Normalization::L2)?;
    let cpr = if quick { 24.0 } else { 32.0 };
    let runs = [0.04, 0.02, 0.01, 0.005]
        .par_iter()
        .map(|&f| {
            optimize_point(
                &spec,
                f,
                GridChoice::CellsPerRadius(cpr),
                &Init::IncenterBall,
                OptimizeOptions::default(),
                &profile,
            )
        })
        .collect::<bbspectra::Result<Vec<_>>>()?;
    let records = runs.iter().map(SweepRecord::from_run).collect();
    let traces = runs.into_iter().map(|r| r.opt.trace).collect();
    Ok((records, traces, cpr))
}

/// Non-increasing up to `slack`; strict decreases are those larger than the
/// floor of the later point.
fn trend(values: &[f64], floors: &[f64], slack: f64) -> Status {
    let rises: Vec<usize> = (1..values.len()).filter(|&k| values[k] > values[k - 1] + slack).collect();
    if rises.is_empty() {
        let resolved = (1..values.len()).any(|k| values[k - 1] - values[k] > floors[k]);
        if resolved {
            Status::Pass
        } else {
            Status::Inconclusive
        }
    } else if rises.iter().all(|&k| values[k] <= floors[k] && values[k - 1] <= floors[k - 1]) {
        Status::Inconclusive
    } else {
        Status::Fail
    }
}

fn c8(ctx: &mut Ctx) -> Res {
    let (recs, traces, cpr) = ellipse_sweep(ctx.quick)?;
    for (r, t) in recs.iter().zip(traces) {
        ctx.traces.push((format!("ellipse eps {}", r.eps_frac), t));
    }
    let mut items = BTreeMap::new();
    let connected = recs.iter().all(|r| r.components_4 == 1 && r.components_8 == 1);
    items.insert("one_component", Status::from_bool(connected));
    items.insert("one_maximum", Status::from_bool(recs.iter().all(|r| r.local_maxima == 1)));

    let bary: Vec<f64> = recs.iter().map(|r| r.barycenter_distance).collect();
    let cell: Vec<f64> = recs.iter().map(|r| r.h).collect();
    // Rises smaller than a cell are pixel effects.
    let bary_status = if bary.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
        Status::Pass
    } else if trend(&bary, &cell, 1e-12) == Status::Fail {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    items.insert("barycenter_monotone", bary_status);

    let scaled: Vec<f64> = recs.iter().map(|r| r.scaled_lambda).collect();
    let decreasing = scaled.windows(2).all(|w| w[1] < w[0]);
    let last_ratio = recs.last().map(|r| r.lambda_ratio).unwrap_or(f64::NAN);
    items.insert("scaled_lambda", Status::from_bool(decreasing && (last_ratio - 1.0).abs() <= 0.05));

    let phi_status = if recs.iter().any(|r| r.phi_l2.is_none()) {
        Status::Fail
    } else {
        let phi: Vec<f64> = recs.iter().map(|r| r.phi_l2.unwrap_or(f64::NAN)).collect();
        let floors: Vec<f64> = recs.iter().map(SweepRecord::phi_floor).collect();
        let slack = 1e-12 * phi.iter().cloned().fold(0.0, f64::max);
        trend(&phi, &floors, slack)
    };
    items.insert("phi_monotone", phi_status);

    let status = items.values().cloned().max().unwrap_or(Status::Pass);
    let mut notes = Vec::new();
    if phi_status == Status::Inconclusive {
        notes.push("phi_eps L2 changes stay below the rasterization floor 2h/sqrt(eps)".into());
    }
    let summary = format!(
        "cells per radius {cpr}: components {:?}, maxima {:?}, barycenter {:?}, scaled lambda {:?} (last ratio {last_ratio:.5}), phi L2 {:?}; items {}",
        recs.iter().map(|r| r.components_4).collect::<Vec<_>>(),
        recs.iter().map(|r| r.local_maxima).collect::<Vec<_>>(),
        bary,
        scaled.iter().map(|s| format!("{s:.7}")).collect::<Vec<_>>(),
        recs.iter().map(|r| r.phi_l2.map(|v| format!("{v:.6}"))).collect::<Vec<_>>(),
        items.iter().map(|(k, v)| format!("{k}={}", v.label())).collect::<Vec<_>>().join(" ")
    );
    let measured = json!({
        "cells_per_radius": cpr,
        "items": items,
        "points": recs,
    });
    ctx.sweep = Some(recs);
    Ok(Outcome {
        status,
        summary,
        measured,
        notes,
    })
}

fn c9(ctx: &mut Ctx) -> Res {
    let shapes = [
        DomainSpec::Disk { radius: 1.0 },
        DomainSpec::Ellipse { a: 1.0, b: 0.6 },
        DomainSpec::Stadium { half_length: 0.5, radius: 0.5 },
        DomainSpec::Lshape { size: 1.0 },
    ];
    let extra = shapes
        .par_iter()
        .flat_map_iter(|s| [1u64, 2].into_iter().map(move |seed| (*s, seed)))
        .map(|(s, seed)| {
            let g = s.grid(48)?;
            let eps = 0.1 * g.n_dofs() as f64 * g.cell_volume();
            let o = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(seed), OptimizeOptions::default())?;
            Ok((format!("{s} seed {seed}"), o.trace))
        })
        .collect::<bbspectra::Result<Vec<_>>>()?;
    ctx.traces.extend(extra);
    let mut steps = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for (name, t) in &ctx.traces {
        for w in t.records.windows(2) {
            steps += 1;
            worst = worst.max((w[1].lambda - w[0].lambda) / w[0].lambda);
        }
        if !t.is_monotone() {
            bad.push(name.clone());
        }
    }
    Ok(Outcome {
        status: Status::from_bool(bad.is_empty()),
        summary: format!(
            "{} traces, {steps} steps, largest relative change {worst:.3e}, violations {}",
            ctx.traces.len(),
            bad.len()
        ),
        measured: json!({
            "traces": ctx.traces.len(),
            "steps": steps,
            "largest_relative_change": worst,
            "violating": bad,
        }),
        notes: Vec::new(),
    })
}

fn c10(ctx: &mut Ctx) -> Res {
    if ctx.sweep.is_none() {
        ctx.sweep = Some(ellipse_sweep(true)?.0);
    }
    let recs = ctx.sweep.as_deref().unwrap_or_default();
    let p = limit_profile(Normalization::L2)?;
    let bias = recs.last().map(|r| (r.scaled_lambda - p.lambda0).abs()).unwrap_or(0.0);
    let points: Vec<(f64, f64)> = recs.iter().map(|r| (r.eps, r.lambda)).collect();
    let fit = gap_fit_domain(&points, 2, p.lambda0, 1.0, 0.6, bias);
    let below_floor = recs
        .iter()
        .filter(|r| r.phi_l2.map_or(true, |v| v <= r.phi_floor()))
        .count();

    let mut notes = Vec::new();
    let covering = [3u32, 7, 8];
    let mut status = Status::Pass;
    for id in covering {
        match ctx.results.get(&id) {
            Some(Status::Fail) => status = Status::Fail,
            Some(_) => {}
            None => {
                status = status.max(Status::Inconclusive);
                notes.push(format!("covering criterion {id} not run"));
            }
        }
    }
    let fit_label = match fit.status {
        FitStatus::Fitted => format!("fitted slope {:.4} (target {:.4}, not claimed)", fit.slope, fit.target),
        FitStatus::Inconclusive => format!("inconclusive ({} of {} gaps above the discretization bias)", fit.used.len(), recs.len()),
    };
    Ok(Outcome {
        status,
        summary: format!(
            "ellipse gap rate {fit_label}; optimal-set asymmetry below rasterization floor at {below_floor} of {} points; covering criteria 3, 7, 8: {}",
            recs.len(),
            covering
                .iter()
                .map(|id| ctx.results.get(id).map_or("not run", |s| s.label()))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        measured: json!({
            "gap_fit": fit,
            "discretization_bias": bias,
            "phi_below_floor": below_floor,
            "points": recs.len(),
        }),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rules() {
        let floors = [0.1; 4];
        assert_eq!(trend(&[1.0, 0.8, 0.5, 0.2], &floors, 0.0), Status::Pass);
        assert_eq!(trend(&[0.05, 0.05, 0.05, 0.05], &floors, 0.0), Status::Inconclusive);
        assert_eq!(trend(&[0.05, 0.06, 0.04, 0.05], &floors, 0.0), Status::Inconclusive);
        assert_eq!(trend(&[1.0, 1.5, 0.5, 0.2], &floors, 0.0), Status::Fail);
    }

    #[test]
    fn strict_mode_counts_inconclusive() {
        let r = BatteryReport {
            quick: true,
            criteria: Vec::new(),
            passed: 3,
            inconclusive: 1,
            failed: 0,
        };
        assert!(r.ok(false));
        assert!(!r.ok(true));
    }

    #[test]
    fn fast_criteria_pass() {
        let opts = BatteryOptions {
            only: vec![1, 2, 3, 4],
            ..BatteryOptions::default()
        };
        let mut lines = Vec::new();
        let report = run_battery(&opts, |r| lines.push(r.line()));
        assert_eq!(lines.len(), 4);
        assert_eq!(report.passed, 4, "{lines:#?}");
    }
}
