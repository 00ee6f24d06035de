//! One function per subcommand. Each writes its files through [`Output`] and
//! returns a short JSON summary for the manifest.

use bbspectra::io::{Cell, CsvTable};
use bbspectra::modes::ModeTable;
use bbspectra::optimizer::{Init, OptimizeOptions};
use bbspectra::radial::{decay_length, decay_rate, solve_limit_eigen, RadialProfile, DEFAULT_TOL};
use bbspectra::spectral::Normalization;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::battery::{run_battery, BatteryOptions};
use crate::config::{InitKind, RunConfig};
use crate::experiments::{asymmetry_rows, optimize_point, plane_radius, GridChoice, OptimizeRun, SweepRecord};
use crate::output::Output;

/// Errors after validation: numerical failures and I/O. Exit code 1.
#[derive(Debug)]
pub enum RunError {
    Numeric(bbspectra::Error),
    Io(String),
    /// The acceptance battery reported failures (or, when strict,
    /// inconclusive items). Carries the run summary.
    Verify(Value),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Io(e) => f.write_str(e),
            RunError::Verify(_) => f.write_str("acceptance battery did not pass"),
        }
    }
}

impl From<bbspectra::Error> for RunError {
    fn from(e: bbspectra::Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<String> for RunError {
    fn from(e: String) -> Self {
        RunError::Io(e)
    }
}

pub type CmdResult = Result<Value, RunError>;

fn profile(cfg: &RunConfig, norm: Normalization) -> bbspectra::Result<RadialProfile> {
    solve_limit_eigen(cfg.dim, cfg.mbar, cfg.munder, cfg.radius, cfg.tol.unwrap_or(DEFAULT_TOL), norm)
}

pub fn limit(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = profile(cfg, Normalization::L2)?;
    out.csv_text("profile.csv", &p.to_csv())?;
    let summary = json!({
        "dim": p.dim,
        "mbar": p.mbar,
        "munder": p.munder,
        "r0": p.r0,
        "radius": p.radius,
        "truncated": cfg.radius.is_some(),
        "lambda0": p.lambda0,
        "w_r0": p.w_at_r0(),
        "decay_length": decay_length(p.lambda0, p.munder),
        "decay_rate": decay_rate(&p).ok(),
        "matching_defect": p.matching_defect,
        "normalization": p.normalization,
        "nodes": p.r.len(),
    });
    out.json("limit.json", &summary)?;
    println!("lambda0 = {}", bbspectra::io::fmt17(p.lambda0));
    Ok(summary)
}

fn mode_table(cfg: &RunConfig, lmax: usize) -> bbspectra::Result<ModeTable> {
    ModeTable::build(profile(cfg, Normalization::Weighted)?, lmax)
}

pub fn modes(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let t = mode_table(cfg, cfg.lmax)?;
    let mut csv = CsvTable::new(&["degree", "sigma", "g_r0", "single_mode_ratio"]);
    let mut rows = Vec::new();
    for row in t.summary() {
        let ratio = if row.degree >= 2 {
            Some(t.single_mode_ratio(row.degree)?)
        } else {
            None
        };
        csv.push(vec![
            row.degree.into(),
            row.sigma.into(),
            row.g_r0.into(),
            ratio.map_or(Cell::S(String::new()), Cell::F),
        ]);
        rows.push(json!({ "degree": row.degree, "sigma": row.sigma, "g_r0": row.g_r0, "single_mode_ratio": ratio }));
    }
    out.csv("modes.csv", &csv)?;
    let summary = json!({
        "dim": t.dim,
        "lambda0": t.profile.lambda0,
        "jump": t.jump,
        "coercivity": t.coercivity,
        "modes": rows,
    });
    out.json("modes.json", &summary)?;
    println!("coercivity C = {}", bbspectra::io::fmt17(t.coercivity));
    Ok(summary)
}

pub fn asymmetry(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let lmax = cfg.lmax.max(6).max(cfg.modes.iter().copied().max().unwrap_or(2));
    let table = mode_table(cfg, lmax)?;
    let radius = cfg.radius.unwrap_or_else(|| plane_radius(&table.profile, cfg.decay_lengths));
    let grid = cfg.grid.unwrap_or(512);
    let rows = asymmetry_rows(&table, &cfg.modes, &cfg.amps, radius, grid)?;
    let mut csv = CsvTable::new(&[
        "mode", "amp_frac", "s", "lambda_a", "lambda_b", "gap", "phi_l2_sq", "ratio", "predicted_ratio",
        "band_lo", "band_hi", "in_band", "noise_floor", "inconclusive",
    ]);
    for r in &rows {
        let a = &r.record;
        csv.push(vec![
            r.mode.into(),
            r.amp_frac.into(),
            r.s.into(),
            a.lambda_a.into(),
            a.lambda_b.into(),
            a.gap.into(),
            a.phi_l2_sq.into(),
            a.ratio.into(),
            r.predicted_ratio.into(),
            r.band_lo.into(),
            r.band_hi.into(),
            r.in_band.into(),
            a.noise_floor.into(),
            a.inconclusive.into(),
        ]);
        println!(
            "mode {} amp {}: gap {:.6e}, ratio {:.6} (predicted {:.6})",
            r.mode, r.amp_frac, a.gap, a.ratio, r.predicted_ratio
        );
    }
    out.csv("asymmetry.csv", &csv)?;
    let summary = json!({
        "grid": grid,
        "radius": radius,
        "coercivity": table.coercivity,
        "records": rows,
    });
    out.json("asymmetry.json", &summary)?;
    Ok(summary)
}

fn init(cfg: &RunConfig) -> Init {
    match cfg.init {
        InitKind::Incenter => Init::IncenterBall,
        InitKind::Random => Init::RandomSeeded(cfg.seed),
    }
}

fn optimize_options(cfg: &RunConfig) -> OptimizeOptions {
    OptimizeOptions {
        tol: cfg.tol.unwrap_or(OptimizeOptions::default().tol),
        maxit: cfg.maxit,
        ..OptimizeOptions::default()
    }
}

fn planar_profile(cfg: &RunConfig) -> bbspectra::Result<RadialProfile> {
    solve_limit_eigen(2, cfg.mbar, cfg.munder, None, DEFAULT_TOL, Normalization::L2)
}

fn sweep_csv(records: &[SweepRecord]) -> CsvTable {
    let mut csv = CsvTable::new(&[
        "eps_frac", "eps", "h", "n_dofs", "favorable_cells", "lambda", "scaled_lambda", "lambda_ratio",
        "components_4", "components_8", "local_maxima", "barycenter_distance", "max_point_distance", "phi_l2",
        "phi_sup", "blowup_sup_relative", "out_of_regime", "alpha", "iterations", "status", "monotone",
    ]);
    let opt = |v: Option<f64>| v.map_or(Cell::S(String::new()), Cell::F);
    for r in records {
        csv.push(vec![
            r.eps_frac.into(),
            r.eps.into(),
            r.h.into(),
            r.n_dofs.into(),
            r.favorable_cells.into(),
            r.lambda.into(),
            r.scaled_lambda.into(),
            r.lambda_ratio.into(),
            r.components_4.into(),
            r.components_8.into(),
            r.local_maxima.into(),
            r.barycenter_distance.into(),
            r.max_point_distance.into(),
            opt(r.phi_l2),
            opt(r.phi_sup),
            opt(r.blowup_sup_relative),
            r.out_of_regime.map_or(Cell::S(String::new()), Cell::from),
            r.alpha.into(),
            r.iterations.into(),
            r.status.clone().into(),
            r.monotone.into(),
        ]);
    }
    csv
}

fn trace_csv(run: &OptimizeRun) -> CsvTable {
    let mut csv = CsvTable::new(&["iteration", "lambda", "count", "changed"]);
    for (i, r) in run.opt.trace.records.iter().enumerate() {
        csv.push(vec![i.into(), r.lambda.into(), r.count.into(), r.changed.into()]);
    }
    csv
}

pub fn optimize(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let spec = cfg.domain.expect("validated");
    let prof = planar_profile(cfg)?;
    let choice = GridChoice::Cells(cfg.grid.unwrap_or(256));
    let run = optimize_point(&spec, cfg.eps[0], choice, &init(cfg), optimize_options(cfg), &prof)?;
    let rec = SweepRecord::from_run(&run);
    out.mask_pgm("mask.pgm", &run.domain, &run.opt.favorable)?;
    out.mask_rle("mask.rle.json", &run.domain, &run.opt.favorable)?;
    out.csv("trace.csv", &trace_csv(&run))?;
    if let Ok(p) = &run.polar {
        let mut csv = CsvTable::new(&["theta", "rho", "phi"]);
        for i in 0..p.theta.len() {
            csv.push(vec![p.theta[i].into(), p.rho[i].into(), p.phi[i].into()]);
        }
        out.csv("polar.csv", &csv)?;
    }
    let summary = json!({
        "domain": spec,
        "record": rec,
        "diagnostics": run.diag,
        "blowup": run.blowup,
        "polar_c1": run.polar.as_ref().ok().map(|p| p.c1),
    });
    out.json("diagnostics.json", &summary)?;
    println!(
        "lambda = {}, components = {}, local maxima = {}, barycenter distance = {:.3e}",
        bbspectra::io::fmt17(rec.lambda),
        rec.components_4,
        rec.local_maxima,
        rec.barycenter_distance
    );
    Ok(summary)
}

pub fn sweep(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let spec = cfg.domain.expect("validated");
    let prof = planar_profile(cfg)?;
    let choice = match cfg.grid {
        Some(n) => GridChoice::Cells(n),
        None => GridChoice::CellsPerRadius(cfg.cells_per_radius),
    };
    let (init, opts) = (init(cfg), optimize_options(cfg));
    // Each point owns its grid and solver; collect keeps input order.
    let runs = cfg
        .eps
        .par_iter()
        .map(|&f| optimize_point(&spec, f, choice, &init, opts, &prof))
        .collect::<bbspectra::Result<Vec<_>>>()?;
    let records: Vec<SweepRecord> = runs.iter().map(SweepRecord::from_run).collect();
    for (i, run) in runs.iter().enumerate() {
        out.mask_pgm(&format!("mask_{i:02}.pgm"), &run.domain, &run.opt.favorable)?;
    }
    out.csv("sweep.csv", &sweep_csv(&records))?;
    for r in &records {
        println!(
            "eps {}: scaled lambda {:.10}, ratio {:.6}, components {}, maxima {}",
            r.eps_frac, r.scaled_lambda, r.lambda_ratio, r.components_4, r.local_maxima
        );
    }
    let scaled_decreasing = records.windows(2).all(|w| w[1].scaled_lambda < w[0].scaled_lambda);
    let summary = json!({
        "domain": spec,
        "grid": choice,
        "lambda0": prof.lambda0,
        "scaled_lambda_decreasing": scaled_decreasing,
        "points": records,
    });
    out.json("sweep.json", &summary)?;
    Ok(summary)
}

pub fn verify(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let opts = BatteryOptions {
        quick: cfg.quick,
        only: cfg.only.clone(),
        grid: cfg.grid,
    };
    let report = run_battery(&opts, |r| println!("{}", r.line()));
    println!(
        "{} passed, {} inconclusive, {} failed",
        report.passed, report.inconclusive, report.failed
    );
    out.json("report.json", &report)?;
    let summary = json!({
        "passed": report.passed,
        "inconclusive": report.inconclusive,
        "failed": report.failed,
        "strict": cfg.strict,
    });
    if report.ok(cfg.strict) {
        Ok(summary)
    } else {
        Err(RunError::Verify(summary))
    }
}
