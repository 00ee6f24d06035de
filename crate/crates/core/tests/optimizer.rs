use std::f64::consts::PI;

use bbspectra::domain::{incenter_field, DomainSpec};
use bbspectra::optimizer::*;
use bbspectra::radial::{lambda_finite_ball, solve_limit_eigen, unit_ball_radius, DEFAULT_TOL};
use bbspectra::spectral::{
    assemble_stiffness, assemble_weight_mass, principal_eigenvalue, BangBangWeight, Normalization,
};
use bbspectra::Error;

fn disk(cells: usize) -> bbspectra::grid::GridDomain {
    DomainSpec::Disk { radius: 1.0 }.grid(cells).unwrap()
}

#[test]
fn disk_optimum_is_the_concentric_ball() {
    let g = disk(128);
    let h = g.spacing();
    let eps = 0.25 * PI;
    let o = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(7), OptimizeOptions::default()).unwrap();
    assert!(o.trace.is_monotone());
    assert_eq!(o.trace.status, Status::FixedPoint);

    let b = barycenter(&g, &o.favorable);
    assert!(b[0].hypot(b[1]) <= 2.0 * h, "{b:?}");
    let n = o.favorable.iter().filter(|&&f| f).count();
    let rb = (eps / PI).sqrt();
    let ball: Vec<bool> = (0..g.n_dofs())
        .map(|d| {
            let x = g.dof_center(d);
            x[0].hypot(x[1]) < rb
        })
        .collect();
    let agree = ball.iter().zip(&o.favorable).filter(|(a, b)| a == b).count();
    assert!(agree as f64 >= 0.95 * g.n_dofs() as f64);
    let overlap = ball.iter().zip(&o.favorable).filter(|(a, b)| **a && **b).count();
    assert!(overlap as f64 >= 0.95 * n as f64, "{overlap} of {n}");

    // ε^{2/N} λ_ε = Λ(d* ε^{−1/N}) for the disk.
    let scaled = eps * o.solution.lambda;
    let lam_r = lambda_finite_ball(2, 1.0, 1.0, 1.0 / eps.sqrt()).unwrap();
    assert!((scaled / lam_r - 1.0).abs() < 0.01, "{scaled} vs {lam_r}");
}

#[test]
fn random_inits_reach_nearly_the_same_value_on_the_disk() {
    let g = disk(96);
    let eps = 0.2 * PI;
    let lams: Vec<f64> = (1..=4)
        .map(|seed| {
            let o = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(seed), OptimizeOptions::default())
                .unwrap();
            assert!(o.trace.is_monotone());
            let b = barycenter(&g, &o.favorable);
            assert!(b[0].hypot(b[1]) <= 2.0 * g.spacing(), "seed {seed}: {b:?}");
            o.solution.lambda
        })
        .collect();
    let lo = lams.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lams.iter().cloned().fold(0.0, f64::max);
    // Distinct discrete fixed points differ at the pixel level only.
    assert!(hi / lo - 1.0 < 5e-5, "{lams:?}");
}

#[test]
fn full_measure_makes_everything_favorable() {
    let g = DomainSpec::Ellipse { a: 1.0, b: 0.6 }.grid(48).unwrap();
    let vol = g.n_dofs() as f64 * g.cell_volume();
    let o = rearrangement_optimize(&g, vol, 2.0, 1.0, &Init::IncenterBall, OptimizeOptions::default()).unwrap();
    assert!(o.favorable.iter().all(|&f| f));
    let k = assemble_stiffness(&g).unwrap();
    let w = BangBangWeight::from_dof_mask(&g, 2.0, 1.0, vec![true; g.n_dofs()]);
    let m = assemble_weight_mass(&g, &w).unwrap();
    let direct = principal_eigenvalue(&k, &m, 1e-10, 50_000).unwrap();
    assert!((o.solution.lambda / direct.lambda - 1.0).abs() < 1e-9);
}

#[test]
fn tiny_epsilon_and_bad_masks_are_rejected() {
    let g = disk(32);
    let err = rearrangement_optimize(&g, 1e-6, 1.0, 1.0, &Init::IncenterBall, OptimizeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::EpsilonBelowResolution(_)), "{err:?}");
    assert!(rearrangement_optimize(&g, 10.0, 1.0, 1.0, &Init::IncenterBall, OptimizeOptions::default()).is_err());
    let wrong = Init::Mask(vec![true; g.n_dofs()]);
    assert!(rearrangement_optimize(&g, 0.3, 1.0, 1.0, &wrong, OptimizeOptions::default()).is_err());
}

#[test]
fn maxit_is_reported() {
    let g = disk(64);
    let o = rearrangement_optimize(&g, 0.3, 1.0, 1.0, &Init::RandomSeeded(3), OptimizeOptions { tol: 0.0, maxit: 2, translate: false }).unwrap();
    assert_eq!(o.trace.records.len(), 2);
    assert_eq!(o.trace.status, Status::Maxit);
}

#[test]
fn rasterized_disk_parametrization_is_within_two_cells() {
    let g = disk(256);
    let h = g.spacing();
    let eps = 0.05 * PI;
    let n = (eps / g.cell_volume()).round() as usize;
    let key: Vec<f64> = (0..g.n_dofs())
        .map(|d| {
            let x = g.dof_center(d);
            -x[0].hypot(x[1])
        })
        .collect();
    let fav = top_cells(&key, n);
    let p = extract_polar_parametrization(&g, &fav, eps, [0.0, 0.0], 360).unwrap();
    assert!(p.sup <= 2.0 * h / eps.sqrt(), "{} > {}", p.sup, 2.0 * h / eps.sqrt());
    assert_eq!(p.phi.len(), 360);
    let expect = (p.phi.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / 360.0).sqrt();
    assert!((p.l2 - expect).abs() < 1e-14);
}

#[test]
fn parametrization_flags_bad_sets() {
    let g = disk(96);
    let eps = 0.3;
    // C-shaped set: an annulus sector with a notch.
    let fav: Vec<bool> = (0..g.n_dofs())
        .map(|d| {
            let x = g.dof_center(d);
            let r = x[0].hypot(x[1]);
            let th = x[1].atan2(x[0]);
            (r < 0.2) || (r > 0.4 && r < 0.6 && th.abs() > 0.5)
        })
        .collect();
    let err = extract_polar_parametrization(&g, &fav, eps, [0.0, 0.0], 180).unwrap_err();
    assert!(matches!(err, Error::NotStarShaped { rays } if rays > 0), "{err:?}");
    let err = extract_polar_parametrization(&g, &fav, eps, [0.3, 0.0], 180).unwrap_err();
    assert_eq!(err, Error::CenterOutside);
}

#[test]
fn diagnostics_on_a_small_disk_set() {
    let g = disk(256);
    let vol = g.n_dofs() as f64 * g.cell_volume();
    let eps = 0.01 * vol;
    let o = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::IncenterBall, OptimizeOptions::default()).unwrap();
    let p = solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::L2).unwrap();
    let d = diagnostics(&g, &o.favorable, &o.solution, eps, &[[0.0, 0.0]], Some(p.lambda0));
    assert_eq!(d.components_4, 1);
    assert_eq!(d.components_8, 1);
    assert_eq!(d.local_maxima, 1);
    assert!(d.max_point_distance <= g.spacing());
    assert!((d.lambda_ratio.unwrap() - 1.0).abs() < 0.05);
    assert!(d.alpha > 0.0 && d.alpha < o.solution.u.iter().cloned().fold(0.0, f64::max));

    let cmp = blowup_compare(&g, &o.solution, eps, &p).unwrap();
    assert!(!cmp.out_of_regime);
    assert!(cmp.sup_relative <= 0.1, "{cmp:?}");

    let big = rearrangement_optimize(&g, 0.6 * vol, 1.0, 1.0, &Init::IncenterBall, OptimizeOptions::default()).unwrap();
    assert!(blowup_compare(&g, &big.solution, 0.6 * vol, &p).unwrap().out_of_regime);
}

#[test]
fn incenter_ball_init_is_centered() {
    let g = DomainSpec::Rectangle { width: 2.0, height: 1.0 }.grid(64).unwrap();
    let f = incenter_field(&g).unwrap();
    assert!(f.argmax.len() > 2);
    let o = rearrangement_optimize(&g, 0.05, 1.0, 1.0, &Init::IncenterBall, OptimizeOptions { tol: 0.0, maxit: 1, translate: false }).unwrap();
    let b = barycenter(&g, &o.favorable);
    assert!(b[0].abs() <= g.spacing() && b[1].abs() <= g.spacing(), "{b:?}");
    let r0 = unit_ball_radius(2);
    assert!(r0 > 0.5);
}
