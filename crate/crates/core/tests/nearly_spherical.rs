use std::f64::consts::PI;

use bbspectra::modes::ModeTable;
use bbspectra::nearly_spherical::*;
use bbspectra::radial::{decay_length, solve_limit_eigen, unit_ball_radius, DEFAULT_TOL};
use bbspectra::spectral::Normalization;
use bbspectra::Error;

fn r0() -> f64 {
    unit_ball_radius(2)
}

#[test]
fn constant_mode_follows_series() {
    for frac in [0.02, 0.04, 0.08] {
        let s = frac * r0();
        let set = normalize_volume_barycenter(&PerturbationSpec::single(2, s)).unwrap();
        let series = -s * s / (4.0 * r0()) - s.powi(4) / (32.0 * r0().powi(3));
        assert!((set.c0 - series).abs() < 1e-6 * s * s, "{} vs {series}", set.c0);
        // Even modes carry no first moment.
        assert!(set.a1.abs() < 1e-15 && set.b1.abs() < 1e-15);
    }
}

#[test]
fn odd_single_mode_needs_no_translation() {
    let spec = PerturbationSpec {
        amplitude: 0.05 * r0(),
        terms: vec![Harmonic { k: 3, a: 0.0, b: 1.0 }],
    };
    let set = normalize_volume_barycenter(&spec).unwrap();
    assert!(set.a1.abs() < 1e-14 && set.b1.abs() < 1e-14, "{} {}", set.a1, set.b1);
}

#[test]
fn mixed_modes_are_normalized() {
    let spec = PerturbationSpec {
        amplitude: 0.08 * r0(),
        terms: vec![
            Harmonic { k: 2, a: 0.6, b: 0.0 },
            Harmonic { k: 3, a: 0.0, b: 0.5 },
            Harmonic { k: 4, a: 0.4, b: 0.3 },
        ],
    };
    let set = normalize_volume_barycenter(&spec).unwrap();
    assert!(set.volume_residual().abs() <= 1e-10);
    let m = set.first_moment();
    assert!(m[0].hypot(m[1]) <= 1e-10);
    // Products of neighboring degrees feed the degree-1 correction.
    assert!(set.a1.hypot(set.b1) > 0.0);
    assert!(set.sweeps >= 1 && set.sweeps <= 20);
}

#[test]
fn oversized_perturbation_is_rejected() {
    let err = normalize_volume_barycenter(&PerturbationSpec::single(2, 0.6 * r0())).unwrap_err();
    assert!(matches!(err, Error::DeformationTooLarge(_)), "{err:?}");
}

#[test]
fn vector_field_is_divergence_free_with_matching_trace() {
    let set = normalize_volume_barycenter(&PerturbationSpec::single(3, 0.05 * r0())).unwrap();
    let m = 64;
    let trace = set.normal_trace(m);
    for (i, &tr) in trace.iter().enumerate() {
        let th = 2.0 * PI * i as f64 / m as f64;
        // ρ X_ρ is independent of ρ, so (1/ρ)∂_ρ(ρ X_ρ) = 0.
        let flux: Vec<f64> = [0.3, 0.5, 0.9]
            .iter()
            .map(|&rho| rho * set.vector_field_x(rho, th).unwrap())
            .collect();
        assert!((flux[0] - flux[1]).abs() < 1e-15 && (flux[1] - flux[2]).abs() < 1e-15);
        let x_at_r0 = set.vector_field_x(set.r0, th).unwrap();
        assert!((x_at_r0 - tr).abs() < 1e-15);
    }
    assert!(set.vector_field_x(0.0, 0.0).is_err());
}

#[test]
fn deformation_preserves_measure_and_hits_boundary() {
    let spec = PerturbationSpec {
        amplitude: 0.1 * r0(),
        terms: vec![Harmonic { k: 2, a: 1.0, b: 0.0 }, Harmonic { k: 5, a: 0.0, b: 0.7 }],
    };
    let set = normalize_volume_barycenter(&spec).unwrap();
    let n = 8192;
    for t in [-0.5, 0.5, 1.0] {
        let area: f64 = (0..n)
            .map(|i| set.path_radius(t, 2.0 * PI * i as f64 / n as f64).unwrap().powi(2))
            .sum::<f64>()
            * PI
            / n as f64;
        assert!((area - 1.0).abs() < 1e-8, "t = {t}: {area}");
    }
    for i in 0..16 {
        let th = 2.0 * PI * i as f64 / 16.0;
        let x = [set.r0 * th.cos(), set.r0 * th.sin()];
        assert_eq!(set.deformation_map(0.0, x).unwrap(), x);
        let y = set.deformation_map(1.0, x).unwrap();
        assert!((y[0].hypot(y[1]) - set.boundary_radius(th)).abs() < 1e-14);
        // Far from ∂B the map is the identity.
        let far = [0.2 * th.cos(), 0.2 * th.sin()];
        assert_eq!(set.deformation_map(0.7, far).unwrap(), far);
    }
    assert!(set.deformation_map(1.5, [0.5, 0.0]).is_err());
}

#[test]
fn coefficients_satisfy_parseval() {
    let r = r0();
    let m = 256;
    let trace: Vec<f64> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            0.3 + (t).cos() - 0.5 * (3.0 * t).sin() + 0.25 * (7.0 * t).cos()
        })
        .collect();
    let c = spherical_coefficients(&trace, r);
    let norm_sq = r * trace.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / m as f64;
    assert!((c.sum_sq() - norm_sq).abs() < 1e-12 * norm_sq);

    let cos1: Vec<f64> = (0..m).map(|i| (2.0 * PI * i as f64 / m as f64).cos()).collect();
    let c1 = spherical_coefficients(&cos1, r);
    assert!((c1.a[0] - (PI * r).sqrt()).abs() < 1e-13);
    let others: f64 = c1.sum_sq() - c1.a[0] * c1.a[0];
    assert!(others.abs() < 1e-24);
}

#[test]
fn measures_of_a_single_mode() {
    let s = 0.04 * r0();
    let set = NearlySphericalSet::raw(0.0, 0.0, 0.0, vec![Harmonic { k: 2, a: s, b: 0.0 }]);
    let m = set.measures();
    assert!((m.l2_sq_sphere - PI * s * s).abs() < 1e-15);
    assert!((m.l2_sq_boundary - r0() * PI * s * s).abs() < 1e-15);
    assert!((m.sup - s).abs() < 1e-15);
    assert!((m.c1 - 2.0 * s).abs() < 1e-15);
}

#[test]
fn translation_mode_has_no_second_derivative() {
    let p = solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::Weighted).unwrap();
    let table = ModeTable::build(p, 4).unwrap();
    let s = 0.01 * r0();
    let shifted = NearlySphericalSet::raw(-s * s / (4.0 * r0()), s, 0.0, Vec::new());
    let pred = shifted.predicted_second_derivative(&table).unwrap();
    let scale = table.coercivity * PI * r0() * s * s;
    assert!(pred.abs() < 1e-3 * scale, "{pred} vs {scale}");

    let bent = normalize_volume_barycenter(&PerturbationSpec::single(2, s)).unwrap();
    let pred2 = bent.predicted_second_derivative(&table).unwrap();
    // c₂² = π r₀ s², so λ̈ ≈ C π r₀ s².
    assert!((pred2 / scale - 1.0).abs() < 1e-2, "{pred2} vs {scale}");
}

#[test]
fn ball_against_itself_has_zero_gap() {
    let p = solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::Weighted).unwrap();
    let big = p.r0 + 4.0 * decay_length(p.lambda0, 1.0);
    let rec = asymmetry_ratio(&NearlySphericalSet::ball(), big, 64, 1.0, 1.0).unwrap();
    assert_eq!(rec.gap, 0.0);
    assert_eq!(rec.ratio, 0.0);
}

#[test]
fn coarse_grid_sees_a_positive_gap_and_small_translation_effect() {
    let p = solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::Weighted).unwrap();
    let big = p.r0 + 6.0 * decay_length(p.lambda0, 1.0);
    let mut ps = PlaneSolver::new(big, 192, 1.0, 1.0, Raster::EqualMeasure).unwrap();
    let set = normalize_volume_barycenter(&PerturbationSpec::single(2, 0.1 * r0())).unwrap();
    let pair = plane_pair(&mut ps, &set).unwrap();
    assert!(pair.lambda_a > pair.lambda_b, "{pair:?}");

    let moved = ps.lambda_of_ball([0.5 * ps.spacing(), 0.0]).unwrap();
    let gap = pair.lambda_a - pair.lambda_b;
    assert!((moved - pair.lambda_b).abs() < 0.5 * gap, "{moved} {}", pair.lambda_b);
}

#[test]
fn path_derivative_step_is_checked() {
    let mut ps = PlaneSolver::new(2.0, 32, 1.0, 1.0, Raster::EqualMeasure).unwrap();
    let set = NearlySphericalSet::ball();
    assert!(fd_derivatives_along_path(&mut ps, &set, 0.01).is_err());
    assert!(fd_derivatives_along_path(&mut ps, &set, 0.5).is_err());
}

#[test]
fn raster_noise_shrinks_under_refinement() {
    let noise = |cells| {
        let mut ps = PlaneSolver::new(2.0, cells, 1.0, 1.0, Raster::EqualMeasure).unwrap();
        raster_noise(&mut ps).unwrap()
    };
    let coarse = noise(48);
    let fine = noise(192);
    assert!(fine.is_finite() && coarse.is_finite());
    assert!(fine < coarse, "{fine} vs {coarse}");
}
