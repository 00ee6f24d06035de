use bbspectra::modes::{
    coercivity_constant, jump, laplace_beltrami_eigenvalue, predicted_second_derivative, solve_mode,
    sturm_identity, ModeTable,
};
use bbspectra::radial::{solve_limit_eigen, solve_limit_eigen_refined, DEFAULT_TOL};
use bbspectra::spectral::Normalization;

fn table(dim: usize, mbar: f64, refine: usize) -> ModeTable {
    let p = solve_limit_eigen_refined(dim, mbar, 1.0, None, DEFAULT_TOL, Normalization::Weighted, refine).unwrap();
    ModeTable::build(p, 10).unwrap()
}

#[test]
fn degree_one_mode_is_minus_w_prime() {
    for dim in [2, 3] {
        let t = table(dim, 1.0, 1);
        let g = &t.entries[0].mode;
        let p = &t.profile;
        let sup_w = p.dw.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let err = g.g.iter().zip(&p.dw).fold(0.0f64, |a, (g, d)| a.max((g + d).abs()));
        assert!(err / sup_w <= 1e-6, "dim {dim}: {}", err / sup_w);
        // −w' carries the jump −[w''] = λ̃₀(m̄+m̲)w(r₀).
        assert!(((g.dg_inner - g.dg_outer) - jump(p)).abs() < 1e-10 * jump(p));
    }
}

#[test]
fn mode_values_decrease_and_stay_nonnegative() {
    let t = table(2, 1.0, 1);
    for pair in t.entries.windows(2) {
        assert!(pair[0].mode.g_r0 - pair[1].mode.g_r0 > 1e-8);
    }
    for e in &t.entries {
        let sup = e.mode.g.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(e.mode.g.iter().all(|&v| v >= -1e-10 * sup));
    }
    assert!(t.g_r0(10).unwrap() < t.g_r0(2).unwrap());
}

#[test]
fn coercivity_positive_and_resolution_independent() {
    let a = table(2, 1.0, 1);
    let b = table(2, 1.0, 2);
    assert!(a.coercivity > 0.0);
    assert!((a.coercivity - b.coercivity).abs() / a.coercivity < 1e-6);
    assert_eq!(coercivity_constant(&a).unwrap(), a.coercivity);
    let c = table(2, 2.0, 1);
    assert!(c.coercivity > 0.0 && c.coercivity != a.coercivity);
}

#[test]
fn sturm_identity_holds() {
    for dim in [2, 3] {
        let t = table(dim, 1.0, 1);
        for (h, k) in [(1, 2), (2, 3), (1, 5)] {
            let (lhs, rhs) = sturm_identity(&t, h, k).unwrap();
            let scale = (t.profile.r0.powi(dim as i32 - 1) * t.jump * t.g_r0(h).unwrap()).abs();
            assert!((lhs - rhs).abs() <= 1e-6 * scale, "dim {dim} ({h},{k}): {lhs} vs {rhs}");
        }
    }
}

#[test]
fn predicted_second_derivative_cases() {
    let t = table(2, 1.0, 1);
    assert_eq!(predicted_second_derivative(&[(1, 0.7), (1, -0.2)], &t).unwrap(), 0.0);
    assert_eq!(predicted_second_derivative(&[], &t).unwrap(), 0.0);
    let direct = 2.0 * t.jump * (t.g_r0(1).unwrap() - t.g_r0(2).unwrap());
    assert!((predicted_second_derivative(&[(2, 1.0)], &t).unwrap() - direct).abs() < 1e-14 * direct);
    assert!(predicted_second_derivative(&[(11, 1.0)], &t).is_err());
}

#[test]
fn unweighted_profile_rejected() {
    let p = solve_limit_eigen(2, 1.0, 1.0, None, DEFAULT_TOL, Normalization::L2).unwrap();
    assert!(solve_mode(&p, laplace_beltrami_eigenvalue(2, 2)).is_err());
    let p = p.normalized(Normalization::Weighted).unwrap();
    assert!(ModeTable::build(p, 1).is_err());
}
