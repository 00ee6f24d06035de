use proptest::prelude::*;

use bbspectra::domain::DomainSpec;
use bbspectra::grid::GridDomain;
use bbspectra::io::{fmt17, RunLengthMask};
use bbspectra::modes::ModeTable;
use bbspectra::optimizer::{rearrangement_optimize, top_cells, Init, OptimizeOptions};
use bbspectra::radial::{lambda_finite_ball, solve_limit_eigen, DEFAULT_TOL};
use bbspectra::spectral::{
    assemble_stiffness, assemble_weight_mass, principal_eigenvalue, BangBangWeight, GridEigenSolver,
    Normalization,
};

fn rect(nx: usize, ny: usize) -> GridDomain {
    GridDomain::from_predicate(2, 1.0 / nx.max(ny) as f64, &[0.0, 0.0], &[nx, ny], |_| true).unwrap()
}

fn mask_from_bits(n: usize, bits: &[bool]) -> Vec<bool> {
    let mut m: Vec<bool> = (0..n).map(|i| bits[i % bits.len()]).collect();
    if !m.iter().any(|&b| b) {
        m[n / 2] = true;
    }
    m
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / (na * nb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_the_weight_divides_lambda(
        nx in 4usize..12, ny in 4usize..12,
        bits in prop::collection::vec(any::<bool>(), 7),
        c in 0.1f64..10.0,
    ) {
        let g = rect(nx, ny);
        let k = assemble_stiffness(&g).unwrap();
        let w = BangBangWeight::from_dof_mask(&g, 1.5, 0.7, mask_from_bits(g.n_dofs(), &bits));
        let m = assemble_weight_mass(&g, &w).unwrap();
        let mc: Vec<f64> = m.iter().map(|v| c * v).collect();
        let a = principal_eigenvalue(&k, &m, 1e-12, 50_000).unwrap();
        let b = principal_eigenvalue(&k, &mc, 1e-12, 50_000).unwrap();
        prop_assert!((b.lambda * c / a.lambda - 1.0).abs() < 1e-9, "{} {}", a.lambda, b.lambda);
        prop_assert!(1.0 - cosine(&a.u, &b.u) <= 1e-10);
    }

    #[test]
    fn eigenfunction_is_positive_with_small_residual(
        nx in 4usize..14, ny in 4usize..14,
        bits in prop::collection::vec(any::<bool>(), 5),
        mbar in 0.2f64..5.0, munder in 0.2f64..5.0,
    ) {
        let g = rect(nx, ny);
        let k = assemble_stiffness(&g).unwrap();
        let w = BangBangWeight::from_dof_mask(&g, mbar, munder, mask_from_bits(g.n_dofs(), &bits));
        let m = assemble_weight_mass(&g, &w).unwrap();
        let s = principal_eigenvalue(&k, &m, 1e-10, 50_000).unwrap();
        prop_assert!(s.lambda > 0.0 && s.lambda.is_finite());
        prop_assert!(s.u.iter().all(|&v| v > 0.0));
        prop_assert!(s.residual <= 1e-10);
    }

    #[test]
    fn shrinking_the_domain_raises_lambda(
        n in 6usize..14,
        holes in prop::collection::vec(any::<bool>(), 11),
    ) {
        let big = rect(n, n);
        // E: a 2×2 block in the middle; holes never touch it.
        let mid = n / 2;
        let in_e = |i: usize, j: usize| (mid - 1..=mid).contains(&i) && (mid - 1..=mid).contains(&j);
        let mask: Vec<bool> = (0..n * n)
            .map(|c| {
                let (i, j) = (c % n, c / n);
                in_e(i, j) || !holes[c % holes.len()]
            })
            .collect();
        let small = GridDomain::from_mask(2, big.spacing(), &[0.0, 0.0], &[n, n], mask).unwrap();
        let lam = |g: &GridDomain| {
            let cells: Vec<usize> = (0..n * n).filter(|&c| in_e(c % n, c / n)).collect();
            let w = BangBangWeight::from_cells(g, 1.0, 1.0, &cells).unwrap();
            let mut s = GridEigenSolver::new(g).unwrap();
            s.tol = 1e-12;
            s.solve_weight(g, &w, None).unwrap().lambda
        };
        let (l_small, l_big) = (lam(&small), lam(&big));
        prop_assert!(l_small >= l_big * (1.0 - 1e-10), "{l_small} < {l_big}");
    }

    #[test]
    fn solves_are_bit_identical(seed in 0u64..1000) {
        let g = DomainSpec::Ellipse { a: 1.0, b: 0.7 }.grid(40).unwrap();
        let eps = 0.1 * g.n_dofs() as f64 * g.cell_volume();
        let a = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(seed), OptimizeOptions { tol: 0.0, maxit: 4, translate: false }).unwrap();
        let b = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(seed), OptimizeOptions { tol: 0.0, maxit: 4, translate: false }).unwrap();
        prop_assert_eq!(a.solution.lambda.to_bits(), b.solution.lambda.to_bits());
        prop_assert_eq!(a.favorable, b.favorable);
        prop_assert!(a.solution.u.iter().zip(&b.solution.u).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rearrangement_is_monotone_and_measure_exact(
        seed in 0u64..10_000,
        frac in 0.03f64..0.4,
        shape in 0usize..4,
    ) {
        let spec = [
            DomainSpec::Disk { radius: 1.0 },
            DomainSpec::Ellipse { a: 1.0, b: 0.6 },
            DomainSpec::Stadium { half_length: 0.5, radius: 0.5 },
            DomainSpec::Lshape { size: 1.0 },
        ][shape];
        let g = spec.grid(36).unwrap();
        let eps = frac * g.n_dofs() as f64 * g.cell_volume();
        let o = rearrangement_optimize(&g, eps, 1.0, 1.0, &Init::RandomSeeded(seed), OptimizeOptions::default()).unwrap();
        prop_assert!(o.trace.is_monotone(), "{:?}", o.trace.records);
        let n = o.trace.records[0].count;
        prop_assert!(o.trace.records.iter().all(|r| r.count == n));
        prop_assert_eq!(o.favorable.iter().filter(|&&b| b).count(), n);
    }

    #[test]
    fn top_cells_selects_exactly_n(vals in prop::collection::vec(-5i32..5, 1..60), k in 0usize..60) {
        let u: Vec<f64> = vals.iter().map(|&v| v as f64).collect();
        let n = k.min(u.len());
        let m = top_cells(&u, n);
        prop_assert_eq!(m.iter().filter(|&&b| b).count(), n);
        let lo_in = u.iter().zip(&m).filter(|p| *p.1).map(|p| *p.0).fold(f64::INFINITY, f64::min);
        let hi_out = u.iter().zip(&m).filter(|p| !*p.1).map(|p| *p.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo_in >= hi_out);
    }

    #[test]
    fn run_length_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200), w in 1usize..20) {
        let h = bits.len() / w;
        let mask = &bits[..w * h];
        prop_assert_eq!(RunLengthMask::encode(w, h, mask).decode(), mask.to_vec());
    }

    #[test]
    fn fmt17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn radial_profile_invariants(mbar in 0.5f64..3.0, munder in 0.5f64..3.0) {
        let p = solve_limit_eigen(2, mbar, munder, None, DEFAULT_TOL, Normalization::L2).unwrap();
        prop_assert!(p.matching_defect.abs() <= 10.0 * DEFAULT_TOL * p.lambda0.max(1.0));
        prop_assert!(p.dw[1..].iter().all(|&d| d < 0.0));
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let big = p.r0 * (1.0 + 0.5 * k as f64);
            let l = lambda_finite_ball(2, mbar, munder, big).unwrap();
            prop_assert!(l > p.lambda0 && l < prev, "{l} at R = {big}");
            prev = l;
        }
    }

    #[test]
    fn mode_values_decrease_and_stay_nonnegative(mbar in 0.5f64..3.0, munder in 0.5f64..3.0) {
        let p = solve_limit_eigen(2, mbar, munder, None, DEFAULT_TOL, Normalization::Weighted).unwrap();
        let t = ModeTable::build(p, 6).unwrap();
        prop_assert!(t.coercivity > 0.0);
        for w in t.entries.windows(2) {
            prop_assert!(w[0].mode.g_r0 - w[1].mode.g_r0 > 1e-8);
        }
        for e in &t.entries {
            let sup = e.mode.g.iter().fold(0.0f64, |a, &b| a.max(b));
            prop_assert!(e.mode.g.iter().all(|&v| v >= -1e-10 * sup));
        }
    }
}
