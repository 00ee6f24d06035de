//! Sequential against rayon kernels, and a full eigen-solve in a one-thread
//! pool against the default pool. Build with `--no-default-features` to see
//! the sequential fallback alone.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use bbspectra::domain::DomainSpec;
use bbspectra::kernels::seq;
use bbspectra::spectral::{assemble_stiffness, BangBangWeight, GridEigenSolver};

fn vectors(n: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let b = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
    (a, b)
}

fn dot_axpy(c: &mut Criterion) {
    let mut g = c.benchmark_group("dot");
    for n in [1 << 14, 1 << 18, 1 << 21] {
        let (a, b) = vectors(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("seq", n), &n, |bn, _| bn.iter(|| seq::dot(black_box(&a), black_box(&b))));
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("par", n), &n, |bn, _| {
            bn.iter(|| bbspectra::kernels::par::dot(black_box(&a), black_box(&b)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("axpy");
    for n in [1 << 14, 1 << 18, 1 << 21] {
        let (a, mut b) = vectors(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("seq", n), &n, |bn, _| bn.iter(|| seq::axpy(1e-9, &a, &mut b)));
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("par", n), &n, |bn, _| {
            bn.iter(|| bbspectra::kernels::par::axpy(1e-9, &a, &mut b))
        });
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let mut g = c.benchmark_group("matvec");
    for cells in [128, 512] {
        let domain = DomainSpec::Disk { radius: 1.0 }.grid(cells).unwrap();
        let k = assemble_stiffness(&domain).unwrap();
        let n = domain.n_dofs();
        let (x, _) = vectors(n);
        let mut y = vec![0.0; n];
        g.throughput(Throughput::Elements(k.nnz() as u64));
        g.bench_with_input(BenchmarkId::new("seq", n), &n, |bn, _| bn.iter(|| seq::matvec(&k, &x, &mut y)));
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("par", n), &n, |bn, _| {
            bn.iter(|| bbspectra::kernels::par::matvec(&k, &x, &mut y))
        });
    }
    g.finish();
}

fn eigen_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen_solve");
    g.sample_size(10);
    let domain = DomainSpec::Disk { radius: 1.0 }.grid(256).unwrap();
    let favorable: Vec<bool> = (0..domain.n_dofs())
        .map(|d| {
            let x = domain.dof_center(d);
            x[0].hypot(x[1]) < 0.4
        })
        .collect();
    let w = BangBangWeight::from_dof_mask(&domain, 1.0, 1.0, favorable);
    let solve = || {
        let mut s = GridEigenSolver::new(&domain).unwrap();
        s.solve_weight(&domain, &w, None).unwrap().lambda
    };
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function("one_thread", |bn| bn.iter(|| one.install(solve)));
        g.bench_function("default_pool", |bn| bn.iter(solve));
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function("sequential_build", |bn| bn.iter(solve));
    g.finish();
}

criterion_group!(benches, dot_axpy, matvec, eigen_solve);
criterion_main!(benches);
