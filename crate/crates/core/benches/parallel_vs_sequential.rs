use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use teichlab::beltsolve::{solve_with, SolveOptions, SquareBox};
use teichlab::domains::Region;
use teichlab::extremal::{certify_extremal_with, CertifyOptions};
use teichlab::fields::{example1_field, radial_stretch, WeightSequences};
use teichlab::par::Exec;
use teichlab::qdiff::qs_basis;
use teichlab::quadrature::{integrate2d_with, QuadOptions};
use teichlab::Complex64 as C64;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn solver(c: &mut Criterion) {
    let mu = radial_stretch(2.0, C64::new(0.0, 0.0), 1.0).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n in [128, 256] {
        for (name, exec) in POLICIES {
            let opts = SolveOptions { exec, ..SolveOptions::new(n, SquareBox::centered(C64::new(0.0, 0.0), 2.0)) };
            group.bench_with_input(BenchmarkId::new(name, n), &opts, |b, o| {
                b.iter(|| solve_with(&mu, o).unwrap())
            });
        }
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    let region = Region::Rectangle { x0: -1.0, x1: 2.0, y0: -1.0, y1: 1.0 };
    let f = |z: C64| (z * z).exp() / (z - C64::new(0.5, 0.0));
    let mut group = c.benchmark_group("integrate2d");
    for (name, exec) in POLICIES {
        let opts = QuadOptions { exec, ..QuadOptions::with_tol(1e-10).singular_at([C64::new(0.5, 0.0)]) };
        group.bench_function(name, |b| b.iter(|| integrate2d_with(&region, f, &opts).unwrap()));
    }
    group.finish();
}

fn certify(c: &mut Criterion) {
    let basis = qs_basis().unwrap();
    let mu = example1_field(0.3, WeightSequences::Logistic, basis.clone()).unwrap();
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let opts = CertifyOptions { depth: 0, exec, ..Default::default() };
        group.bench_function(name, |b| {
            b.iter(|| certify_extremal_with(&mu, (&basis.phi_r, 0.3), 3, 0.05, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solver, quadrature, certify);
criterion_main!(benches);
