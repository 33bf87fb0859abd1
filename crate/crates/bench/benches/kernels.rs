use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rkpinn::maxreg::rk_solve;
use rkpinn::problem::ProblemKind;
use rkpinn::sobol::SobolStream;
use rkpinn::trainer::TrainingLoss;
use rkpinn::{init_dgm, loss_gradient, make_scheme, Family, TimePartition};
use rkpinn_bench::{heat_operator, training_fixture};

fn network(c: &mut Criterion) {
    let p = init_dgm(3, 1, 20, 4, 1).unwrap();
    let y = [0.3, 0.6, 0.2];
    c.bench_function("forward 20x4", |b| b.iter(|| p.forward(black_box(&y)).unwrap()));
    c.bench_function("jet 20x4 3 dirs", |b| {
        b.iter(|| p.jet(black_box(&y), &[0, 1, 2]).unwrap())
    });
}

fn gradient(c: &mut Criterion) {
    let mut g = c.benchmark_group("loss gradient");
    g.sample_size(10);
    for (name, family) in [("gauss3", Some(Family::Gauss)), ("uniform", None)] {
        let (mut cfg, x, b) = training_fixture(ProblemKind::Heat2d, family, 16);
        cfg.width = 10;
        cfg.depth = 2;
        let p = init_dgm(3, 1, cfg.width, cfg.depth, 2).unwrap();
        let loss = TrainingLoss::new(&cfg, x.clone(), x, b);
        g.bench_function(BenchmarkId::new("heat2d", name), |bch| {
            bch.iter(|| loss_gradient(&p, &loss, true).unwrap())
        });
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("rk_solve");
    let part = TimePartition::uniform(1.0, 20).unwrap();
    for m in [10, 40] {
        let op = heat_operator(m);
        for f in [Family::Gauss, Family::RadauIIA, Family::LobattoIIIA] {
            let s = make_scheme(f, 3).unwrap();
            g.bench_function(BenchmarkId::new(format!("{f:?}"), m), |b| {
                b.iter(|| rk_solve(&op, &s, &part).unwrap())
            });
        }
    }
    g.finish();
}

fn sobol(c: &mut Criterion) {
    c.bench_function("sobol 2-D 256 points", |b| {
        b.iter(|| {
            let mut s = SobolStream::with_dim(2).unwrap();
            (0..256).map(|_| s.next_point()[0]).sum::<f64>()
        })
    });
}

criterion_group!(benches, network, gradient, solver, sobol);
criterion_main!(benches);
