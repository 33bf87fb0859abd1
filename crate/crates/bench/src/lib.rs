//! Fixtures shared by the criterion benches.

use rkpinn::maxreg::{laplacian_1d, BoundaryCondition, EvolutionOperator};
use rkpinn::problem::{ProblemKind, ProblemSpec};
use rkpinn::trainer::{Sampler, TimeSampling, TrainingConfig};
use rkpinn::{make_scheme, Family, TimePartition};

/// Semi-discrete 1-D heat operator on `m` interior points with smooth forcing.
pub fn heat_operator(m: usize) -> EvolutionOperator {
    let h = 1.0 / (m + 1) as f64;
    let a = laplacian_1d(m, h, BoundaryCondition::Dirichlet, 0.0).expect("valid grid");
    let u0 = nalgebra::DVector::from_fn(m, |i, _| ((i + 1) as f64 * h * std::f64::consts::PI).sin());
    EvolutionOperator::new(a, move |t| nalgebra::DVector::from_element(m, t.cos()), u0).expect("square")
}

/// Training config for a 2-D problem with the given scheme family, plus one batch.
pub fn training_fixture(
    kind: ProblemKind,
    family: Option<Family>,
    batch: usize,
) -> (TrainingConfig, Vec<Vec<f64>>, Vec<rkpinn::problem::BoundarySample>) {
    let sampling = match family {
        Some(f) => TimeSampling::Collocation(make_scheme(f, 3).expect("q = 3")),
        None => TimeSampling::Uniform { per_interval: 4 },
    };
    let mut cfg = TrainingConfig::new(
        ProblemSpec::new(kind),
        sampling,
        TimePartition::uniform(1.0, 10).expect("N > 0"),
    );
    cfg.batch = batch;
    cfg.boundary_batch = batch;
    let (x, b) = Sampler::new(&cfg.problem)
        .and_then(|mut s| s.next_batch(&cfg))
        .expect("sampler");
    (cfg, x, b)
}
