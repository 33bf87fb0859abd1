use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::maxreg::{rk_solve, EvolutionOperator};
use crate::polybasis::{lagrange_eval, make_scheme, Family};
use crate::problem::ProblemKind;
use crate::sobol::SobolStream;

fn config(kind: ProblemKind, sampling: TimeSampling, n: usize) -> TrainingConfig {
    let problem = ProblemSpec::new(kind);
    let part = TimePartition::uniform(problem.t_end, n).unwrap();
    let mut cfg = TrainingConfig::new(problem, sampling, part);
    cfg.width = 3;
    cfg.depth = 1;
    cfg.batch = 4;
    cfg.boundary_batch = 4;
    cfg
}

fn gauss3() -> TimeSampling {
    TimeSampling::Collocation(make_scheme(Family::Gauss, 3).unwrap())
}

fn batch(cfg: &TrainingConfig) -> (Vec<Vec<f64>>, Vec<BoundarySample>) {
    Sampler::new(&cfg.problem).unwrap().next_batch(cfg).unwrap()
}

fn constant_net(cfg: &TrainingConfig, value: f64) -> DgmParams {
    let mut p = init_dgm(cfg.in_dim(), cfg.problem.components(), cfg.width, cfg.depth, 0).unwrap();
    p.theta.iter_mut().for_each(|x| *x = 0.0);
    let n = p.len();
    for m in 0..p.out_dim {
        p.theta[n - p.out_dim + m] = value;
    }
    p
}

#[test]
fn zero_and_constant_networks_have_no_residual() {
    for kind in [ProblemKind::Heat2d, ProblemKind::Heat1d, ProblemKind::Wave2d] {
        let cfg = config(kind, gauss3(), 4);
        let (x, b) = batch(&cfg);
        assert_eq!(interior_cost(&constant_net(&cfg, 0.0), &cfg, &x).unwrap(), 0.0);
        if kind != ProblemKind::Wave2d {
            let p = constant_net(&cfg, 0.37);
            assert!(interior_cost(&p, &cfg, &x).unwrap() < 1e-28);
            // Neumann cost of a constant
            assert_eq!(boundary_cost(&p, &cfg, &b).unwrap(), 0.0);
        }
    }
    let cfg = config(ProblemKind::Heat2d, TimeSampling::Uniform { per_interval: 4 }, 4);
    let (x, _) = batch(&cfg);
    assert!(interior_cost(&constant_net(&cfg, 0.37), &cfg, &x).unwrap() < 1e-28);
}

#[test]
fn initial_and_dirichlet_costs_by_hand() {
    let cfg = config(ProblemKind::Heat1d, gauss3(), 4);
    let (x, _) = batch(&cfg);
    let want: f64 = x.iter().map(|p| (PI * p[0]).cos().powi(2)).sum::<f64>() / x.len() as f64;
    let got = initial_cost(&constant_net(&cfg, 0.0), &cfg, &x).unwrap();
    assert!((got - want).abs() < 1e-15);

    // wave: Dirichlet on both components, summed over t_1..t_N
    let cfg = config(ProblemKind::Wave2d, gauss3(), 5);
    let (_, b) = batch(&cfg);
    let got = boundary_cost(&constant_net(&cfg, 0.5), &cfg, &b).unwrap();
    let want = 4.0 / 4.0 * 4.0 * 5.0 * 2.0 * 0.25;
    assert!((got - want).abs() < 1e-13, "{got} vs {want}");
}

/// Jets of `a(t) cos(πx)` for the 1-D heat problem.
fn heat1d_jets(x: f64, times: &[f64], a: impl Fn(f64) -> f64) -> Vec<OutputJet> {
    times
        .iter()
        .map(|&t| {
            let mut j = OutputJet::zeros(1, 1);
            let u = a(t) * (PI * x).cos();
            *j.value_mut(0) = u;
            *j.d1_mut(0, 0) = -PI * a(t) * (PI * x).sin();
            *j.d2_mut(0, 0) = -PI * PI * u;
            j
        })
        .collect()
}

#[test]
fn exact_solution_residual_decays_at_order_2q() {
    let q = 3;
    let mut costs = Vec::new();
    for n in [4, 8, 16] {
        let cfg = config(ProblemKind::Heat1d, gauss3(), n);
        let kappa = cfg.problem.coeff;
        let loss = TrainingLoss::new(&cfg, vec![vec![0.3]], Vec::new(), Vec::new());
        let jets = heat1d_jets(0.3, loss.sample_times(), |t| (-PI * PI * kappa * t).exp());
        costs.push(loss.interior_term(&jets, None));
    }
    for w in costs.windows(2) {
        let ratio = w[0] / w[1];
        let want = 2f64.powi(2 * q);
        assert!((ratio / want - 1.0).abs() < 0.1, "ratio {ratio}");
    }
}

#[test]
fn collocation_trajectory_has_zero_interior_cost() {
    for fam in [Family::Gauss, Family::RadauIIA, Family::LobattoIIIA] {
        let s = make_scheme(fam, 3).unwrap();
        let mut cfg = config(ProblemKind::Heat1d, TimeSampling::Collocation(s.clone()), 5);
        cfg.partition = TimePartition::new(vec![0.0, 0.1, 0.35, 0.5, 0.8, 1.0]).unwrap();
        let kappa = cfg.problem.coeff;
        let lambda = kappa * PI * PI;
        let op =
            EvolutionOperator::homogeneous(DMatrix::from_element(1, 1, lambda), DVector::from_element(1, 1.0)).unwrap();
        let tr = rk_solve(&op, &s, &cfg.partition).unwrap();
        // collocation polynomial Û(τ) = U_n + k Σ_j Û'(c_j) ∫_0^τ ℓ_j
        let rule = crate::polybasis::gauss_legendre::<f64>(4).unwrap();
        let part = cfg.partition.clone();
        let a = |t: f64| {
            let n = part
                .nodes()
                .partition_point(|&tn| tn <= t - 1e-13)
                .saturating_sub(1)
                .min(part.intervals() - 1);
            let (tn, k) = (part.nodes()[n], part.steps()[n]);
            let tau = (t - tn) / k;
            let mut u = tr.nodal[n][0];
            for j in 0..3 {
                let w = rule.integrate_on(0.0, tau, |x| lagrange_eval(&s.c, j, x).unwrap());
                u += k * tr.stage_derivs[n][j][0] * w;
            }
            u
        };
        let loss = TrainingLoss::new(&cfg, vec![vec![0.2]], Vec::new(), Vec::new());
        let jets = heat1d_jets(0.2, loss.sample_times(), a);
        let c = loss.interior_term(&jets, None);
        assert!(c <= 1e-8, "{fam:?}: {c:e}");
    }
}

#[test]
fn time_plan_shares_interval_ends() {
    let cfg = config(ProblemKind::Heat1d, gauss3(), 10);
    let loss = TrainingLoss::new(&cfg, vec![vec![0.5]], Vec::new(), Vec::new());
    assert_eq!(loss.sample_times().len(), 31);
    let cfg = config(ProblemKind::Heat1d, TimeSampling::Uniform { per_interval: 4 }, 10);
    let loss = TrainingLoss::new(&cfg, vec![vec![0.5]], Vec::new(), Vec::new());
    assert_eq!(loss.sample_times().len(), 40);
    assert!((loss.sample_times()[0] - 0.0125).abs() < 1e-15);
}

fn check_gradient(cfg: &TrainingConfig, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = init_dgm(cfg.in_dim(), cfg.problem.components(), cfg.width, cfg.depth, seed).unwrap();
    for t in &mut p.theta {
        *t += rng.gen_range(-0.2..0.2);
    }
    let (x, b) = batch(cfg);
    let loss = TrainingLoss::new(cfg, x.clone(), x, b);
    let ev = loss_gradient(&p, &loss, true).unwrap();
    for _ in 0..5 {
        let d: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let at = |s: f64| {
            let mut q = p.clone();
            q.theta.iter_mut().zip(&d).for_each(|(t, di)| *t += s * di);
            loss_value(&q, &loss).unwrap().total
        };
        let h = 1e-5;
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let an: f64 = ev.grad.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!(
            (an - fd).abs() <= 1e-6 * fd.abs().max(1e-3),
            "{} {an} vs {fd}",
            cfg.sampling.label()
        );
    }
}

#[test]
fn training_loss_gradient_matches_finite_differences() {
    for (i, kind) in [ProblemKind::Heat2d, ProblemKind::Wave2d, ProblemKind::Heat1d]
        .into_iter()
        .enumerate()
    {
        for sampling in [
            gauss3(),
            TimeSampling::Collocation(make_scheme(Family::LobattoIIIA, 3).unwrap()),
            TimeSampling::Uniform { per_interval: 4 },
        ] {
            check_gradient(&config(kind, sampling, 3), i as u64);
        }
    }
}

#[test]
fn adam_by_hand() {
    let mut st = AdamState::new(1);
    let mut th = [1.0];
    adam_step(&mut st, &mut th, &[0.0], 3e-4, 0.9, 0.999, 1e-8).unwrap();
    assert_eq!(th, [1.0]);

    let mut st = AdamState::new(1);
    let mut th = [0.0];
    adam_step(&mut st, &mut th, &[1.0], 3e-4, 0.9, 0.999, 1e-8).unwrap();
    assert!((th[0] + 3e-4 / (1.0 + 1e-8)).abs() < 1e-18);
    let before = th[0];
    adam_step(&mut st, &mut th, &[1.0], 3e-4, 0.9, 0.999, 1e-8).unwrap();
    assert!(((before - th[0]) / 3e-4 - 1.0).abs() < 1e-6);
    assert_eq!(st.step, 2);
    assert!(st.v.iter().all(|&v| v >= 0.0));
    assert!(adam_step(&mut st, &mut th, &[1.0, 2.0], 3e-4, 0.9, 0.999, 1e-8).is_err());
}

#[test]
fn small_adam_step_does_not_increase_loss() {
    let kinds = [
        ProblemKind::Heat2d,
        ProblemKind::Wave2d,
        ProblemKind::Heat1d,
        ProblemKind::Heat2dDiscontinuous,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..20u64 {
        let sampling = match trial % 3 {
            0 => gauss3(),
            1 => TimeSampling::Collocation(make_scheme(Family::RadauIIA, 2).unwrap()),
            _ => TimeSampling::Uniform { per_interval: 4 },
        };
        let mut cfg = config(kinds[trial as usize % 4], sampling, rng.gen_range(2..5));
        cfg.width = rng.gen_range(2..5);
        cfg.depth = rng.gen_range(0..3);
        cfg.seed = trial;
        let p = init_dgm(cfg.in_dim(), cfg.problem.components(), cfg.width, cfg.depth, trial).unwrap();
        let (x, b) = batch(&cfg);
        let loss = TrainingLoss::new(&cfg, x.clone(), x, b);
        let ev = loss_gradient(&p, &loss, true).unwrap();
        assert!(ev.total >= 0.0 && ev.components.iter().all(|&c| c >= 0.0));
        let mut q = p.clone();
        adam_step(
            &mut AdamState::new(p.len()),
            &mut q.theta,
            &ev.grad,
            1e-6,
            0.9,
            0.999,
            1e-8,
        )
        .unwrap();
        let after = loss_value(&q, &loss).unwrap().total;
        assert!(after <= ev.total, "trial {trial}: {after} > {}", ev.total);
    }
}

#[test]
fn zero_epochs_returns_initial_network() {
    let mut cfg = config(ProblemKind::Heat1d, gauss3(), 3);
    cfg.epochs = 0;
    let out = train(&cfg).unwrap();
    assert!(out.history.is_empty());
    assert_eq!(out.params, init_dgm(2, 1, 3, 1, cfg.seed).unwrap());
}

#[test]
fn training_is_reproducible_and_decreases_loss() {
    let mut cfg = config(ProblemKind::Heat1d, gauss3(), 3);
    cfg.epochs = 60;
    cfg.lr = 1e-2;
    let a = train(&cfg).unwrap();
    let b = train(&cfg).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.params, b.params);
    let first = a.history[0].costs.total();
    let last = a.history.last().unwrap().costs.total();
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn history_csv_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(ProblemKind::Heat1d, gauss3(), 3);
    cfg.epochs = 5;
    cfg.checkpoint_every = Some(2);
    cfg.checkpoint_path = Some(dir.path().join("net.ckpt"));
    let out = train(&cfg).unwrap();
    assert_eq!(
        crate::net::load_checkpoint(dir.path().join("net.ckpt")).unwrap(),
        out.params
    );
    let mut buf = Vec::new();
    write_history_csv(&out.history, cfg.seed, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "epoch,interior,initial,boundary,total");
    assert_eq!(lines.len(), 2 + 5);
    assert!(lines[2].starts_with("0,"));
}

#[test]
fn invalid_configs_are_rejected() {
    let base = config(ProblemKind::Heat1d, gauss3(), 3);
    let mut c = base.clone();
    c.lr = 0.0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.beta2 = 1.0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.partition = TimePartition::uniform(2.0, 3).unwrap();
    assert!(c.validate().is_err());
    let mut c = base;
    c.batch = 0;
    assert!(train(&c).is_err());
}

#[test]
fn sobol_batches_are_fresh_each_epoch() {
    let cfg = config(ProblemKind::Heat2d, gauss3(), 3);
    let mut s = Sampler::new(&cfg.problem).unwrap();
    let (a, _) = s.next_batch(&cfg).unwrap();
    let (b, _) = s.next_batch(&cfg).unwrap();
    assert_ne!(a, b);
    let mut direct = SobolStream::with_dim(2).unwrap();
    assert_eq!(a[0], direct.next_point());
}
