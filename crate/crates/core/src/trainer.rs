//! Discrete cost functionals and Adam training.

use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::maxreg::BoundaryCondition;
use crate::net::{init_dgm, loss_gradient, loss_value, save_checkpoint, DgmParams, GroupLoss, OutputJet};
use crate::polybasis::CollocationScheme;
use crate::problem::{BoundarySample, ProblemSpec};
use crate::timegrid::{build_stencil, ResidualStencil, TimePartition};

/// How the time axis enters the interior cost.
#[derive(Debug, Clone)]
pub enum TimeSampling {
    /// Collocation residual through the residual stencil.
    Collocation(CollocationScheme),
    /// Pointwise residual `|u_t + L u|²` at `per_interval` equally spaced
    /// midpoints in every interval; `u_t` by differentiating the network.
    Uniform { per_interval: usize },
}

impl TimeSampling {
    pub fn label(&self) -> String {
        match self {
            TimeSampling::Collocation(s) => s.label(),
            TimeSampling::Uniform { .. } => "uniform".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub problem: ProblemSpec,
    pub sampling: TimeSampling,
    pub partition: TimePartition,
    pub width: usize,
    pub depth: usize,
    /// Interior samples `R` per epoch.
    pub batch: usize,
    /// Boundary samples per epoch (ignored in 1-D).
    pub boundary_batch: usize,
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub initial_weight: f64,
    pub boundary_weight: f64,
    pub reproducible: bool,
    pub checkpoint_every: Option<usize>,
    pub checkpoint_path: Option<PathBuf>,
}

impl TrainingConfig {
    /// Defaults: 4 × 20 network, lr 3e-4, 256 samples.
    pub fn new(problem: ProblemSpec, sampling: TimeSampling, partition: TimePartition) -> Self {
        Self {
            problem,
            sampling,
            partition,
            width: 20,
            depth: 4,
            batch: 256,
            boundary_batch: 256,
            epochs: 1000,
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            initial_weight: 1.0,
            boundary_weight: 1.0,
            reproducible: true,
            checkpoint_every: None,
            checkpoint_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.batch == 0 || self.boundary_batch == 0 {
            return bad("batch sizes must be positive".into());
        }
        if self.width == 0 {
            return bad("width must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive".into());
        }
        if self.initial_weight < 0.0 || self.boundary_weight < 0.0 {
            return bad("penalty weights must be non-negative".into());
        }
        if (self.partition.end() - self.problem.t_end).abs() > 1e-12 * self.problem.t_end {
            return bad(format!(
                "partition ends at {} but T = {}",
                self.partition.end(),
                self.problem.t_end
            ));
        }
        if let TimeSampling::Uniform { per_interval: 0 } = self.sampling {
            return bad("uniform sampling needs at least one time per interval".into());
        }
        if self.checkpoint_every == Some(0) {
            return bad("checkpoint interval must be positive".into());
        }
        Ok(())
    }

    pub fn in_dim(&self) -> usize {
        self.problem.spatial_dim() + 1
    }
}

/// Evaluation times shared by all interior samples.
#[derive(Debug, Clone)]
struct TimePlan {
    times: Vec<f64>,
    /// Per interval, indices into `times` of the auxiliary nodes (collocation)
    /// or of the sample times (uniform).
    per_interval: Vec<Vec<usize>>,
}

fn push_time(times: &mut Vec<f64>, t: f64) -> usize {
    // auxiliary nodes at interval ends coincide with the neighbour's
    if let Some(i) = times.iter().rposition(|&s| (s - t).abs() <= 1e-14 * t.abs().max(1.0)) {
        return i;
    }
    times.push(t);
    times.len() - 1
}

impl TimePlan {
    fn new(sampling: &TimeSampling, part: &TimePartition) -> Self {
        let mut times = Vec::new();
        let mut per_interval = Vec::new();
        for n in 0..part.intervals() {
            let (t0, k) = (part.nodes()[n], part.steps()[n]);
            let idx = match sampling {
                TimeSampling::Collocation(s) => s.c_tilde.iter().map(|&c| push_time(&mut times, t0 + c * k)).collect(),
                TimeSampling::Uniform { per_interval } => (0..*per_interval)
                    .map(|i| push_time(&mut times, t0 + (i as f64 + 0.5) / *per_interval as f64 * k))
                    .collect(),
            };
            per_interval.push(idx);
        }
        Self { times, per_interval }
    }
}

/// Component indices of [`TrainingLoss`].
pub const INTERIOR: usize = 0;
pub const INITIAL: usize = 1;
pub const BOUNDARY: usize = 2;

/// The total cost on one frozen batch, as a [`GroupLoss`]: one group per
/// interior sample, per initial sample and per boundary sample.
pub struct TrainingLoss<'a> {
    cfg: &'a TrainingConfig,
    plan: TimePlan,
    stencil: Option<ResidualStencil>,
    interior: Vec<Vec<f64>>,
    initial: Vec<Vec<f64>>,
    boundary: Vec<BoundarySample>,
    spatial_dirs: Vec<usize>,
    time_dirs: Vec<usize>,
}

impl<'a> TrainingLoss<'a> {
    pub fn new(
        cfg: &'a TrainingConfig,
        interior: Vec<Vec<f64>>,
        initial: Vec<Vec<f64>>,
        boundary: Vec<BoundarySample>,
    ) -> Self {
        let d = cfg.problem.spatial_dim();
        let stencil = match &cfg.sampling {
            TimeSampling::Collocation(s) => Some(build_stencil(s)),
            TimeSampling::Uniform { .. } => None,
        };
        Self {
            cfg,
            plan: TimePlan::new(&cfg.sampling, &cfg.partition),
            stencil,
            interior,
            initial,
            boundary,
            spatial_dirs: (0..d).collect(),
            time_dirs: (0..=d).collect(),
        }
    }

    /// Distinct network evaluation times of every interior sample.
    pub fn sample_times(&self) -> &[f64] {
        &self.plan.times
    }

    fn vol_scale(&self, n: usize) -> f64 {
        self.cfg.problem.domain.volume() / n as f64
    }

    /// Interior term of one sample from its jets at the plan times.
    pub fn interior_term(&self, jets: &[OutputJet], mut cot: Option<&mut [OutputJet]>) -> f64 {
        let prob = &self.cfg.problem;
        let m = prob.components();
        let scale = self.vol_scale(self.interior.len());
        let part = &self.cfg.partition;
        let mut total = 0.0;
        let mut lv = vec![0.0; m];
        match &self.stencil {
            Some(st) => {
                let q = st.q();
                for (n, idx) in self.plan.per_interval.iter().enumerate() {
                    let k = part.steps()[n];
                    let mut v = DMatrix::zeros(q + 1, m);
                    let mut l = DMatrix::zeros(q + 1, m);
                    for (i, &ti) in idx.iter().enumerate() {
                        prob.apply_operator(&jets[ti], &mut lv);
                        for c in 0..m {
                            v[(i, c)] = jets[ti].value(c);
                            l[(i, c)] = lv[c];
                        }
                    }
                    let zeta = &st.d * &v / k + &st.e * &l;
                    total += scale * st.interval_loss(k, &zeta);
                    if let Some(cot) = cot.as_deref_mut() {
                        let dz = st.interval_loss_grad(k, &zeta) * scale;
                        let dv = st.d.transpose() * &dz / k;
                        let dl = st.e.transpose() * &dz;
                        for (i, &ti) in idx.iter().enumerate() {
                            for c in 0..m {
                                *cot[ti].value_mut(c) += dv[(i, c)];
                                lv[c] = dl[(i, c)];
                            }
                            prob.operator_pullback(&lv, &mut cot[ti]);
                        }
                    }
                }
            }
            None => {
                let d = prob.spatial_dim();
                for (n, idx) in self.plan.per_interval.iter().enumerate() {
                    let w = scale * part.steps()[n] / idx.len() as f64;
                    for &ti in idx {
                        prob.apply_operator(&jets[ti], &mut lv);
                        let zeta: Vec<f64> = (0..m).map(|c| jets[ti].d1(c, d) + lv[c]).collect();
                        total += w * zeta.iter().map(|z| z * z).sum::<f64>();
                        if let Some(cot) = cot.as_deref_mut() {
                            for c in 0..m {
                                *cot[ti].d1_mut(c, d) += 2.0 * w * zeta[c];
                                lv[c] = 2.0 * w * zeta[c];
                            }
                            prob.operator_pullback(&lv, &mut cot[ti]);
                        }
                    }
                }
            }
        }
        total
    }
}

impl GroupLoss for TrainingLoss<'_> {
    fn groups(&self) -> usize {
        self.interior.len() + self.initial.len() + self.boundary.len()
    }

    fn components(&self) -> usize {
        3
    }

    fn component(&self, g: usize) -> usize {
        if g < self.interior.len() {
            INTERIOR
        } else if g < self.interior.len() + self.initial.len() {
            INITIAL
        } else {
            BOUNDARY
        }
    }

    fn directions(&self, g: usize) -> &[usize] {
        match self.component(g) {
            INTERIOR => match self.stencil {
                Some(_) => &self.spatial_dirs,
                None => &self.time_dirs,
            },
            INITIAL => &[],
            _ => match self.cfg.problem.boundary {
                BoundaryCondition::Neumann => &self.spatial_dirs,
                BoundaryCondition::Dirichlet => &[],
            },
        }
    }

    fn points(&self, g: usize) -> Vec<Vec<f64>> {
        let with_t = |x: &[f64], t: f64| {
            let mut y = x.to_vec();
            y.push(t);
            y
        };
        match self.component(g) {
            INTERIOR => self.plan.times.iter().map(|&t| with_t(&self.interior[g], t)).collect(),
            INITIAL => vec![with_t(&self.initial[g - self.interior.len()], 0.0)],
            _ => {
                let b = &self.boundary[g - self.interior.len() - self.initial.len()];
                self.cfg.partition.nodes()[1..]
                    .iter()
                    .map(|&t| with_t(&b.x, t))
                    .collect()
            }
        }
    }

    fn eval(&self, g: usize, jets: &[OutputJet], mut cot: Option<&mut [OutputJet]>) -> f64 {
        let prob = &self.cfg.problem;
        let m = prob.components();
        match self.component(g) {
            INTERIOR => self.interior_term(jets, cot),
            INITIAL => {
                let x = &self.initial[g - self.interior.len()];
                let w = self.cfg.initial_weight * self.vol_scale(self.initial.len());
                let u0 = prob.initial(x);
                let mut acc = 0.0;
                for c in 0..m {
                    let e = jets[0].value(c) - u0[c];
                    acc += w * e * e;
                    if let Some(cot) = cot.as_deref_mut() {
                        *cot[0].value_mut(c) += 2.0 * w * e;
                    }
                }
                acc
            }
            _ => {
                let b = &self.boundary[g - self.interior.len() - self.initial.len()];
                let w = self.cfg.boundary_weight * prob.boundary_measure() / self.boundary.len() as f64;
                let mut acc = 0.0;
                for (i, jet) in jets.iter().enumerate() {
                    for c in 0..m {
                        // homogeneous data in every model problem
                        let e = match prob.boundary {
                            BoundaryCondition::Dirichlet => jet.value(c),
                            BoundaryCondition::Neumann => {
                                b.normal.iter().enumerate().map(|(k, nk)| nk * jet.d1(c, k)).sum()
                            }
                        };
                        acc += w * e * e;
                        if let Some(cot) = cot.as_deref_mut() {
                            match prob.boundary {
                                BoundaryCondition::Dirichlet => *cot[i].value_mut(c) += 2.0 * w * e,
                                BoundaryCondition::Neumann => {
                                    for (k, nk) in b.normal.iter().enumerate() {
                                        *cot[i].d1_mut(c, k) += 2.0 * w * e * nk;
                                    }
                                }
                            }
                        }
                    }
                }
                acc
            }
        }
    }
}

/// Interior, initial and boundary costs (penalty weights applied).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Costs {
    pub interior: f64,
    pub initial: f64,
    pub boundary: f64,
}

impl Costs {
    pub fn total(&self) -> f64 {
        self.interior + self.initial + self.boundary
    }

    fn from_components(c: &[f64]) -> Self {
        Self {
            interior: c[INTERIOR],
            initial: c[INITIAL],
            boundary: c[BOUNDARY],
        }
    }
}

/// `C_Ω` on the given interior batch.
pub fn interior_cost(p: &DgmParams, cfg: &TrainingConfig, batch: &[Vec<f64>]) -> Result<f64> {
    let loss = TrainingLoss::new(cfg, batch.to_vec(), Vec::new(), Vec::new());
    Ok(loss_value(p, &loss)?.components[INTERIOR])
}

/// `C_0` on the given batch.
pub fn initial_cost(p: &DgmParams, cfg: &TrainingConfig, batch: &[Vec<f64>]) -> Result<f64> {
    let loss = TrainingLoss::new(cfg, Vec::new(), batch.to_vec(), Vec::new());
    Ok(loss_value(p, &loss)?.components[INITIAL])
}

/// `C_∂Ω`, summed over the partition nodes `t_1, …, t_N`.
pub fn boundary_cost(p: &DgmParams, cfg: &TrainingConfig, batch: &[BoundarySample]) -> Result<f64> {
    let loss = TrainingLoss::new(cfg, Vec::new(), Vec::new(), batch.to_vec());
    Ok(loss_value(p, &loss)?.components[BOUNDARY])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `theta` in place.
pub fn adam_step(
    state: &mut AdamState,
    theta: &mut [f64],
    grad: &[f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if theta.len() != grad.len() || state.m.len() != grad.len() {
        return Err(Error::Shape(format!(
            "Adam: {} parameters, {} gradients, state of {}",
            theta.len(),
            grad.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let c1 = 1.0 - beta1.powi(state.step as i32);
    let c2 = 1.0 - beta2.powi(state.step as i32);
    for i in 0..theta.len() {
        let g = grad[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        theta[i] -= lr * mh / (vh.sqrt() + eps);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub costs: Costs,
}

/// Writes `epoch,interior,initial,boundary,total` with a metadata line.
pub fn write_history_csv(history: &[HistoryRow], seed: u64, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# rkpinn v{} seed={seed}", crate::VERSION)?;
    writeln!(w, "epoch,interior,initial,boundary,total")?;
    for r in history {
        let c = r.costs;
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            r.epoch,
            c.interior,
            c.initial,
            c.boundary,
            c.total()
        )?;
    }
    Ok(())
}

/// Per-epoch sample source: fresh Sobol points every epoch.
pub struct Sampler {
    interior: crate::sobol::SobolStream,
    boundary: crate::sobol::SobolStream,
}

impl Sampler {
    pub fn new(problem: &ProblemSpec) -> Result<Self> {
        Ok(Self {
            interior: problem.interior_stream()?,
            boundary: crate::sobol::SobolStream::with_dim(1)?,
        })
    }

    /// Interior batch (also used for the initial cost) and boundary batch.
    pub fn next_batch(&mut self, cfg: &TrainingConfig) -> Result<(Vec<Vec<f64>>, Vec<BoundarySample>)> {
        let x = cfg.problem.sample_interior(&mut self.interior, cfg.batch)?;
        let b = cfg.problem.sample_boundary(&mut self.boundary, cfg.boundary_batch)?;
        Ok((x, b))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: DgmParams,
    pub history: Vec<HistoryRow>,
}

/// Trains a freshly initialized network.
pub fn train(cfg: &TrainingConfig) -> Result<TrainOutcome> {
    let p = init_dgm(cfg.in_dim(), cfg.problem.components(), cfg.width, cfg.depth, cfg.seed)?;
    train_from(cfg, p)
}

/// Trains starting from `params`. On a non-finite loss the run stops with an
/// error; the last written checkpoint is left in place.
pub fn train_from(cfg: &TrainingConfig, mut params: DgmParams) -> Result<TrainOutcome> {
    cfg.validate()?;
    if params.in_dim != cfg.in_dim() || params.out_dim != cfg.problem.components() {
        return Err(Error::Shape(format!(
            "network maps {} -> {}, problem needs {} -> {}",
            params.in_dim,
            params.out_dim,
            cfg.in_dim(),
            cfg.problem.components()
        )));
    }
    let mut sampler = Sampler::new(&cfg.problem)?;
    let mut adam = AdamState::new(params.len());
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (x, b) = sampler.next_batch(cfg)?;
        let loss = TrainingLoss::new(cfg, x.clone(), x, b);
        let ev = loss_gradient(&params, &loss, cfg.reproducible).map_err(|e| match e {
            Error::NonFiniteLoss { sample, .. } => Error::NonFiniteLoss { epoch, sample },
            e => e,
        })?;
        history.push(HistoryRow {
            epoch,
            costs: Costs::from_components(&ev.components),
        });
        adam_step(
            &mut adam,
            &mut params.theta,
            &ev.grad,
            cfg.lr,
            cfg.beta1,
            cfg.beta2,
            cfg.eps,
        )?;
        if let (Some(every), Some(path)) = (cfg.checkpoint_every, &cfg.checkpoint_path) {
            if (epoch + 1) % every == 0 || epoch + 1 == cfg.epochs {
                save_checkpoint(&params, path)?;
            }
        }
    }
    Ok(TrainOutcome { params, history })
}

#[cfg(test)]
mod tests;
