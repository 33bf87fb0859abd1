//! Experiment driver: configuration files, reference solutions and the
//! conservation and misfit diagnostics.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::net::{save_checkpoint, DgmParams};
use crate::polybasis::{gauss_legendre, make_scheme, Family};
use crate::problem::{ProblemKind, ProblemSpec};
use crate::timegrid::TimePartition;
use crate::trainer::{train, write_history_csv, TimeSampling, TrainOutcome, TrainingConfig};

/// Time treatment compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Gauss,
    Radau,
    Lobatto,
    Uniform,
}

impl SchemeName {
    pub const ALL: [SchemeName; 4] = [
        SchemeName::Gauss,
        SchemeName::Lobatto,
        SchemeName::Radau,
        SchemeName::Uniform,
    ];

    pub fn family(self) -> Option<Family> {
        match self {
            SchemeName::Gauss => Some(Family::Gauss),
            SchemeName::Radau => Some(Family::RadauIIA),
            SchemeName::Lobatto => Some(Family::LobattoIIIA),
            SchemeName::Uniform => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum SchemeField {
    One(String),
    Many(Vec<SchemeName>),
}

fn parse_schemes(f: &SchemeField) -> Result<Vec<SchemeName>> {
    match f {
        SchemeField::Many(v) if v.is_empty() => Err(Error::Config("key `scheme`: empty list".into())),
        SchemeField::Many(v) => Ok(v.clone()),
        SchemeField::One(s) if s == "all" => Ok(SchemeName::ALL.to_vec()),
        SchemeField::One(s) => serde_json::from_value(serde_json::Value::String(s.clone()))
            .map(|n| vec![n])
            .map_err(|_| Error::Config(format!("key `scheme`: unknown scheme `{s}`"))),
    }
}

/// How many terms the separation-of-variables series keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCount {
    /// `m, n ∈ {1, …, modes}`.
    PerIndex,
    /// The `modes` lowest frequencies overall.
    Total,
}

fn default_schemes() -> SchemeField {
    SchemeField::One("all".into())
}
fn default_q() -> usize {
    3
}
fn default_width() -> usize {
    20
}
fn default_depth() -> usize {
    4
}
fn default_grid() -> usize {
    128
}
fn default_times() -> usize {
    21
}
fn default_modes() -> usize {
    8
}
fn default_mode_count() -> ModeCount {
    ModeCount::PerIndex
}
fn default_true() -> bool {
    true
}
fn default_uniform_factor() -> usize {
    4
}

/// JSON experiment description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(default = "default_schemes")]
    scheme: SchemeField,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
    pub outputs: PathBuf,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub boundary_batch: Option<usize>,
    /// Diagnostic grid points per axis.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Number of equally spaced diagnostic times in `[0, T]`.
    #[serde(default = "default_times")]
    pub diagnostic_times: usize,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_mode_count")]
    pub mode_count: ModeCount,
    #[serde(default)]
    pub coeff: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    #[serde(default = "default_true")]
    pub reproducible: bool,
    /// Uniform-sampling times per partition interval.
    #[serde(default = "default_uniform_factor")]
    pub uniform_factor: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn schemes(&self) -> Vec<SchemeName> {
        parse_schemes(&self.scheme).expect("validated")
    }

    pub fn set_schemes(&mut self, s: &[SchemeName]) {
        self.scheme = SchemeField::Many(s.to_vec());
    }

    pub fn validate(&self) -> Result<()> {
        parse_schemes(&self.scheme)?;
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n == 0 {
            return bad("key `N`: must be positive");
        }
        if self.q == 0 {
            return bad("key `q`: must be positive");
        }
        if self.batch == 0 {
            return bad("key `batch`: must be positive");
        }
        if !(self.lr > 0.0) {
            return bad("key `lr`: must be positive");
        }
        if self.grid < 16 {
            return bad("key `grid`: at least 16 points per axis");
        }
        if self.diagnostic_times < 2 {
            return bad("key `diagnostic_times`: at least 2");
        }
        if self.modes == 0 {
            return bad("key `modes`: must be positive");
        }
        self.problem_spec().validate()
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let mut p = ProblemSpec::new(self.problem);
        if let Some(c) = self.coeff {
            p.coeff = c;
        }
        if let Some(t) = self.t_end {
            p.t_end = t;
        }
        p
    }

    /// Trainer configuration for one scheme.
    pub fn training_config(&self, scheme: SchemeName) -> Result<TrainingConfig> {
        let problem = self.problem_spec();
        let part = TimePartition::uniform(problem.t_end, self.n)?;
        let sampling = match scheme.family() {
            Some(f) => TimeSampling::Collocation(make_scheme(f, self.q)?),
            None => TimeSampling::Uniform {
                per_interval: self.uniform_factor,
            },
        };
        let mut t = TrainingConfig::new(problem, sampling, part);
        t.width = self.width;
        t.depth = self.depth;
        t.batch = self.batch;
        t.boundary_batch = self.boundary_batch.unwrap_or(self.batch);
        t.epochs = self.epochs;
        t.lr = self.lr;
        t.seed = self.seed;
        t.reproducible = self.reproducible;
        if let Some(every) = self.checkpoint_every {
            t.checkpoint_every = Some(every);
            t.checkpoint_path = Some(self.outputs.join(format!("{}.ckpt", self.label(scheme))));
        }
        t.validate()?;
        Ok(t)
    }

    pub fn label(&self, scheme: SchemeName) -> String {
        match scheme.family() {
            Some(f) => format!("{}{}", f.name(), self.q),
            None => "uniform".into(),
        }
    }
}

/// Midpoints of a uniform grid with `n` cells on `[0, 1]`.
pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

fn grid_points(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let m = midpoints(n);
    match dim {
        1 => m.iter().map(|&x| vec![x]).collect(),
        _ => m.iter().flat_map(|&x| m.iter().map(move |&y| vec![x, y])).collect(),
    }
}

fn with_time(x: &[f64], t: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y.push(t);
    y
}

/// `∫_Ω u(t, x) dx` by the tensor midpoint rule with `n` cells per axis.
pub fn total_heat(p: &DgmParams, t: f64, n: usize) -> Result<f64> {
    let pts = grid_points(p.spatial_dim(), n);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|x| p.forward(&with_time(x, t)).map(|u| u[0]))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / pts.len() as f64)
}

/// `½‖v‖² + ½c²‖∇u‖²` by the tensor midpoint rule; `v` is the second
/// network output.
pub fn wave_energy(p: &DgmParams, c: f64, t: f64, n: usize) -> Result<f64> {
    if p.out_dim != 2 {
        return Err(Error::Shape(format!(
            "wave energy needs 2 outputs, network has {}",
            p.out_dim
        )));
    }
    wave_energy_of(
        |x| {
            let r = p.forward_with_space_derivs(&with_time(x, t), &[true, false])?;
            Ok((r.u[1], r.grad_x[0].clone().expect("selected")))
        },
        c,
        p.spatial_dim(),
        n,
    )
}

/// Wave energy of a field given pointwise as `x ↦ (v, ∇u)`.
pub fn wave_energy_of(
    field: impl Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
    c: f64,
    dim: usize,
    n: usize,
) -> Result<f64> {
    let pts = grid_points(dim, n);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|x| {
            let (v, g) = field(x)?;
            Ok(0.5 * v * v + 0.5 * c * c * g.iter().map(|d| d * d).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / pts.len() as f64)
}

/// `|u_net − u_ref|` on the midpoint grid, one row per point: coordinates
/// followed by the misfit.
pub fn misfit_field(
    p: &DgmParams,
    reference: &(dyn Fn(&[f64], f64) -> f64 + Sync),
    t: f64,
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    grid_points(p.spatial_dim(), n)
        .into_par_iter()
        .map(|x| {
            let u = p.forward(&with_time(&x, t))?[0];
            let mut row = x.clone();
            row.push((u - reference(&x, t)).abs());
            Ok(row)
        })
        .collect()
}

/// Writes misfit rows under the given `# rkpinn ...` metadata line.
pub fn write_misfit_csv(rows: &[Vec<f64>], meta: &str, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{meta}")?;
    match rows.first().map(Vec::len) {
        Some(2) => writeln!(w, "x,misfit")?,
        _ => writeln!(w, "x,y,misfit")?,
    }
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Composite 4-point Gauss rule on `[0, 1]` with `cells` cells.
fn composite_rule(cells: usize) -> (Vec<f64>, Vec<f64>) {
    let g = gauss_legendre::<f64>(4).expect("4-point rule");
    let h = 1.0 / cells as f64;
    let mut x = Vec::with_capacity(4 * cells);
    let mut w = Vec::with_capacity(4 * cells);
    for c in 0..cells {
        for (gx, gw) in g.nodes.iter().zip(&g.weights) {
            x.push((c as f64 + gx) * h);
            w.push(gw * h);
        }
    }
    (x, w)
}

/// `∫∫ u0 φ_a(x) φ_b(y)` for all listed index pairs, by a separable
/// composite Gauss rule.
fn project_separable(
    u0: impl Fn(f64, f64) -> f64 + Sync,
    phi: impl Fn(usize, f64) -> f64 + Sync,
    indices: &[usize],
    cells: usize,
) -> Vec<Vec<f64>> {
    let (x, w) = composite_rule(cells);
    let basis: Vec<Vec<f64>> = indices
        .iter()
        .map(|&m| x.iter().zip(&w).map(|(&xi, &wi)| phi(m, xi) * wi).collect())
        .collect();
    // t[j][a] = Σ_i B_a(x_i) u0(x_i, y_j)
    let t: Vec<Vec<f64>> = x
        .par_iter()
        .map(|&yj| {
            let col: Vec<f64> = x.iter().map(|&xi| u0(xi, yj)).collect();
            basis
                .iter()
                .map(|b| b.iter().zip(&col).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect();
    (0..indices.len())
        .map(|a| {
            (0..indices.len())
                .map(|b| (0..x.len()).map(|j| t[j][a] * basis[b][j]).sum())
                .collect()
        })
        .collect()
}

/// Separation-of-variables solution of the Dirichlet wave problem on the
/// unit square: `Σ A_mn cos(ω_mn c t) sin(mπx) sin(nπy)`, `ω_mn = π√(m²+n²)`.
#[derive(Debug, Clone)]
pub struct WaveReference {
    pub c: f64,
    /// `(m, n, A_mn)`.
    pub terms: Vec<(usize, usize, f64)>,
}

impl WaveReference {
    pub fn new(problem: &ProblemSpec, modes: usize, count: ModeCount) -> Self {
        let p = problem.clone();
        Self::from_initial(move |x, y| p.initial(&[x, y])[0], problem.coeff, modes, count, 400)
    }

    pub fn from_initial(
        u0: impl Fn(f64, f64) -> f64 + Sync,
        c: f64,
        modes: usize,
        count: ModeCount,
        cells: usize,
    ) -> Self {
        let mut pairs: Vec<(usize, usize)> = (1..=modes).flat_map(|m| (1..=modes).map(move |n| (m, n))).collect();
        if count == ModeCount::Total {
            pairs.sort_by_key(|&(m, n)| (m * m + n * n, m));
            pairs.truncate(modes);
        }
        let idx: Vec<usize> = (1..=pairs.iter().map(|&(m, n)| m.max(n)).max().unwrap_or(0)).collect();
        let a = project_separable(u0, |m, x| (m as f64 * PI * x).sin(), &idx, cells);
        let terms = pairs.into_iter().map(|(m, n)| (m, n, 4.0 * a[m - 1][n - 1])).collect();
        Self { c, terms }
    }

    pub fn coefficient(&self, m: usize, n: usize) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == m && t.1 == n).map(|t| t.2)
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(m, n, a)| {
                let w = PI * ((m * m + n * n) as f64).sqrt();
                a * (w * self.c * t).cos() * (m as f64 * PI * x).sin() * (n as f64 * PI * y).sin()
            })
            .sum()
    }
}

/// Cosine-series solution of the Neumann heat problem on the unit square.
#[derive(Debug, Clone)]
pub struct HeatReference {
    pub k: f64,
    /// `coeffs[m][n]` for `cos(mπx) cos(nπy)`, `m, n < modes`.
    pub coeffs: Vec<Vec<f64>>,
}

impl HeatReference {
    pub fn new(problem: &ProblemSpec, modes: usize) -> Self {
        let p = problem.clone();
        let raw = project_separable(
            move |x, y| p.initial(&[x, y])[0],
            |m, x| (m as f64 * PI * x).cos(),
            &(0..modes).collect::<Vec<_>>(),
            400,
        );
        let norm = |m: usize| if m == 0 { 1.0 } else { 2.0 };
        let coeffs = (0..modes)
            .map(|m| (0..modes).map(|n| norm(m) * norm(n) * raw[m][n]).collect())
            .collect();
        Self {
            k: problem.coeff,
            coeffs,
        }
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (m, row) in self.coeffs.iter().enumerate() {
            let cx = (m as f64 * PI * x).cos();
            for (n, a) in row.iter().enumerate() {
                let decay = (-self.k * PI * PI * ((m * m + n * n) as f64) * t).exp();
                acc += a * decay * cx * (n as f64 * PI * y).cos();
            }
        }
        acc
    }
}

/// A field `(x, t) ↦ u`.
pub type Field = Box<dyn Fn(&[f64], f64) -> f64 + Sync>;

/// Reference solution of a problem.
pub fn reference_solution(cfg: &ExperimentConfig) -> Field {
    let problem = cfg.problem_spec();
    match cfg.problem {
        ProblemKind::Heat1d => Box::new(move |x, t| problem.exact(x, t).expect("closed form")),
        ProblemKind::Wave2d => {
            let r = WaveReference::new(&problem, cfg.modes, cfg.mode_count);
            Box::new(move |x, t| r.eval(x[0], x[1], t))
        }
        ProblemKind::Heat2d | ProblemKind::Heat2dDiscontinuous => {
            let r = HeatReference::new(&problem, 48);
            Box::new(move |x, t| r.eval(x[0], x[1], t))
        }
    }
}

/// Total variation of `t ↦ u(t, x)` over `times`.
pub fn time_variation(p: &DgmParams, x: &[f64], times: &[f64]) -> Result<f64> {
    let vals: Vec<f64> = times
        .iter()
        .map(|&t| p.forward(&with_time(x, t)).map(|u| u[0]))
        .collect::<Result<_>>()?;
    Ok(vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Relative `L²(Ω × (0, T))` error against a reference, midpoint rule.
pub fn relative_l2_error(
    p: &DgmParams,
    reference: &(dyn Fn(&[f64], f64) -> f64 + Sync),
    t_end: f64,
    n: usize,
) -> Result<f64> {
    let pts = grid_points(p.spatial_dim(), n);
    let parts: Vec<(f64, f64)> = midpoints(n)
        .par_iter()
        .map(|&s| {
            let t = s * t_end;
            let mut num = 0.0;
            let mut den = 0.0;
            for x in &pts {
                let u = p.forward(&with_time(x, t))?[0];
                let r = reference(x, t);
                num += (u - r) * (u - r);
                den += r * r;
            }
            Ok((num, den))
        })
        .collect::<Result<_>>()?;
    let (num, den) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((num / den).sqrt())
}

/// Outcome of one scheme in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub label: String,
    pub final_loss: f64,
    /// Conserved quantity (total heat or wave energy) at the diagnostic times.
    pub conserved: Vec<(f64, f64)>,
    /// `max_t |H(t) − H(0)|`.
    pub drift: f64,
    pub max_misfit: f64,
    /// Early-time variation at the disk centre (discontinuous heat only).
    pub smoothing_tv: Option<f64>,
    /// Relative space-time error (problems with a closed-form solution).
    pub rel_l2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub results: Vec<SchemeResult>,
}

impl ExperimentSummary {
    pub fn get(&self, label: &str) -> Option<&SchemeResult> {
        self.results.iter().find(|r| r.label == label)
    }
}

/// `# rkpinn v<version> seed=<s>`, plus the series truncation for the wave.
pub fn metadata(cfg: &ExperimentConfig) -> String {
    let mut s = format!("# rkpinn v{} seed={}", crate::VERSION, cfg.seed);
    if cfg.problem == ProblemKind::Wave2d {
        let mc = match cfg.mode_count {
            ModeCount::PerIndex => "per_index",
            ModeCount::Total => "total",
        };
        s += &format!(" modes={} mode_count={mc}", cfg.modes);
    }
    s
}

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Diagnostics of a trained network, without writing files.
pub fn evaluate(cfg: &ExperimentConfig, label: &str, out: &TrainOutcome) -> Result<(SchemeResult, Vec<Vec<f64>>)> {
    let problem = cfg.problem_spec();
    let p = &out.params;
    let reference = reference_solution(cfg);
    let times: Vec<f64> = (0..cfg.diagnostic_times)
        .map(|i| problem.t_end * i as f64 / (cfg.diagnostic_times - 1) as f64)
        .collect();
    let conserved: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| {
            let v = if problem.is_wave() {
                wave_energy(p, problem.coeff, t, cfg.grid)?
            } else {
                total_heat(p, t, cfg.grid)?
            };
            Ok((t, v))
        })
        .collect::<Result<_>>()?;
    let h0 = conserved[0].1;
    let drift = conserved.iter().map(|(_, h)| (h - h0).abs()).fold(0.0, f64::max);
    let misfit = misfit_field(p, reference.as_ref(), problem.t_end, cfg.grid)?;
    let max_misfit = misfit.iter().map(|r| *r.last().unwrap()).fold(0.0, f64::max);
    let smoothing_tv = match cfg.problem {
        ProblemKind::Heat2dDiscontinuous => {
            let early: Vec<f64> = (0..=40).map(|i| 0.1 * problem.t_end * i as f64 / 40.0).collect();
            Some(time_variation(p, &[0.6, 0.7], &early)?)
        }
        _ => None,
    };
    let rel_l2 = match cfg.problem {
        ProblemKind::Heat1d => Some(relative_l2_error(p, reference.as_ref(), problem.t_end, cfg.grid)?),
        _ => None,
    };
    let final_loss = out.history.last().map_or(f64::NAN, |r| r.costs.total());
    Ok((
        SchemeResult {
            label: label.to_string(),
            final_loss,
            conserved,
            drift,
            max_misfit,
            smoothing_tv,
            rel_l2,
        },
        misfit,
    ))
}

/// Trains every configured scheme and writes, per scheme,
/// `<label>_history.csv`, `<label>_diagnostic.csv`, `<label>_misfit.csv`
/// and `<label>.ckpt`, plus `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.outputs)?;
    let meta = metadata(cfg);
    let diag_name = if cfg.problem == ProblemKind::Wave2d {
        "wave_energy"
    } else {
        "total_heat"
    };
    let mut results = Vec::new();
    for scheme in cfg.schemes() {
        let label = cfg.label(scheme);
        let tc = cfg.training_config(scheme)?;
        let out = train(&tc)?;
        let dir = &cfg.outputs;

        let mut w = create(dir.join(format!("{label}_history.csv")))?;
        write_history_csv(&out.history, cfg.seed, &mut w)?;
        w.flush()?;
        save_checkpoint(&out.params, dir.join(format!("{label}.ckpt")))?;

        let (res, misfit) = evaluate(cfg, &label, &out)?;
        let mut w = create(dir.join(format!("{label}_diagnostic.csv")))?;
        writeln!(w, "{meta}")?;
        writeln!(w, "t,{diag_name}")?;
        for (t, v) in &res.conserved {
            writeln!(w, "{t:e},{v:e}")?;
        }
        w.flush()?;
        let mut w = create(dir.join(format!("{label}_misfit.csv")))?;
        write_misfit_csv(&misfit, &meta, &mut w)?;
        w.flush()?;
        results.push(res);
    }

    let mut w = create(cfg.outputs.join("summary.csv"))?;
    writeln!(w, "{meta}")?;
    writeln!(w, "scheme,final_loss,drift,max_misfit,smoothing_tv,rel_l2")?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
    for r in &results {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{},{}",
            r.label,
            r.final_loss,
            r.drift,
            r.max_misfit,
            opt(r.smoothing_tv),
            opt(r.rel_l2)
        )?;
    }
    w.flush()?;
    Ok(ExperimentSummary { results })
}

/// The uniform time-sampling baseline on its own.
pub fn uniform_time_baseline(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let mut c = cfg.clone();
    c.set_schemes(&[SchemeName::Uniform]);
    run_experiment(&c)
}

#[cfg(test)]
mod tests;
