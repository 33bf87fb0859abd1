use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{cg_solve, dg_solve, mr_residual_with, rk_solve, Claim, Estimate, EvolutionOperator, TrajectoryRecord};
use crate::error::Result;
use crate::polybasis::{make_scheme, Family};
use crate::timegrid::TimePartition;

/// A scheme/estimate pair exercised by [`verify_mr_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteScheme {
    Collocation(Family, usize),
    Trapezoidal,
    ContinuousGalerkin(usize),
    DiscontinuousGalerkin(usize),
}

impl SuiteScheme {
    pub fn all() -> Vec<SuiteScheme> {
        let mut v = Vec::new();
        for q in 1..=4 {
            v.push(SuiteScheme::Collocation(Family::Gauss, q));
        }
        for q in 1..=4 {
            v.push(SuiteScheme::Collocation(Family::RadauIIA, q));
        }
        for q in 2..=4 {
            v.push(SuiteScheme::Collocation(Family::LobattoIIIA, q));
        }
        v.push(SuiteScheme::Trapezoidal);
        for q in 1..=3 {
            v.push(SuiteScheme::ContinuousGalerkin(q));
        }
        for q in 1..=3 {
            v.push(SuiteScheme::DiscontinuousGalerkin(q));
        }
        v
    }

    pub fn q(self) -> usize {
        match self {
            SuiteScheme::Collocation(_, q)
            | SuiteScheme::ContinuousGalerkin(q)
            | SuiteScheme::DiscontinuousGalerkin(q) => q,
            SuiteScheme::Trapezoidal => 2,
        }
    }

    fn solve(self, op: &EvolutionOperator, part: &TimePartition) -> Result<(TrajectoryRecord, Estimate)> {
        Ok(match self {
            SuiteScheme::Collocation(fam, q) => {
                let tr = rk_solve(op, &make_scheme(fam, q)?, part)?;
                let e = Estimate::for_method(&tr.method);
                (tr, e)
            }
            SuiteScheme::Trapezoidal => (
                rk_solve(op, &make_scheme(Family::LobattoIIIA, 2)?, part)?,
                Estimate::Trapezoidal,
            ),
            SuiteScheme::ContinuousGalerkin(q) => (cg_solve(op, q, part)?, Estimate::StageQuadrature),
            SuiteScheme::DiscontinuousGalerkin(q) => (dg_solve(op, q, part)?, Estimate::StageQuadrature),
        })
    }
}

impl fmt::Display for SuiteScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteScheme::Collocation(fam, _) => f.write_str(fam.name()),
            SuiteScheme::Trapezoidal => f.write_str("trapezoidal"),
            SuiteScheme::ContinuousGalerkin(_) => f.write_str("cg"),
            SuiteScheme::DiscontinuousGalerkin(_) => f.write_str("dg"),
        }
    }
}

/// One trial of one scheme. `lhs`/`rhs` are taken at the final time;
/// `residual` is the worst relative residual over all intermediate times.
#[derive(Debug, Clone, PartialEq)]
pub struct MrRow {
    pub scheme: SuiteScheme,
    pub trial: usize,
    pub d: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub claim: Claim,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct MrReport {
    pub seed: u64,
    pub tol: f64,
    pub rows: Vec<MrRow>,
}

impl MrReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MrRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# rkpinn v{} seed={}", crate::VERSION, self.seed)?;
        writeln!(w, "scheme,q,d,N,lhs,rhs,residual,verdict")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{:e},{:e},{:e},{}",
                r.scheme,
                r.scheme.q(),
                r.d,
                r.n,
                r.lhs,
                r.rhs,
                r.residual,
                if r.pass { "pass" } else { "fail" }
            )?;
        }
        Ok(())
    }
}

/// A random trial problem: SPD `A` with a random stiffness scale, smooth
/// random forcing, random initial value and a random non-uniform partition.
pub(crate) fn random_problem(seed: u64) -> Result<(EvolutionOperator, TimePartition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=50usize);
    let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let alpha = rng.gen_range(0.05..1.0);
    let scale = 10f64.powf(rng.gen_range(-1.0..2.0));
    let mut a = (&b * b.transpose()) / d as f64 + DMatrix::identity(d, d) * alpha;
    a = (&a + a.transpose()) * (0.5 * scale);

    let u0 = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let v0 = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let v1 = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
    let v2 = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let omega = rng.gen_range(0.5..8.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let op = EvolutionOperator::new(a, move |t| &v0 + &v1 * (omega * t + phase).cos() + &v2 * t, u0)?;

    let n = rng.gen_range(3..=12usize);
    let t_end = rng.gen_range(0.5..2.0);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut t = vec![0.0];
    let mut acc = 0.0;
    for r in &raw[..n - 1] {
        acc += r / total * t_end;
        t.push(acc);
    }
    t.push(t_end);
    Ok((op, TimePartition::new(t)?))
}

/// Runs `trials` random problems through every scheme in
/// [`SuiteScheme::all`] and checks the estimate at every intermediate time.
pub fn verify_mr_suite(seed: u64, trials: usize, tol: f64) -> Result<MrReport> {
    let per_trial: Vec<Result<Vec<MrRow>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (op, part) = random_problem(seed.wrapping_add(trial as u64))?;
            let mut rows = Vec::new();
            for scheme in SuiteScheme::all() {
                let (tr, est) = scheme.solve(&op, &part)?;
                let mut worst = 0.0f64;
                let mut pass = true;
                let mut last = None;
                for m in 0..=part.intervals() {
                    let v = mr_residual_with(&tr, &op, m, est)?;
                    pass &= v.holds(tol);
                    if v.residual().abs() > worst.abs() || !v.residual().is_finite() {
                        worst = v.residual();
                    }
                    last = Some(v);
                }
                let v = last.expect("at least one time level");
                rows.push(MrRow {
                    scheme,
                    trial,
                    d: op.dim(),
                    n: part.intervals(),
                    lhs: v.lhs,
                    rhs: v.rhs,
                    residual: worst,
                    claim: v.claim,
                    pass,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(MrReport { seed, tol, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = verify_mr_suite(7, 3, 1e-9).unwrap();
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
        assert_eq!(a.rows.len(), 3 * SuiteScheme::all().len());
        let b = verify_mr_suite(7, 3, 1e-9).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn csv_layout() {
        let r = verify_mr_suite(1, 1, 1e-9).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# rkpinn v{} seed=1", crate::VERSION));
        assert_eq!(lines.next().unwrap(), "scheme,q,d,N,lhs,rhs,residual,verdict");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[0], "gauss");
        assert_eq!(first[7], "pass");
    }
}
