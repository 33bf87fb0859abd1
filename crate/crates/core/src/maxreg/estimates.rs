use nalgebra::DVector;

use super::{EvolutionOperator, Method, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::polybasis::{gauss_legendre, lagrange_deriv_unchecked, lagrange_unchecked, Family};

/// Discrete maximal-regularity functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimate {
    /// `|A^{1/2}U_m|² + Σ k Σ b_i (|Û'(t_ni)|² + |A U_ni|²)` against
    /// `|A^{1/2}u0|² + Σ k Σ b_i |f_ni|²`, over the record's sample points.
    /// Gauss, Radau IIA, cG and dG.
    StageQuadrature,
    /// Lobatto IIIA through its modified cG form: integrals of the stage
    /// interpolant evaluated with the `(q-1)`-point Gauss rule.
    LobattoGauss,
    /// Trapezoidal rule (two-stage Lobatto IIIA) written with nodal values.
    Trapezoidal,
}

impl Estimate {
    pub fn name(self) -> &'static str {
        match self {
            Estimate::StageQuadrature => "stage-quadrature",
            Estimate::LobattoGauss => "lobatto-gauss",
            Estimate::Trapezoidal => "trapezoidal",
        }
    }

    /// Natural estimate for a method.
    pub fn for_method(method: &Method) -> Estimate {
        match method {
            Method::Collocation(s) if s.family == Family::LobattoIIIA => Estimate::LobattoGauss,
            _ => Estimate::StageQuadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// `lhs = rhs`.
    Equality,
    /// `lhs ≤ rhs`.
    Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrValue {
    pub lhs: f64,
    pub rhs: f64,
    pub claim: Claim,
}

impl MrValue {
    /// `(lhs - rhs) / max(rhs, 1)`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs) / self.rhs.max(1.0)
    }

    /// Equality: `|lhs - rhs| ≤ tol · max(rhs, 1)`.
    /// Inequality: `lhs - rhs ≤ tol · rhs`.
    pub fn holds(&self, tol: f64) -> bool {
        let diff = self.lhs - self.rhs;
        match self.claim {
            Claim::Equality => diff.abs() <= tol * self.rhs.max(1.0),
            Claim::Inequality => diff <= tol * self.rhs,
        }
    }
}

fn mismatch(estimate: Estimate, method: &Method) -> Error {
    Error::EstimateMismatch {
        estimate: estimate.name().into(),
        method: method.to_string(),
    }
}

/// Evaluates the natural estimate of the record's method after `m` steps.
pub fn mr_residual(tr: &TrajectoryRecord, op: &EvolutionOperator, m: usize) -> Result<MrValue> {
    mr_residual_with(tr, op, m, Estimate::for_method(&tr.method))
}

pub fn mr_residual_with(
    tr: &TrajectoryRecord,
    op: &EvolutionOperator,
    m: usize,
    estimate: Estimate,
) -> Result<MrValue> {
    if m > tr.intervals() {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: tr.intervals(),
        });
    }
    let claim = match (estimate, &tr.method) {
        (Estimate::StageQuadrature, Method::Collocation(s)) => match s.family {
            Family::Gauss => Claim::Equality,
            Family::RadauIIA => Claim::Inequality,
            Family::LobattoIIIA => return Err(mismatch(estimate, &tr.method)),
        },
        (Estimate::StageQuadrature, Method::ContinuousGalerkin { .. }) => Claim::Equality,
        (Estimate::StageQuadrature, Method::DiscontinuousGalerkin { .. }) => Claim::Inequality,
        (Estimate::LobattoGauss, Method::Collocation(s)) if s.family == Family::LobattoIIIA => Claim::Equality,
        (Estimate::Trapezoidal, Method::Collocation(s)) if s.family == Family::LobattoIIIA && s.q == 2 => {
            Claim::Equality
        }
        _ => return Err(mismatch(estimate, &tr.method)),
    };

    let mut lhs = op.energy(&tr.nodal[m]);
    let mut rhs = op.energy(&op.u0);
    let steps = tr.partition.steps();
    match estimate {
        Estimate::StageQuadrature => {
            for n in 0..m {
                let k = steps[n];
                for (i, &b) in tr.stage_weights.iter().enumerate() {
                    let au = &op.a * &tr.stages[n][i];
                    lhs += k * b * (tr.stage_derivs[n][i].norm_squared() + au.norm_squared());
                    rhs += k * b * tr.stage_forcing[n][i].norm_squared();
                }
            }
        }
        Estimate::LobattoGauss => {
            let c = &tr.stage_nodes;
            let q = c.len();
            let gauss = gauss_legendre::<f64>(q - 1)?;
            let d = op.dim();
            for n in 0..m {
                let k = steps[n];
                for (&x, &w) in gauss.nodes.iter().zip(&gauss.weights) {
                    let mut u = DVector::zeros(d);
                    let mut du = DVector::zeros(d);
                    let mut f = DVector::zeros(d);
                    for i in 0..q {
                        let l = lagrange_unchecked(c, i, x);
                        u += &tr.stages[n][i] * l;
                        du += &tr.stages[n][i] * (lagrange_deriv_unchecked(c, i, x) / k);
                        f += &tr.stage_forcing[n][i] * l;
                    }
                    lhs += k * w * (du.norm_squared() + (&op.a * &u).norm_squared());
                    rhs += k * w * f.norm_squared();
                }
            }
        }
        Estimate::Trapezoidal => {
            for n in 0..m {
                let k = steps[n];
                let du = (&tr.nodal[n + 1] - &tr.nodal[n]) / k;
                let au = &op.a * (&tr.nodal[n + 1] + &tr.nodal[n]) * 0.5;
                let f = (&tr.stage_forcing[n][0] + &tr.stage_forcing[n][1]) * 0.5;
                lhs += k * (du.norm_squared() + au.norm_squared());
                rhs += k * f.norm_squared();
            }
        }
    }
    Ok(MrValue { lhs, rhs, claim })
}
