//! Classical (non-neural) time steppers on matrix parabolic problems
//! `u' + A u = f`, and evaluation of the discrete maximal `L²` regularity
//! estimates they satisfy.
//!
//! `|A^{1/2} v|²` is always evaluated as `(A v, v)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polybasis::CollocationScheme;
use crate::timegrid::TimePartition;

mod collocation;
mod convergence;
mod estimates;
mod galerkin;
mod suite;

pub use collocation::{collocation_polynomial_solve, rk_solve};
pub use convergence::{observed_order, scalar_rk_final};
pub use estimates::{mr_residual, mr_residual_with, Claim, Estimate, MrValue};
pub use galerkin::{cg_solve, dg_solve, lobatto_modified_cg_defect};
pub use suite::{verify_mr_suite, MrReport, MrRow, SuiteScheme};

type Forcing = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// `u' + A u = f(t)`, `u(0) = u0`, with `A` symmetric positive definite.
#[derive(Clone)]
pub struct EvolutionOperator {
    pub a: DMatrix<f64>,
    forcing: Forcing,
    pub u0: DVector<f64>,
}

impl fmt::Debug for EvolutionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionOperator")
            .field("dim", &self.dim())
            .finish_non_exhaustive()
    }
}

impl EvolutionOperator {
    pub fn new(
        a: DMatrix<f64>,
        forcing: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
        u0: DVector<f64>,
    ) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || u0.len() != d {
            return Err(Error::Operator(format!(
                "A is {}x{}, u0 has length {}",
                a.nrows(),
                a.ncols(),
                u0.len()
            )));
        }
        let norm = a.norm();
        if (&a - a.transpose()).norm() > 1e-12 * norm {
            return Err(Error::Operator("A is not symmetric".into()));
        }
        let min_ev = nalgebra::SymmetricEigen::new(a.clone()).eigenvalues.min();
        if !(min_ev > 1e-12 * norm) {
            return Err(Error::Operator(format!(
                "A is not positive definite (smallest eigenvalue {min_ev:e})"
            )));
        }
        Ok(Self {
            a,
            forcing: Arc::new(forcing),
            u0,
        })
    }

    /// Homogeneous problem (`f = 0`).
    pub fn homogeneous(a: DMatrix<f64>, u0: DVector<f64>) -> Result<Self> {
        let d = a.nrows();
        Self::new(a, move |_| DVector::zeros(d), u0)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn forcing(&self, t: f64) -> DVector<f64> {
        (self.forcing)(t)
    }

    /// `|A^{1/2} v|² = (A v, v)`.
    pub fn energy(&self, v: &DVector<f64>) -> f64 {
        (&self.a * v).dot(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

/// Second-difference matrix `-u''` on `m` points with spacing `h`, plus
/// `shift · I`. Neumann uses a cell-face reflection, which keeps the matrix
/// symmetric (and only semidefinite unless `shift > 0`).
pub fn laplacian_1d(m: usize, h: f64, bc: BoundaryCondition, shift: f64) -> Result<DMatrix<f64>> {
    if m < 2 {
        return Err(Error::Operator(format!("need at least 2 points, got {m}")));
    }
    let s = 1.0 / (h * h);
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = 2.0 * s + shift;
        if i > 0 {
            a[(i, i - 1)] = -s;
        }
        if i + 1 < m {
            a[(i, i + 1)] = -s;
        }
    }
    if bc == BoundaryCondition::Neumann {
        a[(0, 0)] = s + shift;
        a[(m - 1, m - 1)] = s + shift;
    }
    Ok(a)
}

/// Which time discretization produced a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Collocation(CollocationScheme),
    /// cG(q): continuous piecewise polynomials of degree `q`.
    ContinuousGalerkin {
        q: usize,
    },
    /// dG(q-1): discontinuous piecewise polynomials of degree `q - 1`.
    DiscontinuousGalerkin {
        q: usize,
    },
}

impl Method {
    pub fn q(&self) -> usize {
        match self {
            Method::Collocation(s) => s.q,
            Method::ContinuousGalerkin { q } | Method::DiscontinuousGalerkin { q } => *q,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Collocation(s) => s.family.name().to_string(),
            Method::ContinuousGalerkin { .. } => "cg".into(),
            Method::DiscontinuousGalerkin { .. } => "dg".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(q={})", self.label(), self.q())
    }
}

/// Everything the maximal-regularity functionals need from a solve.
///
/// Per interval `n` the record holds values at `q` reference points
/// `stage_nodes` (collocation nodes, Gauss points for cG, Radau points for
/// dG) together with the weights of the quadrature on those points.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub partition: TimePartition,
    pub method: Method,
    /// `U_0 = u0, U_1, …, U_N`.
    pub nodal: Vec<DVector<f64>>,
    pub stage_nodes: Vec<f64>,
    pub stage_weights: Vec<f64>,
    /// `U_{ni}`: for collocation the stage values, for cG `Û(t_ni)`, for dG
    /// `U(t_ni)`.
    pub stages: Vec<Vec<DVector<f64>>>,
    /// `Û'(t_ni)`.
    pub stage_derivs: Vec<Vec<DVector<f64>>>,
    /// Forcing as seen by the scheme at the stage points: `f(t_ni)` for
    /// collocation, `(P_{q-1} f)(t_ni)` for the Galerkin methods.
    pub stage_forcing: Vec<Vec<DVector<f64>>>,
}

impl TrajectoryRecord {
    pub fn intervals(&self) -> usize {
        self.stages.len()
    }
}

/// Dense LU solve with the interval index attached to failures.
pub(crate) fn lu_solve(m: DMatrix<f64>, rhs: &DVector<f64>, interval: usize) -> Result<DVector<f64>> {
    let x = m.lu().solve(rhs).ok_or(Error::SingularSystem { interval })?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularSystem { interval })
    }
}
