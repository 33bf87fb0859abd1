//! Model problems: heat and wave equations on the unit square and a 1-D heat
//! problem with a known solution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxreg::BoundaryCondition;
use crate::net::OutputJet;
use crate::sobol::{sample_boundary, sample_interior, BoxDomain, SobolStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// `u_t = k Δu`, Neumann, smooth bump on a small disk.
    Heat2d,
    /// As `Heat2d` with the indicator of the disk as initial value.
    Heat2dDiscontinuous,
    /// `u_tt = c² Δu`, homogeneous Dirichlet, written as a first-order system.
    Wave2d,
    /// `u_t = k u_xx` on `(0, 1)`, Neumann, exact solution `e^{-π²kt} cos(πx)`.
    Heat1d,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Heat2d => "heat2d",
            ProblemKind::Heat2dDiscontinuous => "heat2d_discontinuous",
            ProblemKind::Wave2d => "wave2d",
            ProblemKind::Heat1d => "heat1d",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ProblemKind::Heat2d,
            ProblemKind::Heat2dDiscontinuous,
            ProblemKind::Wave2d,
            ProblemKind::Heat1d,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown problem `{s}`")))
    }
}

/// A boundary training point with its outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub domain: BoxDomain,
    pub t_end: f64,
    /// Diffusivity `k` (heat) or wave speed `c`.
    pub coeff: f64,
    pub boundary: BoundaryCondition,
}

const HEAT_CENTER: [f64; 2] = [0.6, 0.7];
const HEAT_RADIUS2: f64 = 0.01;
const WAVE_CENTER: [f64; 2] = [0.3, 0.5];
const WAVE_RADIUS: f64 = 0.25;

fn dist2(x: &[f64], c: [f64; 2]) -> f64 {
    (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        let (dim, coeff, boundary) = match kind {
            ProblemKind::Heat2d | ProblemKind::Heat2dDiscontinuous => (2, 0.02, BoundaryCondition::Neumann),
            ProblemKind::Wave2d => (2, 0.5, BoundaryCondition::Dirichlet),
            ProblemKind::Heat1d => (1, 0.1, BoundaryCondition::Neumann),
        };
        Self {
            kind,
            domain: BoxDomain::unit(dim),
            t_end: 1.0,
            coeff,
            boundary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coeff > 0.0 && self.coeff.is_finite()) {
            return Err(Error::Config(format!(
                "coefficient must be positive, got {}",
                self.coeff
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if self.domain != BoxDomain::unit(self.spatial_dim()) {
            return Err(Error::Config("only the unit box is supported".into()));
        }
        Ok(())
    }

    pub fn spatial_dim(&self) -> usize {
        match self.kind {
            ProblemKind::Heat1d => 1,
            _ => 2,
        }
    }

    /// Number of solution components `M` (2 for the wave system `(u, v)`).
    pub fn components(&self) -> usize {
        match self.kind {
            ProblemKind::Wave2d => 2,
            _ => 1,
        }
    }

    pub fn is_wave(&self) -> bool {
        self.kind == ProblemKind::Wave2d
    }

    /// Initial value of every component.
    pub fn initial(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ProblemKind::Heat2d => {
                let r2 = dist2(x, HEAT_CENTER);
                // points on the circle count as inside
                vec![if r2 <= HEAT_RADIUS2 {
                    0.5 + 0.5 * (10.0 * PI * r2.sqrt()).cos()
                } else {
                    0.0
                }]
            }
            ProblemKind::Heat2dDiscontinuous => {
                vec![if dist2(x, HEAT_CENTER) <= HEAT_RADIUS2 {
                    1.0
                } else {
                    0.0
                }]
            }
            ProblemKind::Wave2d => {
                let r2 = dist2(x, WAVE_CENTER);
                let u = if r2 <= WAVE_RADIUS * WAVE_RADIUS {
                    0.5 + 0.5 * (4.0 * PI * r2.sqrt()).cos()
                } else {
                    0.0
                };
                vec![u, 0.0]
            }
            ProblemKind::Heat1d => vec![(PI * x[0]).cos()],
        }
    }

    /// Closed-form solution, where one is available.
    pub fn exact(&self, x: &[f64], t: f64) -> Option<f64> {
        match self.kind {
            ProblemKind::Heat1d => Some((-PI * PI * self.coeff * t).exp() * (PI * x[0]).cos()),
            _ => None,
        }
    }

    /// `L` applied to the network output: `-k Δu` for heat, `(-v, -c² Δu)`
    /// for the wave system. The first `spatial_dim` jet directions must be
    /// the spatial coordinates.
    pub fn apply_operator(&self, jet: &OutputJet, lv: &mut [f64]) {
        let lap = |m: usize| (0..self.spatial_dim()).map(|k| jet.d2(m, k)).sum::<f64>();
        if self.is_wave() {
            lv[0] = -jet.value(1);
            lv[1] = -self.coeff * self.coeff * lap(0);
        } else {
            lv[0] = -self.coeff * lap(0);
        }
    }

    /// Adds the pullback of `dlv` through [`Self::apply_operator`] to `cot`.
    pub fn operator_pullback(&self, dlv: &[f64], cot: &mut OutputJet) {
        let d = self.spatial_dim();
        if self.is_wave() {
            *cot.value_mut(1) -= dlv[0];
            let s = self.coeff * self.coeff * dlv[1];
            for k in 0..d {
                *cot.d2_mut(0, k) -= s;
            }
        } else {
            let s = self.coeff * dlv[0];
            for k in 0..d {
                *cot.d2_mut(0, k) -= s;
            }
        }
    }

    /// Interior sampler over the spatial domain.
    pub fn interior_stream(&self) -> Result<SobolStream> {
        SobolStream::with_dim(self.spatial_dim())
    }

    pub fn sample_interior(&self, stream: &mut SobolStream, n: usize) -> Result<Vec<Vec<f64>>> {
        sample_interior(stream, n, &self.domain)
    }

    /// Boundary points. In 1-D the boundary is the two end points and `n`
    /// is ignored; in 2-D points are spread by arc length.
    pub fn sample_boundary(&self, stream: &mut SobolStream, n: usize) -> Result<Vec<BoundarySample>> {
        if self.spatial_dim() == 1 {
            return Ok(vec![
                BoundarySample {
                    x: vec![0.0],
                    normal: vec![-1.0],
                },
                BoundarySample {
                    x: vec![1.0],
                    normal: vec![1.0],
                },
            ]);
        }
        Ok(sample_boundary(stream, n)?
            .into_iter()
            .map(|b| BoundarySample {
                x: b.x.to_vec(),
                normal: b.face.normal().to_vec(),
            })
            .collect())
    }

    /// Measure of the boundary: perimeter in 2-D, point count in 1-D.
    pub fn boundary_measure(&self) -> f64 {
        match self.spatial_dim() {
            1 => 2.0,
            _ => 4.0,
        }
    }
}
