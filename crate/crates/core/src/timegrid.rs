//! Time partitions, the interpolation/projection operators on a single
//! interval, and the residual stencil that turns nodal values into the
//! collocation residual and its exact interval integral.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::polybasis::{
    gauss_legendre, lagrange_deriv_unchecked, lagrange_unchecked, shifted_legendre, CollocationScheme, Family,
    QuadratureRule,
};

/// Partition `0 = t_0 < t_1 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    t: Vec<f64>,
    k: Vec<f64>,
}

impl TimePartition {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(Error::Partition("need at least two nodes".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::Partition("first node must be 0".into()));
        }
        if !t.iter().all(|x| x.is_finite()) {
            return Err(Error::Partition("non-finite node".into()));
        }
        let k: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(n) = k.iter().position(|&kn| kn <= 0.0) {
            return Err(Error::Partition(format!("non-positive step k_{n}")));
        }
        Ok(Self { t, k })
    }

    /// `t_n = n T / N`.
    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        if !(t_end > 0.0) || n == 0 {
            return Err(Error::Partition("need T > 0 and N ≥ 1".into()));
        }
        let mut t: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        t[n] = t_end;
        Self::new(t)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn steps(&self) -> &[f64] {
        &self.k
    }

    pub fn intervals(&self) -> usize {
        self.k.len()
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }
}

/// How `Π_{q-1}` is realized on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Interpolation at the collocation nodes (`I_{q-1}`), Runge–Kutta case.
    Interpolation,
    /// `L²` projection (`P_{q-1}`), Galerkin case.
    L2,
}

/// Precomputed tables mapping auxiliary-node values to the residual at the
/// collocation nodes.
#[derive(Debug, Clone)]
pub struct ResidualStencil {
    pub scheme: CollocationScheme,
    /// `d[(j, i)] = ℓ̃_i'(c_j)`, shape `q × (q+1)`.
    pub d: DMatrix<f64>,
    /// `e[(j, i)] = ℓ̃_i(c_j)`, shape `q × (q+1)`.
    pub e: DMatrix<f64>,
    /// Interval-loss weights `w_j = ∫_0^1 ℓ_j`.
    pub w: Vec<f64>,
    /// Gauss rule used to integrate `|ζ|²` when the collocation weights are
    /// not exact for degree `2q - 2` (Lobatto).
    pub loss_rule: Option<QuadratureRule>,
    /// `∫_0^1 ℓ_i ℓ_j` for the collocation basis, built from `loss_rule`.
    loss_mass: Option<DMatrix<f64>>,
    pub projection: Projection,
}

/// Builds the residual stencil for a collocation scheme.
pub fn build_stencil(scheme: &CollocationScheme) -> ResidualStencil {
    let q = scheme.q;
    let d = DMatrix::from_fn(q, q + 1, |j, i| {
        lagrange_deriv_unchecked(&scheme.c_tilde, i, scheme.c[j])
    });
    let e = DMatrix::from_fn(q, q + 1, |j, i| lagrange_unchecked(&scheme.c_tilde, i, scheme.c[j]));
    let (loss_rule, loss_mass) = if scheme.family == Family::LobattoIIIA {
        // |ζ|² has degree 2q - 2; q Gauss points integrate it exactly.
        let rule = gauss_legendre::<f64>(q).expect("q >= 2");
        let mass = DMatrix::from_fn(q, q, |i, j| {
            rule.integrate(|x| lagrange_unchecked(&scheme.c, i, x) * lagrange_unchecked(&scheme.c, j, x))
        });
        (Some(rule), Some(mass))
    } else {
        (None, None)
    };
    ResidualStencil {
        scheme: scheme.clone(),
        d,
        e,
        w: scheme.b.clone(),
        loss_rule,
        loss_mass,
        projection: Projection::Interpolation,
    }
}

impl ResidualStencil {
    pub fn q(&self) -> usize {
        self.scheme.q
    }

    /// `ζ[j] = Σ_i (D[j][i] V[i] / k + E[j][i] LV[i]) - F[j]`.
    ///
    /// `v` and `lv` are `(q+1) × m`, `f` is `q × m`.
    pub fn residual_at_nodes(
        &self,
        k_n: f64,
        v: &DMatrix<f64>,
        lv: &DMatrix<f64>,
        f: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>> {
        let q = self.q();
        let m = v.ncols();
        if v.nrows() != q + 1 || lv.shape() != (q + 1, m) || f.shape() != (q, m) {
            return Err(Error::Shape(format!(
                "expected V, LV of shape ({}, m) and F of shape ({q}, m); got {:?}, {:?}, {:?}",
                q + 1,
                v.shape(),
                lv.shape(),
                f.shape()
            )));
        }
        Ok(&self.d * v / k_n + &self.e * lv - f)
    }

    /// `∫_{J_n} Σ_cols ζ² dt`, exact for the degree-`(q-1)` residual.
    pub fn interval_loss(&self, k_n: f64, zeta: &DMatrix<f64>) -> f64 {
        match &self.loss_mass {
            None => {
                let mut acc = 0.0;
                for (j, &w) in self.w.iter().enumerate() {
                    acc += w * zeta.row(j).iter().map(|z| z * z).sum::<f64>();
                }
                k_n * acc
            }
            Some(mass) => {
                let mut acc = 0.0;
                for col in 0..zeta.ncols() {
                    let z = zeta.column(col);
                    acc += (z.transpose() * mass * z)[(0, 0)];
                }
                k_n * acc
            }
        }
    }

    /// Gradient of [`Self::interval_loss`] with respect to `ζ`.
    pub fn interval_loss_grad(&self, k_n: f64, zeta: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.loss_mass {
            None => DMatrix::from_fn(zeta.nrows(), zeta.ncols(), |j, c| 2.0 * k_n * self.w[j] * zeta[(j, c)]),
            Some(mass) => mass * zeta * (2.0 * k_n),
        }
    }

    /// Weight of `ζ_j ζ_l` in the interval loss (diagonal for Gauss/Radau).
    pub fn loss_weight(&self, j: usize, l: usize) -> f64 {
        match &self.loss_mass {
            None => {
                if j == l {
                    self.w[j]
                } else {
                    0.0
                }
            }
            Some(m) => m[(j, l)],
        }
    }
}

/// Polynomial on `[0, 1]` in the shifted Legendre basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSeries {
    pub coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        shifted_legendre(self.coeffs.len() - 1, tau)
            .iter()
            .zip(&self.coeffs)
            .map(|(l, c)| l * c)
            .sum()
    }

    /// Expansion of the polynomial interpolating `values` at `nodes`.
    pub fn from_samples(nodes: &[f64], values: &[f64]) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::Shape("nodes and values must match and be non-empty".into()));
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i] == nodes[j] {
                    return Err(Error::DuplicateNodes(i, j));
                }
            }
        }
        let deg = nodes.len() - 1;
        let rule = gauss_legendre::<f64>(deg + 1)?;
        let p = |x: f64| -> f64 {
            values
                .iter()
                .enumerate()
                .map(|(i, v)| v * lagrange_unchecked(nodes, i, x))
                .sum()
        };
        let coeffs = (0..=deg)
            .map(|k| (2 * k + 1) as f64 * rule.integrate(|x| p(x) * shifted_legendre(deg, x)[k]))
            .collect();
        Ok(Self { coeffs })
    }
}

/// `L²(0,1)` projection of a polynomial given by its samples at distinct
/// nodes onto polynomials of degree `target_degree`; the top Legendre modes
/// are dropped.
pub fn l2_project(nodes: &[f64], values: &[f64], target_degree: usize) -> Result<LegendreSeries> {
    let mut s = LegendreSeries::from_samples(nodes, values)?;
    s.coeffs.truncate(target_degree + 1);
    Ok(s)
}
