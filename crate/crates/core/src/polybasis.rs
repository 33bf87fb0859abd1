//! Collocation nodes, quadrature rules, Lagrange bases and Runge–Kutta
//! coefficients on the reference interval `[0, 1]`.
//!
//! Everything here is generic over the scalar type so the same code path can
//! be run in double-double arithmetic when round-off would otherwise hide the
//! quantity being measured (e.g. sixth-order convergence slopes).

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type accepted by the generic collocation code.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T: Float + FromPrimitive + Debug + Send + Sync + 'static> Real for T {}

/// Largest stage count accepted by [`make_scheme`].
pub const MAX_STAGES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Gauss,
    RadauIIA,
    LobattoIIIA,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gauss => "gauss",
            Family::RadauIIA => "radau",
            Family::LobattoIIIA => "lobatto",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" => Ok(Family::Gauss),
            "radau" | "radauiia" | "radau_iia" => Ok(Family::RadauIIA),
            "lobatto" | "lobattoiiia" | "lobatto_iiia" => Ok(Family::LobattoIIIA),
            other => Err(Error::Config(format!("unknown scheme family `{other}`"))),
        }
    }
}

#[inline]
fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

/// Quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T = f64> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_0^1 f` approximated by the rule.
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    /// `∫_lo^hi f` by affine mapping.
    pub fn integrate_on(&self, lo: T, hi: T, mut f: impl FnMut(T) -> T) -> T {
        let h = hi - lo;
        h * self.integrate(|x| f(lo + h * x))
    }
}

/// Returns `(P_n(x), P_{n-1}(x))` by the three-term recurrence. For `n = 0`
/// the second entry is zero.
pub fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::zero();
    let mut p = T::one();
    for k in 1..=n {
        let kf = lit::<T>(k as f64);
        let next = ((kf + kf - T::one()) * x * p - (kf - T::one()) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// `P_n'(x)` for `|x| < 1`.
fn legendre_deriv_interior<T: Real>(n: usize, x: T) -> T {
    if n == 0 {
        return T::zero();
    }
    let (p, p1) = legendre_pair(n, x);
    lit::<T>(n as f64) * (x * p - p1) / (x * x - T::one())
}

/// Value and derivative of the polynomial whose roots define a family.
///
/// Gauss: `P_q`; right Radau: `P_q - P_{q-1}`; Lobatto: `P_{q-2} - P_q`,
/// which is proportional to `(1 - x²) P'_{q-1}`.
fn defining_poly<T: Real>(family: Family, q: usize, x: T) -> (T, T) {
    match family {
        Family::Gauss => (legendre_pair(q, x).0, legendre_deriv_interior(q, x)),
        Family::RadauIIA => {
            let (p, p1) = legendre_pair(q, x);
            (
                p - p1,
                legendre_deriv_interior(q, x) - legendre_deriv_interior(q - 1, x),
            )
        }
        Family::LobattoIIIA => {
            let p2 = legendre_pair(q - 2, x).0;
            let p = legendre_pair(q, x).0;
            (
                p2 - p,
                legendre_deriv_interior(q - 2, x) - legendre_deriv_interior(q, x),
            )
        }
    }
}

/// Roots of `f` strictly inside `(-1, 1)`: sign changes on a Chebyshev grid,
/// then Newton iteration safeguarded by bisection.
fn interior_roots<T: Real>(f: impl Fn(T) -> (T, T), expected: usize, what: &'static str, q: usize) -> Result<Vec<T>> {
    let grid_n = 64 * (expected + 2);
    let grid: Vec<T> = (1..grid_n)
        .map(|k| lit::<T>(-(std::f64::consts::PI * k as f64 / grid_n as f64).cos()))
        .collect();
    let vals: Vec<T> = grid.iter().map(|&x| f(x).0).collect();

    let mut roots = Vec::with_capacity(expected);
    for k in 0..grid.len() {
        if vals[k] == T::zero() {
            roots.push(grid[k]);
            continue;
        }
        if k == 0 || vals[k - 1] == T::zero() || (vals[k - 1] > T::zero()) == (vals[k] > T::zero()) {
            continue;
        }
        roots.push(safeguarded_newton(&f, grid[k - 1], grid[k], what, q)?);
    }
    if roots.len() != expected {
        return Err(Error::RootNotConverged { what, q });
    }
    Ok(roots)
}

fn safeguarded_newton<T: Real>(
    f: &impl Fn(T) -> (T, T),
    mut lo: T,
    mut hi: T,
    what: &'static str,
    q: usize,
) -> Result<T> {
    // Stops when |f| stops improving rather than against T::epsilon(), which
    // some extended-precision types report incorrectly.
    let two = lit::<T>(2.0);
    let f_lo_positive = f(lo).0 > T::zero();
    let mut x = (lo + hi) / two;
    let mut best = (T::infinity(), x);
    let mut stale = 0;
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
            stale = 0;
        } else {
            stale += 1;
            if stale >= 4 {
                return Ok(best.1);
            }
        }
        if (fx > T::zero()) == f_lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::RootNotConverged { what, q })
}

/// `n`-point Gauss–Legendre rule on `[0, 1]` (exact for degree `2n - 1`).
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(Error::UnsupportedScheme {
            family: Family::Gauss,
            q: 0,
            reason: "quadrature needs at least one node",
        });
    }
    let two = lit::<T>(2.0);
    let xs = interior_roots(|x| defining_poly(Family::Gauss, n, x), n, "Gauss-Legendre nodes", n)?;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x in &xs {
        let dp = legendre_deriv_interior(n, x);
        nodes.push((x + T::one()) / two);
        weights.push(T::one() / ((T::one() - x * x) * dp * dp));
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule { nodes, weights })
}

fn symmetrize<T: Real>(nodes: &mut [T], weights: &mut [T]) {
    let n = nodes.len();
    let two = lit::<T>(2.0);
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let c = (nodes[i] + (T::one() - nodes[j])) / two;
        nodes[i] = c;
        nodes[j] = T::one() - c;
        let w = (weights[i] + weights[j]) / two;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::one() / two;
    }
}

/// Collocation nodes of a family on `[0, 1]`, strictly increasing.
pub fn collocation_nodes<T: Real>(family: Family, q: usize) -> Result<Vec<T>> {
    validate(family, q)?;
    let two = lit::<T>(2.0);
    let to_unit = |x: T| (x + T::one()) / two;
    let nodes = match family {
        Family::Gauss => gauss_legendre::<T>(q)?.nodes,
        Family::RadauIIA => {
            let mut c: Vec<T> = interior_roots(|x| defining_poly(Family::RadauIIA, q, x), q - 1, "Radau IIA nodes", q)?
                .into_iter()
                .map(to_unit)
                .collect();
            c.push(T::one());
            c
        }
        Family::LobattoIIIA => {
            let mut c = vec![T::zero()];
            c.extend(
                interior_roots(
                    |x| defining_poly(Family::LobattoIIIA, q, x),
                    q - 2,
                    "Lobatto IIIA nodes",
                    q,
                )?
                .into_iter()
                .map(to_unit),
            );
            c.push(T::one());
            let mut w = vec![T::zero(); c.len()];
            symmetrize(&mut c, &mut w);
            c
        }
    };
    Ok(nodes)
}

fn validate(family: Family, q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::UnsupportedScheme {
            family,
            q,
            reason: "stage count must be positive",
        });
    }
    if family == Family::LobattoIIIA && q < 2 {
        return Err(Error::UnsupportedScheme {
            family,
            q,
            reason: "Lobatto IIIA needs at least two stages",
        });
    }
    if q > MAX_STAGES {
        return Err(Error::UnsupportedScheme {
            family,
            q,
            reason: "stage count above supported maximum",
        });
    }
    Ok(())
}

fn check_distinct<T: Real>(nodes: &[T]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i] == nodes[j] {
                return Err(Error::DuplicateNodes(i, j));
            }
        }
    }
    Ok(())
}

/// `ℓ_i(τ) = Π_{j≠i} (τ - x_j) / (x_i - x_j)`.
pub fn lagrange_eval<T: Real>(nodes: &[T], i: usize, tau: T) -> Result<T> {
    if i >= nodes.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: nodes.len(),
        });
    }
    check_distinct(nodes)?;
    Ok(lagrange_unchecked(nodes, i, tau))
}

/// `ℓ_i'(τ)` by the product rule.
pub fn lagrange_deriv<T: Real>(nodes: &[T], i: usize, tau: T) -> Result<T> {
    if i >= nodes.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: nodes.len(),
        });
    }
    check_distinct(nodes)?;
    Ok(lagrange_deriv_unchecked(nodes, i, tau))
}

pub(crate) fn lagrange_unchecked<T: Real>(nodes: &[T], i: usize, tau: T) -> T {
    let xi = nodes[i];
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .fold(T::one(), |acc, (_, &xj)| acc * (tau - xj) / (xi - xj))
}

pub(crate) fn lagrange_deriv_unchecked<T: Real>(nodes: &[T], i: usize, tau: T) -> T {
    let xi = nodes[i];
    let mut total = T::zero();
    for (k, &xk) in nodes.iter().enumerate() {
        if k == i {
            continue;
        }
        let mut term = T::one() / (xi - xk);
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i && j != k {
                term = term * (tau - xj) / (xi - xj);
            }
        }
        total = total + term;
    }
    total
}

/// Collocation method data for one family and stage count.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationScheme<T = f64> {
    pub family: Family,
    pub q: usize,
    /// Collocation nodes `c_1 < … < c_q`.
    pub c: Vec<T>,
    /// Quadrature weights `b_i = ∫_0^1 ℓ_i`.
    pub b: Vec<T>,
    /// RK matrix, `a[i][j] = ∫_0^{c_i} ℓ_j`.
    pub a: Vec<Vec<T>>,
    /// Auxiliary interpolation nodes `0 = c̃_0 < … < c̃_q = 1`.
    pub c_tilde: Vec<T>,
}

/// Builds the double-precision scheme for `(family, q)`.
pub fn make_scheme(family: Family, q: usize) -> Result<CollocationScheme> {
    CollocationScheme::build(family, q)
}

impl<T: Real> CollocationScheme<T> {
    pub fn build(family: Family, q: usize) -> Result<Self> {
        let c = collocation_nodes::<T>(family, q)?;
        let rule = gauss_legendre::<T>(q + 2)?;
        let b: Vec<T> = (0..q)
            .map(|i| rule.integrate(|x| lagrange_unchecked(&c, i, x)))
            .collect();
        let a: Vec<Vec<T>> = (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| rule.integrate_on(T::zero(), c[i], |x| lagrange_unchecked(&c, j, x)))
                    .collect()
            })
            .collect();
        let c_tilde = auxiliary_nodes(family, &c);
        Ok(Self {
            family,
            q,
            c,
            b,
            a,
            c_tilde,
        })
    }

    /// Replaces the auxiliary nodes; they must start at 0, end at 1 and be
    /// strictly increasing with `q + 1` entries.
    pub fn with_auxiliary_nodes(mut self, c_tilde: Vec<T>) -> Result<Self> {
        let ok = c_tilde.len() == self.q + 1
            && c_tilde[0] == T::zero()
            && c_tilde[self.q] == T::one()
            && c_tilde.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::Shape(format!(
                "auxiliary nodes must be 0 = c̃_0 < … < c̃_{} = 1",
                self.q
            )));
        }
        self.c_tilde = c_tilde;
        Ok(self)
    }

    /// `m_ij = b_i a_ij + b_j a_ji - b_i b_j`.
    pub fn algebraic_stability_matrix(&self) -> Vec<Vec<T>> {
        let q = self.q;
        (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| self.b[i] * self.a[i][j] + self.b[j] * self.a[j][i] - self.b[i] * self.b[j])
                    .collect()
            })
            .collect()
    }

    /// Whether `c_1 = 0`, i.e. the first stage is explicit.
    pub fn first_stage_explicit(&self) -> bool {
        self.c[0] == T::zero()
    }

    /// Whether `c_q = 1`, so the last stage equals the step result.
    pub fn stiffly_accurate(&self) -> bool {
        self.c[self.q - 1] == T::one()
    }

    /// Polynomial degree integrated exactly by `(c, b)`.
    pub fn quadrature_degree(&self) -> usize {
        match self.family {
            Family::Gauss => 2 * self.q - 1,
            Family::RadauIIA => 2 * self.q - 2,
            Family::LobattoIIIA => 2 * self.q - 3,
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.family.name(), self.q)
    }
}

/// Default auxiliary nodes: Radau uses `{0} ∪ c`, Lobatto starts from its own
/// nodes, Gauss from `{0, 1}`; missing nodes are added by bisecting the widest
/// gap (leftmost on ties) until there are `q + 1`.
fn auxiliary_nodes<T: Real>(family: Family, c: &[T]) -> Vec<T> {
    let q = c.len();
    let mut nodes: Vec<T> = match family {
        Family::Gauss => vec![T::zero(), T::one()],
        Family::RadauIIA => std::iter::once(T::zero()).chain(c.iter().copied()).collect(),
        Family::LobattoIIIA => c.to_vec(),
    };
    let tie = lit::<T>(1e-12);
    while nodes.len() < q + 1 {
        let mut best = 0;
        let mut best_gap = T::neg_infinity();
        for k in 0..nodes.len() - 1 {
            let gap = nodes[k + 1] - nodes[k];
            if gap > best_gap + tie {
                best = k;
                best_gap = gap;
            }
        }
        let mid = (nodes[best] + nodes[best + 1]) / lit::<T>(2.0);
        nodes.insert(best + 1, mid);
    }
    nodes
}

/// Values `L_0(τ), …, L_n(τ)` of the shifted Legendre polynomials on `[0, 1]`
/// (`L_k(τ) = P_k(2τ - 1)`, `∫_0^1 L_j L_k = δ_jk / (2k + 1)`).
pub fn shifted_legendre(n: usize, tau: f64) -> Vec<f64> {
    let x = 2.0 * tau - 1.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

/// Derivatives `L_0'(τ), …, L_n'(τ)` with respect to `τ`.
pub fn shifted_legendre_deriv(n: usize, tau: f64) -> Vec<f64> {
    // P'_{k+1} = P'_{k-1} + (2k + 1) P_k, then chain rule factor 2.
    let vals = shifted_legendre(n, tau);
    let mut d = vec![0.0; n + 1];
    for k in 1..=n {
        let prev2 = if k >= 2 { d[k - 2] } else { 0.0 };
        d[k] = prev2 + 2.0 * (2.0 * (k as f64) - 1.0) * vals[k - 1];
    }
    d
}
