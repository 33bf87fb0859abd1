use crate::error::{Error, Result};
use crate::polybasis::{CollocationScheme, Real};

/// Integrates `u' = -λ u`, `u(0) = u0` to `t_end` with `n` uniform steps of a
/// collocation scheme, in any [`Real`] precision.
///
/// Used for convergence studies where the error of high-order schemes drops
/// below `f64` round-off.
pub fn scalar_rk_final<T: Real>(scheme: &CollocationScheme<T>, lambda: T, u0: T, t_end: T, n: usize) -> Result<T> {
    let q = scheme.q;
    let k = t_end / T::from_usize(n).expect("step count fits");
    let z = k * lambda;
    // (I + z a) Y = u_n 1; the matrix is the same on every step.
    let mut m = vec![vec![T::zero(); q]; q];
    for i in 0..q {
        for j in 0..q {
            m[i][j] = z * scheme.a[i][j];
        }
        m[i][i] = m[i][i] + T::one();
    }
    let lu = Lu::factor(m).ok_or(Error::SingularSystem { interval: 0 })?;
    let mut u = u0;
    for _ in 0..n {
        let y = lu.solve(vec![u; q]);
        let mut incr = T::zero();
        for (b, yi) in scheme.b.iter().zip(&y) {
            incr = incr + *b * *yi;
        }
        u = u - z * incr;
    }
    Ok(u)
}

struct Lu<T> {
    m: Vec<Vec<T>>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    fn factor(mut m: Vec<Vec<T>>) -> Option<Self> {
        let n = m.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let p = (col..n).max_by(|&a, &b| {
                m[a][col]
                    .abs()
                    .partial_cmp(&m[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if m[p][col] == T::zero() {
                return None;
            }
            m.swap(col, p);
            perm.swap(col, p);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                m[r][col] = f;
                for c in col + 1..n {
                    m[r][c] = m[r][c] - f * m[col][c];
                }
            }
        }
        Some(Self { m, perm })
    }

    fn solve(&self, b: Vec<T>) -> Vec<T> {
        let n = b.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] = x[r] - self.m[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] = x[r] - self.m[r][c] * x[c];
            }
            x[r] = x[r] / self.m[r][r];
        }
        x
    }
}

/// Least-squares slope of `log(err)` against `log(step)`.
pub fn observed_order(steps: &[f64], errors: &[f64]) -> Result<f64> {
    if steps.len() != errors.len() || steps.len() < 2 {
        return Err(Error::Shape(format!(
            "need at least two (step, error) pairs, got {} and {}",
            steps.len(),
            errors.len()
        )));
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
