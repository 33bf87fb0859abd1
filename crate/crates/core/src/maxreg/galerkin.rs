use nalgebra::{DMatrix, DVector};

use super::{lu_solve, EvolutionOperator, Method, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::polybasis::{
    gauss_legendre, lagrange_deriv_unchecked, lagrange_unchecked, make_scheme, shifted_legendre,
    shifted_legendre_deriv, Family, QuadratureRule,
};
use crate::timegrid::TimePartition;

fn check_q(q: usize, family: Family) -> Result<()> {
    if q == 0 {
        return Err(Error::UnsupportedScheme {
            family,
            q,
            reason: "Galerkin degree must be positive",
        });
    }
    Ok(())
}

/// Legendre moments `F_i = ∫_0^1 f(t_n + kτ) L_i(τ) dτ`, `i < q`.
fn moments(op: &EvolutionOperator, rule: &QuadratureRule, t_n: f64, k: f64, q: usize) -> Vec<DVector<f64>> {
    let mut out = vec![DVector::zeros(op.dim()); q];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let f = op.forcing(t_n + k * x);
        let l = shifted_legendre(q - 1, x);
        for (i, m) in out.iter_mut().enumerate() {
            *m += &f * (w * l[i]);
        }
    }
    out
}

/// `(P_{q-1} f)(τ)` from its Legendre moments.
fn projected(moments: &[DVector<f64>], tau: f64) -> DVector<f64> {
    let l = shifted_legendre(moments.len() - 1, tau);
    let mut out = DVector::zeros(moments[0].len());
    for (i, m) in moments.iter().enumerate() {
        out += m * ((2 * i + 1) as f64 * l[i]);
    }
    out
}

/// `ψ_m(τ) = ∫_0^τ L_{m-1}`, `m = 1..=q`.
fn psi(q: usize, tau: f64) -> Vec<f64> {
    let l = shifted_legendre(q, tau);
    (1..=q)
        .map(|m| {
            if m == 1 {
                tau
            } else {
                (l[m] - l[m - 2]) / (2.0 * (2 * m - 1) as f64)
            }
        })
        .collect()
}

/// Continuous Galerkin cG(q): `U` continuous, degree `q` on each interval,
/// tested against degree `q - 1` polynomials.
///
/// The record is sampled at the `q` Gauss points with the Gauss weights.
pub fn cg_solve(op: &EvolutionOperator, q: usize, partition: &TimePartition) -> Result<TrajectoryRecord> {
    check_q(q, Family::Gauss)?;
    let d = op.dim();
    let gauss = gauss_legendre::<f64>(q)?;
    let mom_rule = gauss_legendre::<f64>(q + 4)?;

    // g[(i, m-1)] = ∫ ψ_m L_i; degree ≤ 2q - 1, so q + 1 points are plenty.
    let exact = gauss_legendre::<f64>(q + 1)?;
    let mut g = DMatrix::<f64>::zeros(q, q);
    for (&x, &w) in exact.nodes.iter().zip(&exact.weights) {
        let l = shifted_legendre(q - 1, x);
        let p = psi(q, x);
        for i in 0..q {
            for m in 0..q {
                g[(i, m)] += w * p[m] * l[i];
            }
        }
    }
    let psi_g: Vec<Vec<f64>> = gauss.nodes.iter().map(|&x| psi(q, x)).collect();
    let leg_g: Vec<Vec<f64>> = gauss.nodes.iter().map(|&x| shifted_legendre(q - 1, x)).collect();

    let mut nodal = vec![op.u0.clone()];
    let (mut stages, mut derivs, mut forcing) = (Vec::new(), Vec::new(), Vec::new());
    for (n, (&t_n, &k)) in partition.nodes().iter().zip(partition.steps()).enumerate() {
        let u_n = nodal[n].clone();
        let f = moments(op, &mom_rule, t_n, k, q);
        let au = &op.a * &u_n;

        let mut sys = DMatrix::<f64>::zeros(q * d, q * d);
        let mut rhs = DVector::<f64>::zeros(q * d);
        for i in 0..q {
            let mut r = &f[i] * k;
            if i == 0 {
                r -= &au * k;
            }
            rhs.rows_mut(i * d, d).copy_from(&r);
            for m in 0..q {
                let mut block = sys.view_mut((i * d, m * d), (d, d));
                block += &op.a * (k * g[(i, m)]);
                if m == i {
                    for r in 0..d {
                        block[(r, r)] += 1.0 / (2 * i + 1) as f64;
                    }
                }
            }
        }
        let w = lu_solve(sys, &rhs, n)?;
        let wm = |m: usize| w.rows(m * d, d);

        let mut st = Vec::with_capacity(q);
        let mut dv = Vec::with_capacity(q);
        let mut fv = Vec::with_capacity(q);
        for (j, &x) in gauss.nodes.iter().enumerate() {
            let mut u = u_n.clone();
            let mut du = DVector::zeros(d);
            for m in 0..q {
                u += wm(m) * psi_g[j][m];
                du += wm(m) * (leg_g[j][m] / k);
            }
            st.push(u);
            dv.push(du);
            fv.push(projected(&f, x));
        }
        nodal.push(&u_n + wm(0));
        stages.push(st);
        derivs.push(dv);
        forcing.push(fv);
    }

    Ok(TrajectoryRecord {
        partition: partition.clone(),
        method: Method::ContinuousGalerkin { q },
        nodal,
        stage_nodes: gauss.nodes,
        stage_weights: gauss.weights,
        stages,
        stage_derivs: derivs,
        stage_forcing: forcing,
    })
}

/// Discontinuous Galerkin dG(q-1): degree `q - 1` on each interval with
/// upwind jumps. `nodal[n]` holds the left limit `U(t_n^-)`.
///
/// The record is sampled at the `q` Radau IIA points; `stage_derivs` are
/// derivatives of the reconstruction through `U(t_n^-)` and those samples.
pub fn dg_solve(op: &EvolutionOperator, q: usize, partition: &TimePartition) -> Result<TrajectoryRecord> {
    check_q(q, Family::RadauIIA)?;
    let d = op.dim();
    let radau = make_scheme(Family::RadauIIA, q)?;
    let mom_rule = gauss_legendre::<f64>(q + 4)?;
    let exact = gauss_legendre::<f64>(q)?;

    // s[(i, m)] = ∫ L_m' L_i + L_m(0) L_i(0)
    let mut s = DMatrix::<f64>::zeros(q, q);
    for (&x, &w) in exact.nodes.iter().zip(&exact.weights) {
        let l = shifted_legendre(q - 1, x);
        let dl = shifted_legendre_deriv(q - 1, x);
        for i in 0..q {
            for m in 0..q {
                s[(i, m)] += w * dl[m] * l[i];
            }
        }
    }
    let sign = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
    for i in 0..q {
        for m in 0..q {
            s[(i, m)] += sign(m) * sign(i);
        }
    }

    let leg_c: Vec<Vec<f64>> = radau.c.iter().map(|&x| shifted_legendre(q - 1, x)).collect();
    let mut recon = Vec::with_capacity(q + 1);
    recon.push(0.0);
    recon.extend_from_slice(&radau.c);
    let recon_d: Vec<Vec<f64>> = radau
        .c
        .iter()
        .map(|&x| (0..=q).map(|i| lagrange_deriv_unchecked(&recon, i, x)).collect())
        .collect();

    let mut nodal = vec![op.u0.clone()];
    let (mut stages, mut derivs, mut forcing) = (Vec::new(), Vec::new(), Vec::new());
    for (n, (&t_n, &k)) in partition.nodes().iter().zip(partition.steps()).enumerate() {
        let u_n = nodal[n].clone();
        let f = moments(op, &mom_rule, t_n, k, q);

        let mut sys = DMatrix::<f64>::zeros(q * d, q * d);
        let mut rhs = DVector::<f64>::zeros(q * d);
        for i in 0..q {
            let r = &f[i] * k + &u_n * sign(i);
            rhs.rows_mut(i * d, d).copy_from(&r);
            for m in 0..q {
                let mut block = sys.view_mut((i * d, m * d), (d, d));
                if m == i {
                    block += &op.a * (k / (2 * i + 1) as f64);
                }
                for r in 0..d {
                    block[(r, r)] += s[(i, m)];
                }
            }
        }
        let w = lu_solve(sys, &rhs, n)?;

        let st: Vec<DVector<f64>> = leg_c
            .iter()
            .map(|l| {
                let mut u = DVector::zeros(d);
                for m in 0..q {
                    u += w.rows(m * d, d) * l[m];
                }
                u
            })
            .collect();
        let dv: Vec<DVector<f64>> = recon_d
            .iter()
            .map(|dl| {
                let mut du = &u_n * (dl[0] / k);
                for (i, u) in st.iter().enumerate() {
                    du += u * (dl[i + 1] / k);
                }
                du
            })
            .collect();
        let fv = radau.c.iter().map(|&x| projected(&f, x)).collect();

        let mut next = DVector::zeros(d);
        for m in 0..q {
            next += w.rows(m * d, d);
        }
        nodal.push(next);
        stages.push(st);
        derivs.push(dv);
        forcing.push(fv);
    }

    Ok(TrajectoryRecord {
        partition: partition.clone(),
        method: Method::DiscontinuousGalerkin { q },
        nodal,
        stage_nodes: radau.c.clone(),
        stage_weights: radau.b.clone(),
        stages,
        stage_derivs: derivs,
        stage_forcing: forcing,
    })
}

/// Largest defect of a Lobatto IIIA trajectory in the modified cG(q-1)
/// equations `Ũ'(g) + A Ũ(g) = (I_{q-1} f)(g)` at the `q - 1` Gauss points,
/// where `Ũ` interpolates the stages. Relative to `1 + |A Ũ(g)|`.
pub fn lobatto_modified_cg_defect(tr: &TrajectoryRecord, op: &EvolutionOperator) -> Result<f64> {
    let Method::Collocation(scheme) = &tr.method else {
        return Err(Error::EstimateMismatch {
            estimate: "modified cG".into(),
            method: tr.method.to_string(),
        });
    };
    if scheme.family != Family::LobattoIIIA {
        return Err(Error::EstimateMismatch {
            estimate: "modified cG".into(),
            method: tr.method.to_string(),
        });
    }
    let q = scheme.q;
    let gauss = gauss_legendre::<f64>(q - 1)?;
    let c = &scheme.c;
    let mut worst = 0.0f64;
    for n in 0..tr.intervals() {
        let k = tr.partition.steps()[n];
        for &x in &gauss.nodes {
            let mut u = DVector::zeros(op.dim());
            let mut du = DVector::zeros(op.dim());
            let mut f = DVector::zeros(op.dim());
            for i in 0..q {
                let l = lagrange_unchecked(c, i, x);
                let dl = lagrange_deriv_unchecked(c, i, x);
                u += &tr.stages[n][i] * l;
                du += &tr.stages[n][i] * (dl / k);
                f += &tr.stage_forcing[n][i] * l;
            }
            let au = &op.a * &u;
            let defect = (&du + &au - &f).norm() / (1.0 + au.norm());
            worst = worst.max(defect);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxreg::{laplacian_1d, rk_solve, BoundaryCondition};
    use approx::assert_abs_diff_eq;

    fn scalar() -> EvolutionOperator {
        EvolutionOperator::homogeneous(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, 1.0)).unwrap()
    }

    fn forced(d: usize) -> EvolutionOperator {
        let a = laplacian_1d(d, 1.0 / (d + 1) as f64, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let u0 = DVector::from_fn(d, |i, _| ((i + 1) as f64 * 0.7).sin());
        EvolutionOperator::new(
            a,
            move |t| DVector::from_fn(d, |i, _| (3.0 * t + i as f64).cos() * (1.0 + t * t)),
            u0,
        )
        .unwrap()
    }

    #[test]
    fn lowest_order_by_hand() {
        let part = TimePartition::uniform(1.0, 1).unwrap();
        let cg = cg_solve(&scalar(), 1, &part).unwrap();
        assert_abs_diff_eq!(cg.nodal[1][0], 1.0 / 3.0, epsilon = 1e-15);
        let dg = dg_solve(&scalar(), 1, &part).unwrap();
        assert_abs_diff_eq!(dg.nodal[1][0], 0.5, epsilon = 1e-15);
        assert!(cg_solve(&scalar(), 0, &part).is_err());
    }

    #[test]
    fn homogeneous_cg_matches_gauss_collocation() {
        // without forcing cG(q) and Gauss collocation coincide at the nodes
        let a = laplacian_1d(5, 0.2, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let op = EvolutionOperator::homogeneous(a, DVector::from_element(5, 1.0)).unwrap();
        let part = TimePartition::new(vec![0.0, 0.03, 0.1, 0.4]).unwrap();
        for q in 1..=4 {
            let cg = cg_solve(&op, q, &part).unwrap();
            let rk = rk_solve(&op, &make_scheme(Family::Gauss, q).unwrap(), &part).unwrap();
            for (u, v) in cg.nodal.iter().zip(&rk.nodal) {
                assert!((u - v).norm() <= 1e-12, "q = {q}");
            }
        }
    }

    #[test]
    fn homogeneous_dg_matches_radau() {
        let a = laplacian_1d(5, 0.2, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let op = EvolutionOperator::homogeneous(a, DVector::from_element(5, 1.0)).unwrap();
        let part = TimePartition::new(vec![0.0, 0.03, 0.1, 0.4]).unwrap();
        for q in 1..=4 {
            let dg = dg_solve(&op, q, &part).unwrap();
            let rk = rk_solve(&op, &make_scheme(Family::RadauIIA, q).unwrap(), &part).unwrap();
            for (u, v) in dg.nodal.iter().zip(&rk.nodal) {
                assert!((u - v).norm() <= 1e-12, "q = {q}");
            }
        }
    }

    #[test]
    fn galerkin_pointwise_identity() {
        // Û' + A U = P f at the sample points
        let op = forced(4);
        let part = TimePartition::new(vec![0.0, 0.2, 0.25, 0.7]).unwrap();
        for q in 1..=4 {
            for tr in [cg_solve(&op, q, &part).unwrap(), dg_solve(&op, q, &part).unwrap()] {
                for n in 0..tr.intervals() {
                    for i in 0..q {
                        let r = &tr.stage_derivs[n][i] + &op.a * &tr.stages[n][i] - &tr.stage_forcing[n][i];
                        assert!(r.norm() <= 1e-10, "{} n={n} i={i}: {}", tr.method, r.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn lobatto_is_modified_cg() {
        let op = forced(5);
        let part = TimePartition::new(vec![0.0, 0.1, 0.15, 0.5, 0.6]).unwrap();
        for q in 2..=5 {
            let tr = rk_solve(&op, &make_scheme(Family::LobattoIIIA, q).unwrap(), &part).unwrap();
            let defect = lobatto_modified_cg_defect(&tr, &op).unwrap();
            assert!(defect <= 1e-10, "q = {q}: {defect}");
        }
        let g = rk_solve(&op, &make_scheme(Family::Gauss, 2).unwrap(), &part).unwrap();
        assert!(lobatto_modified_cg_defect(&g, &op).is_err());
    }
}
