use nalgebra::{DMatrix, DVector};

use super::{lu_solve, EvolutionOperator, Method, TrajectoryRecord};
use crate::error::Result;
use crate::polybasis::CollocationScheme;
use crate::timegrid::{build_stencil, TimePartition};

/// Runge–Kutta stage form of a collocation method.
///
/// Per interval the block system `(I ⊗ I + k (a ⊗ A)) U = rhs` is solved
/// densely. When `c_1 = 0` (Lobatto) the first stage is `U_n` itself and only
/// the remaining stages enter the system.
pub fn rk_solve(
    op: &EvolutionOperator,
    scheme: &CollocationScheme,
    partition: &TimePartition,
) -> Result<TrajectoryRecord> {
    let d = op.dim();
    let q = scheme.q;
    let first = usize::from(scheme.first_stage_explicit());
    let implicit = q - first;

    let mut nodal = vec![op.u0.clone()];
    let mut stages = Vec::with_capacity(partition.intervals());
    let mut stage_derivs = Vec::with_capacity(partition.intervals());
    let mut stage_forcing = Vec::with_capacity(partition.intervals());

    for (n, (&t_n, &k)) in partition.nodes().iter().zip(partition.steps()).enumerate() {
        let u_n = nodal[n].clone();
        let f: Vec<DVector<f64>> = scheme.c.iter().map(|&c| op.forcing(t_n + c * k)).collect();

        // Known part of every implicit stage equation.
        let mut known = u_n.clone();
        let explicit_deriv = (first == 1).then(|| &f[0] - &op.a * &u_n);

        let mut sys = DMatrix::<f64>::identity(implicit * d, implicit * d);
        let mut rhs = DVector::<f64>::zeros(implicit * d);
        for (ii, i) in (first..q).enumerate() {
            let mut row_rhs = known.clone();
            if let Some(g0) = &explicit_deriv {
                row_rhs += g0 * (k * scheme.a[i][0]);
            }
            for (jj, j) in (first..q).enumerate() {
                let aij = scheme.a[i][j];
                if aij != 0.0 {
                    let mut block = sys.view_mut((ii * d, jj * d), (d, d));
                    block += &op.a * (k * aij);
                }
                row_rhs += &f[j] * (k * aij);
            }
            rhs.rows_mut(ii * d, d).copy_from(&row_rhs);
        }
        known = lu_solve(sys, &rhs, n)?;

        let mut u_stage = Vec::with_capacity(q);
        if first == 1 {
            u_stage.push(u_n.clone());
        }
        for ii in 0..implicit {
            u_stage.push(known.rows(ii * d, d).into_owned());
        }
        let derivs: Vec<DVector<f64>> = u_stage.iter().zip(&f).map(|(u, fi)| fi - &op.a * u).collect();
        let next = if scheme.stiffly_accurate() {
            u_stage[q - 1].clone()
        } else {
            let mut next = u_n.clone();
            for (bi, g) in scheme.b.iter().zip(&derivs) {
                next += g * (k * bi);
            }
            next
        };
        nodal.push(next);
        stages.push(u_stage);
        stage_derivs.push(derivs);
        stage_forcing.push(f);
    }

    Ok(TrajectoryRecord {
        partition: partition.clone(),
        method: Method::Collocation(scheme.clone()),
        nodal,
        stage_nodes: scheme.c.clone(),
        stage_weights: scheme.b.clone(),
        stages,
        stage_derivs,
        stage_forcing,
    })
}

/// Pointwise collocation form: per interval, the degree-`q` polynomial
/// through `U_n` at `c̃_0 = 0` whose values at `c̃_1, …, c̃_q` make the
/// residual stencil vanish at every collocation node. Returns the nodal
/// values `Û(t_n)`.
///
/// This shares no code with [`rk_solve`] beyond the scheme itself and is used
/// to cross-check the stage form.
pub fn collocation_polynomial_solve(
    op: &EvolutionOperator,
    scheme: &CollocationScheme,
    partition: &TimePartition,
) -> Result<Vec<DVector<f64>>> {
    let st = build_stencil(scheme);
    let d = op.dim();
    let q = scheme.q;
    let mut nodal = vec![op.u0.clone()];
    for (n, (&t_n, &k)) in partition.nodes().iter().zip(partition.steps()).enumerate() {
        let u_n = &nodal[n];
        // Σ_i (D_ji/k + E_ji A) W_i = f(t_nj), W_0 = U_n known.
        let mut sys = DMatrix::<f64>::zeros(q * d, q * d);
        let mut rhs = DVector::<f64>::zeros(q * d);
        for j in 0..q {
            let mut r = op.forcing(t_n + scheme.c[j] * k);
            r -= u_n * (st.d[(j, 0)] / k) + &op.a * u_n * st.e[(j, 0)];
            rhs.rows_mut(j * d, d).copy_from(&r);
            for i in 1..=q {
                let mut block = sys.view_mut((j * d, (i - 1) * d), (d, d));
                block += &op.a * st.e[(j, i)];
                for r in 0..d {
                    block[(r, r)] += st.d[(j, i)] / k;
                }
            }
        }
        let w = lu_solve(sys, &rhs, n)?;
        nodal.push(w.rows((q - 1) * d, d).into_owned());
    }
    Ok(nodal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxreg::laplacian_1d;
    use crate::maxreg::BoundaryCondition;
    use crate::polybasis::{make_scheme, Family};
    use approx::assert_abs_diff_eq;

    fn scalar(u0: f64) -> EvolutionOperator {
        EvolutionOperator::homogeneous(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, u0)).unwrap()
    }

    #[test]
    fn midpoint_by_hand() {
        let tr = rk_solve(
            &scalar(1.0),
            &make_scheme(Family::Gauss, 1).unwrap(),
            &TimePartition::uniform(1.0, 1).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(tr.stages[0][0][0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tr.nodal[1][0], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn backward_euler_by_hand() {
        let tr = rk_solve(
            &scalar(1.0),
            &make_scheme(Family::RadauIIA, 1).unwrap(),
            &TimePartition::uniform(1.0, 1).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(tr.nodal[1][0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn steady_state_is_fixed_point() {
        let a = laplacian_1d(5, 0.2, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let w = DVector::from_fn(5, |i, _| (i as f64 + 1.0).sin());
        let aw = &a * &w;
        let op = EvolutionOperator::new(a, move |_| aw.clone(), w.clone()).unwrap();
        let part = TimePartition::new(vec![0.0, 0.1, 0.35, 0.4, 1.0]).unwrap();
        for fam in [Family::Gauss, Family::RadauIIA, Family::LobattoIIIA] {
            for q in 2..=3 {
                let tr = rk_solve(&op, &make_scheme(fam, q).unwrap(), &part).unwrap();
                for u in &tr.nodal {
                    assert_abs_diff_eq!((u - &w).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn stage_form_matches_collocation_form() {
        let a = laplacian_1d(6, 0.25, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let u0 = DVector::from_fn(6, |i, _| 1.0 / (1.0 + i as f64));
        let op = EvolutionOperator::new(a, |t| DVector::from_fn(6, |i, _| (t * (i as f64 + 1.0)).cos()), u0).unwrap();
        let part = TimePartition::new(vec![0.0, 0.05, 0.2, 0.23, 0.5]).unwrap();
        for fam in [Family::Gauss, Family::RadauIIA, Family::LobattoIIIA] {
            for q in 1..=4 {
                let Ok(s) = make_scheme(fam, q) else { continue };
                let tr = rk_solve(&op, &s, &part).unwrap();
                let alt = collocation_polynomial_solve(&op, &s, &part).unwrap();
                for (u, v) in tr.nodal.iter().zip(&alt) {
                    assert!((u - v).norm() <= 1e-10 * (1.0 + u.norm()), "{fam:?} {q}");
                }
            }
        }
    }

    #[test]
    fn stiffly_accurate_last_stage_is_nodal() {
        let op = scalar(2.0);
        let part = TimePartition::uniform(1.0, 3).unwrap();
        let tr = rk_solve(&op, &make_scheme(Family::RadauIIA, 3).unwrap(), &part).unwrap();
        for n in 0..3 {
            assert_eq!(tr.stages[n][2], tr.nodal[n + 1]);
        }
        assert_eq!(tr.nodal[0], op.u0);
    }

    #[test]
    fn energy_decays_without_forcing() {
        let a = laplacian_1d(8, 0.1, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let u0 = DVector::from_fn(8, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 });
        let op = EvolutionOperator::homogeneous(a, u0).unwrap();
        // large steps relative to the stiffness
        let part = TimePartition::new(vec![0.0, 0.5, 0.6, 3.0, 10.0]).unwrap();
        for fam in [Family::Gauss, Family::RadauIIA] {
            for q in 1..=3 {
                let tr = rk_solve(&op, &make_scheme(fam, q).unwrap(), &part).unwrap();
                for w in tr.nodal.windows(2) {
                    assert!(op.energy(&w[1]) <= op.energy(&w[0]) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn stencil_residual_of_classical_solution_vanishes() {
        use crate::polybasis::lagrange_eval;
        let d = 4;
        let a = laplacian_1d(d, 0.2, BoundaryCondition::Dirichlet, 0.0).unwrap();
        let op = EvolutionOperator::new(
            a.clone(),
            move |t| DVector::from_fn(d, |i, _| (2.0 * t + i as f64).sin()),
            DVector::from_fn(d, |i, _| i as f64 - 1.5),
        )
        .unwrap();
        let part = TimePartition::new(vec![0.0, 0.1, 0.3, 0.35]).unwrap();
        for fam in [Family::Gauss, Family::RadauIIA, Family::LobattoIIIA] {
            for q in 1..=4 {
                let Ok(s) = make_scheme(fam, q) else { continue };
                let st = build_stencil(&s);
                let tr = rk_solve(&op, &s, &part).unwrap();
                // Û(τ) = U_n + k Σ_j Û'(c_j) ∫_0^τ ℓ_j
                let rule = crate::polybasis::gauss_legendre::<f64>(q + 1).unwrap();
                let int_l = |j: usize, x: f64| rule.integrate_on(0.0, x, |t| lagrange_eval(&s.c, j, t).unwrap());
                for n in 0..part.intervals() {
                    let (t_n, k) = (part.nodes()[n], part.steps()[n]);
                    let mut v = DMatrix::zeros(q + 1, d);
                    for (r, &ct) in s.c_tilde.iter().enumerate() {
                        let mut x = tr.nodal[n].clone();
                        for j in 0..q {
                            x += &tr.stage_derivs[n][j] * (k * int_l(j, ct));
                        }
                        v.row_mut(r).copy_from(&x.transpose());
                    }
                    let lv = &v * &a;
                    let f = DMatrix::from_fn(q, d, |j, c| op.forcing(t_n + s.c[j] * k)[c]);
                    let zeta = st.residual_at_nodes(k, &v, &lv, &f).unwrap();
                    assert!(zeta.amax() <= 1e-10, "{fam:?} q={q} n={n}: {}", zeta.amax());
                }
            }
        }
    }
}
