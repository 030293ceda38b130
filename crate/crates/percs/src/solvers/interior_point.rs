//! Primal-dual interior-point engine for equality-constrained basis pursuit.
//!
//! Solves `min c'(u + v)  s.t.  G (u - v) = y,  u, v >= 0` and returns
//! `z = u - v`, i.e. the minimum-(weighted-)l1-norm solution of `G z = y`.
//! The engine is a Mehrotra predictor-corrector method on the split LP; each
//! iteration factorizes the `M x M` normal matrix `G diag(d) G'` by Cholesky.
//!
//! Optimality is certified by the duality gap: on success the returned point
//! is primal/dual feasible to `TOL_FEAS` with relative gap below `TOL_GAP`,
//! which pins the objective to well under 1e-6 relative error.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative primal/dual feasibility tolerance.
const TOL_FEAS: f64 = 1e-9;
/// Relative duality-gap tolerance.
const TOL_GAP: f64 = 1e-9;
/// Fraction-to-boundary step damping.
const STEP_DAMPING: f64 = 0.995;
/// Elementwise bounds on the scaling vector `d = u/su + v/sv`.
const D_CLAMP: (f64, f64) = (1e-14, 1e14);

#[derive(Debug, Clone)]
pub struct IpmSolution {
    /// `z = u - v`, length `N`.
    pub z: DVector<f64>,
    pub iterations: usize,
    /// Absolute primal residual `||y - G z||_2`.
    pub residual_norm: f64,
    /// Whether feasibility and gap tolerances were met.
    pub converged: bool,
}

/// Minimum weighted-l1 solution of `G z = y` with positive costs `c`.
pub fn solve_basis_pursuit(
    g: &DMatrix<f64>,
    y: &DVector<f64>,
    c: &DVector<f64>,
    max_iterations: usize,
) -> Result<IpmSolution> {
    let (m, n) = g.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "y has length {} but G has {} rows",
            y.len(),
            m
        )));
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost vector has length {} but G has {} columns",
            c.len(),
            n
        )));
    }
    if m > n {
        return Err(Error::MeasurementCountExceedsSignal { m, n });
    }

    let y_norm = y.norm();
    if y_norm == 0.0 {
        // Zero measurements: z = 0 is optimal with objective 0.
        return Ok(IpmSolution {
            z: DVector::zeros(n),
            iterations: 0,
            residual_norm: 0.0,
            converged: true,
        });
    }

    // A square system has a unique feasible point; the objective plays no
    // role, so solve it directly.
    if m == n {
        let lu = g.clone().full_piv_lu();
        let z = lu.solve(y).ok_or(Error::RankDeficient)?;
        let residual_norm = (y - g * &z).norm();
        return Ok(IpmSolution {
            z,
            iterations: 0,
            residual_norm,
            converged: true,
        });
    }

    // Equilibrate columns to unit norm. The substitution z = D^-1 z~ maps
    // the problem to min (c/d)' (u + v) s.t. (G D^-1)(u - v) = y, which is
    // the same LP with a far better conditioned normal matrix when the
    // caller's column scalings span several orders of magnitude.
    let col_scale = DVector::from_fn(n, |j, _| g.column(j).norm().max(f64::MIN_POSITIVE));
    let mut g_eq = g.clone();
    for j in 0..n {
        g_eq.column_mut(j).scale_mut(1.0 / col_scale[j]);
    }
    let c_eq = c.component_div(&col_scale);
    let mut sol = ipm_core(&g_eq, y, &c_eq, max_iterations)?;
    sol.z.component_div_assign(&col_scale);
    sol.residual_norm = (y - g * &sol.z).norm();
    Ok(sol)
}

fn ipm_core(
    g: &DMatrix<f64>,
    y: &DVector<f64>,
    c: &DVector<f64>,
    max_iterations: usize,
) -> Result<IpmSolution> {
    let (m, n) = g.shape();
    let y_norm = y.norm();
    let gt = g.transpose();

    // Starting point (Mehrotra's heuristic). The least-norm primal estimate
    // comes from G G' t = y; Cholesky failure here flags rank deficiency.
    let gram = g * &gt;
    let gram_chol = Cholesky::new(gram).ok_or(Error::RankDeficient)?;
    let t = gram_chol.solve(&(y / 2.0));
    let x_hat = &gt * t;

    let mut u = x_hat.clone();
    let mut v = -x_hat;
    let mut su = c.clone();
    let mut sv = c.clone();
    let mut lambda = DVector::zeros(m);

    let min_x = u.min().min(v.min());
    let shift = (-1.5 * min_x).max(0.0);
    u.add_scalar_mut(shift);
    v.add_scalar_mut(shift);
    let dot = u.dot(&su) + v.dot(&sv);
    let sum_s = su.sum() + sv.sum();
    let sum_x = u.sum() + v.sum();
    let shift_x = 0.5 * dot / sum_s;
    let shift_s = 0.5 * dot / sum_x.max(f64::MIN_POSITIVE);
    u.add_scalar_mut(shift_x.max(1e-8));
    v.add_scalar_mut(shift_x.max(1e-8));
    su.add_scalar_mut(shift_s.max(1e-8));
    sv.add_scalar_mut(shift_s.max(1e-8));

    let two_n = (2 * n) as f64;
    let c_norm = c.norm();
    let mut iterations = 0;
    let mut converged = false;

    // Work vectors reused across iterations.
    let mut scaled_g = DMatrix::zeros(m, n);

    for iter in 0..max_iterations {
        iterations = iter;

        let gl = &gt * &lambda;
        let z = &u - &v;
        let r_p = y - g * &z;
        let r_du = c - &gl - &su;
        let r_dv = c + &gl - &sv;

        let mu = (u.dot(&su) + v.dot(&sv)) / two_n;
        let pobj = c.dot(&u) + c.dot(&v);
        let dobj = y.dot(&lambda);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        let rel_p = r_p.norm() / (1.0 + y_norm);
        let rel_d = r_du.norm().max(r_dv.norm()) / (1.0 + c_norm);

        if rel_gap <= TOL_GAP && rel_p <= TOL_FEAS && rel_d <= TOL_FEAS {
            converged = true;
            break;
        }

        let du = u.zip_map(&su, |a, b| (a / b).clamp(D_CLAMP.0, D_CLAMP.1));
        let dv = v.zip_map(&sv, |a, b| (a / b).clamp(D_CLAMP.0, D_CLAMP.1));

        scaled_g.copy_from(g);
        for j in 0..n {
            let d = du[j] + dv[j];
            scaled_g.column_mut(j).scale_mut(d);
        }
        let normal = &scaled_g * &gt;
        let Some(chol) = factor_with_jitter(normal) else {
            break;
        };

        // Predictor (affine scaling) direction.
        let r_cu_aff = u.component_mul(&su).map(|x| -x);
        let r_cv_aff = v.component_mul(&sv).map(|x| -x);
        let (_, du_aff, dv_aff, dsu_aff, dsv_aff) = newton_step(
            g, &gt, &chol, &r_p, &r_du, &r_dv, &r_cu_aff, &r_cv_aff, &u, &v, &du, &dv,
        );

        let alpha_p_aff = max_step(&u, &du_aff).min(max_step(&v, &dv_aff)).min(1.0);
        let alpha_d_aff = max_step(&su, &dsu_aff).min(max_step(&sv, &dsv_aff)).min(1.0);
        let mu_aff = ((&u + alpha_p_aff * &du_aff).dot(&(&su + alpha_d_aff * &dsu_aff))
            + (&v + alpha_p_aff * &dv_aff).dot(&(&sv + alpha_d_aff * &dsv_aff)))
            / two_n;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector with centering, reusing the factorization.
        let target = sigma * mu;
        let r_cu = r_cu_aff.zip_map(&du_aff.component_mul(&dsu_aff), |r, ad| r - ad)
            .add_scalar(target);
        let r_cv = r_cv_aff.zip_map(&dv_aff.component_mul(&dsv_aff), |r, ad| r - ad)
            .add_scalar(target);
        let (dl, du_step, dv_step, dsu_step, dsv_step) = newton_step(
            g, &gt, &chol, &r_p, &r_du, &r_dv, &r_cu, &r_cv, &u, &v, &du, &dv,
        );

        let alpha_p = (STEP_DAMPING * max_step(&u, &du_step).min(max_step(&v, &dv_step))).min(1.0);
        let alpha_d =
            (STEP_DAMPING * max_step(&su, &dsu_step).min(max_step(&sv, &dsv_step))).min(1.0);

        u += alpha_p * &du_step;
        v += alpha_p * &dv_step;
        lambda += alpha_d * &dl;
        su += alpha_d * &dsu_step;
        sv += alpha_d * &dsv_step;
    }

    let z = &u - &v;
    let residual_norm = (y - g * &z).norm();
    Ok(IpmSolution {
        z,
        iterations: iterations + 1,
        residual_norm,
        converged,
    })
}

/// Solves the reduced Newton system for a given complementarity target.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    g: &DMatrix<f64>,
    gt: &DMatrix<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    r_p: &DVector<f64>,
    r_du: &DVector<f64>,
    r_dv: &DVector<f64>,
    r_cu: &DVector<f64>,
    r_cv: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    du: &DVector<f64>,
    dv: &DVector<f64>,
) -> (
    DVector<f64>,
    DVector<f64>,
    DVector<f64>,
    DVector<f64>,
    DVector<f64>,
) {
    let cu_over_u = r_cu.component_div(u);
    let cv_over_v = r_cv.component_div(v);
    let au = du.component_mul(&(&cu_over_u - r_du));
    let av = dv.component_mul(&(&cv_over_v - r_dv));
    let rhs = r_p - g * (&au - &av);
    let dl = chol.solve(&rhs);
    let gl = gt * &dl;
    let du_step = du.component_mul(&gl) + &au;
    let dv_step = -dv.component_mul(&gl) + &av;
    let dsu_step = &cu_over_u - &du_step.component_div(du);
    let dsv_step = &cv_over_v - &dv_step.component_div(dv);
    (dl, du_step, dv_step, dsu_step, dsv_step)
}

/// Largest step in `[0, inf)` keeping `x + alpha * dx` nonnegative.
fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xi, di) in x.iter().zip(dx.iter()) {
        if *di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    alpha
}

/// Cholesky with escalating diagonal jitter for near-singular systems.
fn factor_with_jitter(mut normal: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let m = normal.nrows();
    let mean_diag = normal.diagonal().sum() / m as f64;
    let mut jitter = 0.0;
    for _ in 0..6 {
        if jitter > 0.0 {
            for i in 0..m {
                normal[(i, i)] += jitter;
            }
        }
        if let Some(chol) = Cholesky::new(normal.clone()) {
            return Some(chol);
        }
        jitter = if jitter == 0.0 {
            1e-14 * mean_diag.max(1e-300)
        } else {
            jitter * 100.0
        };
    }
    None
}
