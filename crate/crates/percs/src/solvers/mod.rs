//! Sparse recovery engines: basis pursuit (l1), CSF-weighted l1 via a change
//! of variables, iteratively reweighted l1, and an OMP baseline.
//!
//! All solvers are pure functions of `(theta, y, config)`: no global state,
//! no internal randomness, identical inputs give identical reports.

mod interior_point;
mod omp;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use interior_point::solve_basis_pursuit;

/// Recovery method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    L1,
    WeightedL1,
    Rwl1,
    Omp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::L1, Method::WeightedL1, Method::Rwl1, Method::Omp];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::L1 => "l1",
            Method::WeightedL1 => "weighted_l1",
            Method::Rwl1 => "rwl1",
            Method::Omp => "omp",
        };
        f.write_str(name)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Method::L1),
            "weighted_l1" => Ok(Method::WeightedL1),
            "rwl1" => Ok(Method::Rwl1),
            "omp" => Ok(Method::Omp),
            other => Err(Error::InvalidParameter(format!(
                "unknown method \"{other}\" (expected l1, weighted_l1, rwl1 or omp)"
            ))),
        }
    }
}

/// Solver configuration shared by all methods.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Stability parameter in the reweighting rule `w = 1 / (|s| + epsilon)`.
    pub epsilon: f64,
    /// Total reweighted-l1 rounds, counting the initial unweighted solve.
    pub rwl1_iterations: usize,
    /// Max allowed `||y - theta s|| / ||y||` for a solve to count as converged.
    pub feasibility_tol: f64,
    /// Atom budget for OMP; `None` stops on the residual tolerance.
    pub omp_sparsity: Option<usize>,
    /// Iteration cap for the inner interior-point method (and OMP atoms).
    pub max_inner_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::L1,
            epsilon: 0.1,
            rwl1_iterations: 4,
            feasibility_tol: 1e-6,
            omp_sparsity: None,
            max_inner_iterations: 100,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.rwl1_iterations == 0 {
            return Err(Error::InvalidParameter(
                "rwl1_iterations must be at least 1".into(),
            ));
        }
        if !(self.feasibility_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "feasibility_tol must be positive, got {}",
                self.feasibility_tol
            )));
        }
        Ok(())
    }
}

/// Per-solve diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Recovered coefficient vector `s`, length `N`.
    pub coefficients: DVector<f64>,
    /// `||y - theta s||_2`.
    pub residual_norm: f64,
    pub iterations_used: usize,
    /// Final l1 (or weighted-l1) objective value.
    pub objective: f64,
    pub converged: bool,
}

/// Basis pursuit: `min ||s||_1  s.t.  y = theta s`.
pub fn solve_l1(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let ones = DVector::from_element(theta.ncols(), 1.0);
    let sol = solve_basis_pursuit(theta, y, &ones, cfg.max_inner_iterations)?;
    Ok(finish_report(theta, y, sol.z, sol.iterations, cfg, None))
}

/// Weighted basis pursuit through the change of variables `z = W s`:
/// solves `min ||z||_1  s.t.  y = (theta diag(w_inv)) z` and returns
/// `s = diag(w_inv) z`, which minimizes `sum_i |s_i| / w_inv[i]`.
pub fn solve_weighted_l1(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    w_inv: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = theta.ncols();
    if w_inv.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "w_inv has length {} but theta has {n} columns",
            w_inv.len()
        )));
    }
    for (index, &value) in w_inv.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }

    let mut scaled = theta.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(w_inv[j]);
    }
    let ones = DVector::from_element(n, 1.0);
    let sol = solve_basis_pursuit(&scaled, y, &ones, cfg.max_inner_iterations)?;
    let s = sol.z.component_mul(w_inv);
    Ok(finish_report(theta, y, s, sol.iterations, cfg, Some(w_inv)))
}

/// Iteratively reweighted l1. Round 0 is the unweighted solve; round `l + 1`
/// re-solves with `w_inv[i] = |s_i^(l)| + epsilon` (equivalently weights
/// `w_i = 1 / (|s_i| + epsilon)`). Runs `rwl1_iterations` rounds total, or
/// stops early once successive solutions differ by less than 1e-8 in l-inf.
pub fn solve_rwl1(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let mut report = solve_l1(theta, y, cfg)?;
    let mut total_iterations = report.iterations_used;
    for _ in 1..cfg.rwl1_iterations {
        let w_inv = report.coefficients.map(|s| s.abs() + cfg.epsilon);
        let next = solve_weighted_l1(theta, y, &w_inv, cfg)?;
        total_iterations += next.iterations_used;
        let step = (&next.coefficients - &report.coefficients).abs().max();
        report = next;
        if step < 1e-8 {
            break;
        }
    }
    report.iterations_used = total_iterations;
    Ok(report)
}

/// Orthogonal matching pursuit baseline.
pub fn solve_omp(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let out = omp::orthogonal_matching_pursuit(
        theta,
        y,
        cfg.omp_sparsity,
        cfg.feasibility_tol,
        cfg.max_inner_iterations,
    )?;
    let objective = out.coefficients.iter().map(|s| s.abs()).sum();
    Ok(SolveReport {
        coefficients: out.coefficients,
        residual_norm: out.residual_norm,
        iterations_used: out.atoms,
        objective,
        converged: out.converged,
    })
}

/// Dispatches on `cfg.method`; `w_inv` is required for `WeightedL1` and
/// ignored by the other methods.
pub fn solve(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    w_inv: Option<&DVector<f64>>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    match cfg.method {
        Method::L1 => solve_l1(theta, y, cfg),
        Method::WeightedL1 => {
            let w_inv = w_inv.ok_or_else(|| {
                Error::InvalidParameter("weighted_l1 requires an inverse-weight vector".into())
            })?;
            solve_weighted_l1(theta, y, w_inv, cfg)
        }
        Method::Rwl1 => solve_rwl1(theta, y, cfg),
        Method::Omp => solve_omp(theta, y, cfg),
    }
}

fn finish_report(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    s: DVector<f64>,
    iterations: usize,
    cfg: &SolverConfig,
    w_inv: Option<&DVector<f64>>,
) -> SolveReport {
    let residual_norm = (y - theta * &s).norm();
    let objective = match w_inv {
        None => s.iter().map(|v| v.abs()).sum(),
        Some(w_inv) => s
            .iter()
            .zip(w_inv.iter())
            .map(|(v, wi)| v.abs() / wi)
            .sum(),
    };
    let y_norm = y.norm();
    let converged = residual_norm <= cfg.feasibility_tol * y_norm.max(f64::MIN_POSITIVE)
        || (y_norm == 0.0 && residual_norm == 0.0);
    SolveReport {
        coefficients: s,
        residual_norm,
        iterations_used: iterations,
        objective,
        converged,
    }
}
