//! Orthogonal matching pursuit: greedy atom selection with least-squares
//! refits on the growing active set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct OmpOutcome {
    pub coefficients: DVector<f64>,
    pub residual_norm: f64,
    pub atoms: usize,
    pub converged: bool,
}

pub fn orthogonal_matching_pursuit(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    sparsity: Option<usize>,
    residual_tol: f64,
    max_atoms: usize,
) -> Result<OmpOutcome> {
    let (m, n) = theta.shape();
    if y.is_empty() {
        return Err(Error::EmptyMeasurements);
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "y has length {} but theta has {} rows",
            y.len(),
            m
        )));
    }

    let col_norms: Vec<f64> = (0..n).map(|j| theta.column(j).norm()).collect();
    if let Some(j) = col_norms.iter().position(|&nrm| nrm == 0.0) {
        return Err(Error::InvalidParameter(format!("theta column {j} is zero")));
    }

    let y_norm = y.norm();
    let budget = sparsity.unwrap_or(m).min(m).min(max_atoms);
    let stop_norm = residual_tol * y_norm;

    let mut residual = y.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut coeffs_active = DVector::zeros(0);

    while active.len() < budget {
        if residual.norm() <= stop_norm {
            break;
        }

        // Most correlated column, normalized; ties break to the lowest index.
        let mut best = (0usize, f64::NEG_INFINITY);
        for j in 0..n {
            let corr = theta.column(j).dot(&residual).abs() / col_norms[j];
            if corr > best.1 {
                best = (j, corr);
            }
        }
        if active.contains(&best.0) {
            return Err(Error::DuplicateAtom(best.0));
        }
        active.push(best.0);

        // Least-squares refit over the active set via thin QR.
        let sub = DMatrix::from_fn(m, active.len(), |i, k| theta[(i, active[k])]);
        let qr = sub.clone().qr();
        let projected = qr.q().transpose() * y;
        coeffs_active = qr
            .r()
            .solve_upper_triangular(&projected)
            .ok_or_else(|| Error::InvalidParameter("active set became singular".into()))?;
        residual = y - sub * &coeffs_active;
    }

    let mut coefficients = DVector::zeros(n);
    for (k, &j) in active.iter().enumerate() {
        coefficients[j] = coeffs_active[k];
    }
    let residual_norm = residual.norm();
    Ok(OmpOutcome {
        coefficients,
        residual_norm,
        atoms: active.len(),
        converged: residual_norm <= stop_norm,
    })
}
