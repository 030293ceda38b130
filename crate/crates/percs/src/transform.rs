//! Orthonormal 2-D DCT over `B x B` blocks and the row-major vectorization
//! convention shared with the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthonormal 2-D DCT basis for `B x B` blocks.
///
/// `basis_matrix` is the `N x N` operator (`N = B^2`) whose column `i*B + j`
/// is the vectorized basis image of frequency pair `(i, j)`, so that
/// `x_vec = basis_matrix * coeff_vec`.
#[derive(Debug, Clone)]
pub struct Dct2Basis {
    block_size: usize,
    /// 1-D orthonormal DCT-II matrix, `B x B`.
    dct1d: DMatrix<f64>,
    basis_matrix: DMatrix<f64>,
}

impl Dct2Basis {
    /// Builds the basis for `B x B` blocks.
    pub fn new(block_size: usize) -> Result<Self> {
        if block_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "block size must be >= 2, got {block_size}"
            )));
        }
        let b = block_size;
        let scale0 = (1.0 / b as f64).sqrt();
        let scale = (2.0 / b as f64).sqrt();
        let dct1d = DMatrix::from_fn(b, b, |k, n| {
            let alpha = if k == 0 { scale0 } else { scale };
            alpha * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2.0 * b as f64)).cos()
        });

        // Basis image for (i, j) is the outer product of 1-D DCT rows i and j:
        // inverse(E_ij)[m, n] = dct1d[i, m] * dct1d[j, n].
        let n_total = b * b;
        let mut basis_matrix = DMatrix::zeros(n_total, n_total);
        for i in 0..b {
            for j in 0..b {
                let col = i * b + j;
                for m in 0..b {
                    for n in 0..b {
                        basis_matrix[(m * b + n, col)] = dct1d[(i, m)] * dct1d[(j, n)];
                    }
                }
            }
        }

        Ok(Self {
            block_size,
            dct1d,
            basis_matrix,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Signal length `N = B^2`.
    pub fn signal_len(&self) -> usize {
        self.block_size * self.block_size
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis_matrix
    }

    /// Forward 2-D DCT: coefficient grid of a pixel block.
    pub fn forward(&self, block: &DMatrix<f64>) -> DMatrix<f64> {
        &self.dct1d * block * self.dct1d.transpose()
    }

    /// Inverse 2-D DCT: pixel block from a coefficient grid.
    pub fn inverse(&self, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
        self.dct1d.transpose() * coeffs * &self.dct1d
    }
}

/// Row-major flattening: `v[i*B + j] = m[(i, j)]`.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    let (rows, cols) = m.shape();
    DVector::from_fn(rows * cols, |t, _| m[(t / cols, t % cols)])
}

/// Inverse of [`vectorize`] for square matrices.
pub fn devectorize(v: &DVector<f64>, side: usize) -> Result<DMatrix<f64>> {
    if v.len() != side * side {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot fill a {side}x{side} matrix",
            v.len()
        )));
    }
    Ok(DMatrix::from_fn(side, side, |i, j| v[i * side + j]))
}
