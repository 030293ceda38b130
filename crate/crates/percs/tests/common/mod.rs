//! Shared test support: an independent LP oracle and instance generators.
//!
//! The oracle is a dense two-phase tableau simplex with Bland's rule,
//! deliberately sharing no code with the library's interior-point engine.
//! On the split formulation `min c'(u+v) s.t. theta (u - v) = y, u, v >= 0`
//! it returns the exact optimal objective of the (weighted) l1 problem.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PIVOT_EPS: f64 = 1e-9;

/// Minimize `c' x` subject to `a x = b`, `x >= 0` by two-phase simplex.
/// Returns `(x, objective)`; `None` if infeasible.
pub fn simplex_lp(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Option<(Vec<f64>, f64)> {
    let m = a.nrows();
    let n = a.ncols();

    // Tableau columns: n structural + m artificial + rhs.
    let cols = n + m + 1;
    let mut tab = vec![vec![0.0f64; cols]; m];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i][j] = flip * a[(i, j)];
        }
        tab[i][n + i] = 1.0;
        tab[i][cols - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![0.0f64; cols];
    for j in n..n + m {
        phase1_cost[j] = 1.0;
    }
    let feasible = run_simplex(&mut tab, &mut basis, &phase1_cost, n + m);
    let phase1_obj: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| tab[i][cols - 1])
        .sum();
    if !feasible || phase1_obj > 1e-7 {
        return None;
    }

    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab[i][j].abs() > PIVOT_EPS) {
                pivot(&mut tab, &mut basis, i, j);
            }
        }
    }

    // Phase 2 with the real costs; artificial columns are frozen out.
    let mut phase2_cost = vec![0.0f64; cols];
    for j in 0..n {
        phase2_cost[j] = c[j];
    }
    if !run_simplex(&mut tab, &mut basis, &phase2_cost, n) {
        return None;
    }

    let mut x = vec![0.0f64; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab[i][cols - 1];
        }
    }
    let objective = x.iter().zip(c.iter()).map(|(xi, ci)| xi * ci).sum();
    Some((x, objective))
}

/// Simplex iterations with Bland's rule over the first `active_cols` columns.
/// Returns false only on unboundedness (cannot happen for our instances).
fn run_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    active_cols: usize,
) -> bool {
    let m = tab.len();
    let cols = tab[0].len();
    loop {
        // Reduced costs from the current basis: r_j = c_j - y' a_j where
        // y' solves the basic system; computed row-wise from the tableau.
        let mut reduced = vec![0.0f64; active_cols];
        for (j, r) in reduced.iter_mut().enumerate() {
            let mut v = cost[j];
            for i in 0..m {
                v -= cost[basis[i]] * tab[i][j];
            }
            *r = v;
        }

        // Bland: entering variable is the lowest index with negative cost.
        let Some(enter) = reduced
            .iter()
            .position(|&r| r < -PIVOT_EPS)
        else {
            return true;
        };

        // Ratio test; Bland tie-break on the lowest basis index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if tab[i][enter] > PIVOT_EPS {
                let ratio = tab[i][cols - 1] / tab[i][enter];
                let better = ratio < best - PIVOT_EPS
                    || ((ratio - best).abs() <= PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return false; // unbounded
        };
        pivot(tab, basis, leave, enter);
    }
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let cols = tab[0].len();
    let p = tab[row][col];
    for j in 0..cols {
        tab[row][j] /= p;
    }
    for i in 0..tab.len() {
        if i != row {
            let factor = tab[i][col];
            if factor != 0.0 {
                for j in 0..cols {
                    tab[i][j] -= factor * tab[row][j];
                }
            }
        }
    }
    basis[row] = col;
}

/// Optimal (weighted) l1 objective of `min sum_i w_i |s_i| s.t. theta s = y`
/// via the split LP `s = u - v`. Unit weights give plain basis pursuit.
pub fn l1_objective_by_simplex(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    weights: Option<&DVector<f64>>,
) -> Option<f64> {
    let m = theta.nrows();
    let n = theta.ncols();
    let mut a = DMatrix::zeros(m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = theta[(i, j)];
            a[(i, n + j)] = -theta[(i, j)];
        }
    }
    let c = DVector::from_fn(2 * n, |j, _| match weights {
        Some(w) => w[j % n],
        None => 1.0,
    });
    simplex_lp(&a, y, &c).map(|(_, obj)| obj)
}

/// Gaussian matrix with `Normal(0, 1/m)` entries (test-local generator).
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, n, |_, _| {
        sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)
    })
}

/// k-sparse vector with uniform signs and magnitudes in [0.5, 1.5].
pub fn sparse_signal(n: usize, k: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = DVector::zeros(n);
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < k {
        let idx = rng.gen_range(0..n);
        if !chosen.contains(&idx) {
            chosen.push(idx);
        }
    }
    for &idx in &chosen {
        let mag = rng.gen_range(0.5..1.5);
        s[idx] = if rng.gen_bool(0.5) { mag } else { -mag };
    }
    s
}

/// True support as a sorted index list.
pub fn support(s: &DVector<f64>, tol: f64) -> Vec<usize> {
    (0..s.len()).filter(|&i| s[i].abs() > tol).collect()
}
