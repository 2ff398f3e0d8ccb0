//! Small dense real solves: LU with partial pivoting, one round of iterative
//! refinement, and an SVD-based rank and condition estimate.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Solution {
    pub x: DVector<f64>,
    /// `‖A x - b‖_∞` after refinement.
    pub residual: f64,
    pub condition: f64,
    pub rank: usize,
}

/// Relative singular-value cutoff used for the numerical rank.
const RANK_RTOL: f64 = 1e-13;

pub(crate) fn numerical_rank(a: &DMatrix<f64>) -> (usize, f64) {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|&&s| s > RANK_RTOL * max).count();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    (rank, condition)
}

/// `None` when the matrix is numerically singular.
pub(crate) fn solve_refined(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Solution> {
    let (rank, condition) = numerical_rank(a);
    if rank < a.nrows() {
        return None;
    }
    let lu = a.clone().lu();
    let mut x = lu.solve(b)?;
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let residual = (b - a * &x).amax();
    Some(Solution {
        x,
        residual,
        condition,
        rank,
    })
}
