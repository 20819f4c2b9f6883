//! Exact expected hitting times of the reduced chain.
//!
//! [`solve_hitting_times`] runs the `O(n^2)` specialized Gaussian
//! elimination on the lower-Hessenberg system `(I - Q) h = 1`: eliminating
//! column `c` touches only two entries of each row below the pivot plus one
//! entry of the right-hand side, and back-substitution walks the resulting
//! bidiagonal upper triangle. No pivoting is performed (column order is the
//! natural Hessenberg order).
//!
//! Because the count chain moves up by at most one state per round, the
//! eliminated pivots admit an exact closed form: `d_k = P(k, k+1) =
//! (1 - k/n)(1-p)^{k+1}`, the one-step upward probability. (Equivalently:
//! the chain must pass through `k -> k+1` to reach `n`, so censoring the
//! states below `k` never alters the upward rate.) Evaluating the pivots
//! analytically instead of by running subtractions makes every remaining
//! operation of the elimination a same-sign accumulation, so the computed
//! `h` is componentwise accurate even when the system's condition number is
//! of order `h(0)` itself — which reaches `1e90`+ in the metastable
//! regimes. A naive subtractive elimination (and equally a dense LU with
//! partial pivoting) loses all significance there; see
//! [`dense_oracle_solve`] for the reference oracle and its range of
//! validity.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chain::{build_reduced_system, build_transition_row, Params};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Hessenberg,
    DenseOracle,
}

/// Expected rounds to complete the collection from each starting count.
#[derive(Debug, Clone, Serialize)]
pub struct HittingSolution {
    /// `h[k]` = expected rounds to reach state `n` from state `k`, for
    /// `k` in `0..n`.
    pub h: Vec<f64>,
    /// `‖A h - 1‖_∞` against freshly rebuilt rows; `+inf` when the solve
    /// overflowed.
    pub residual_inf: f64,
    pub method: SolveMethod,
    /// Set when some `h(k)` exceeded the `f64` range. The entries are then
    /// `+inf` and log-domain bounds should be consulted instead.
    pub overflow: bool,
}

impl HittingSolution {
    /// `h(0) = E[T]`: the chain starts from the empty collection.
    pub fn h0(&self) -> f64 {
        self.h[0]
    }
}

/// Solves `(I - Q) h = 1` in `O(n^2)` time via Hessenberg forward
/// elimination and bidiagonal back-substitution.
pub fn solve_hitting_times(params: &Params) -> Result<HittingSolution> {
    let system = build_reduced_system(params)?;
    let n = params.n();
    let (mut rows, mut b) = system.into_parts();

    // Exact pivot of elimination stage c: the upward probability P(c, c+1).
    // The stage-c superdiagonal entry is -P(c, c+1) = -pivot(c), which
    // collapses the usual multiplier/update pair: with w_c = b_c / d_c, the
    // subdiagonal fill is plain accumulation of nonnegative terms and the
    // RHS update adds g * w_c >= 0. No subtraction occurs anywhere.
    let pivot = |c: usize| -> f64 {
        (1.0 - c as f64 / n as f64) * params.keep_prob().powi(c as i32 + 1)
    };

    let mut w = vec![0.0; n];
    for c in 0..n {
        w[c] = b[c] / pivot(c);
        let (_, tail) = rows.split_at_mut(c + 1);
        for (offset, row) in tail.iter_mut().enumerate() {
            let r = c + 1 + offset;
            let g = -row.lower[c]; // accumulated subdiagonal mass, >= 0
            row.lower[c] = 0.0;
            if r > c + 1 {
                // r = c + 1 would be the diagonal; its exact value is
                // pivot(c + 1), so the subtractive update is skipped.
                row.lower[c + 1] -= g;
            }
            b[r] += g * w[c];
        }
    }

    // Back-substitution telescopes: h(k) = w_k + h(k+1), since the
    // superdiagonal coefficient equals the negated pivot.
    let mut h = vec![0.0; n];
    h[n - 1] = w[n - 1];
    for k in (0..n - 1).rev() {
        h[k] = w[k] + h[k + 1];
    }

    finish(params, h, SolveMethod::Hessenberg)
}

/// `h(0)`, the expected number of rounds to complete the collection from
/// scratch.
pub fn expected_hitting_time(params: &Params) -> Result<f64> {
    solve_hitting_times(params).map(|s| s.h0())
}

/// Reference solver: dense `A`, LU with partial pivoting. `O(n^3)`, capped
/// at `n = 2000`; used by tests and the CLI's `--oracle` mode.
///
/// Partial pivoting is normwise backward stable but not componentwise
/// accurate: its forward relative error grows like `u * h(0)` (the
/// condition number of `I - Q` is of order `max_k h(k)`), so the oracle is
/// only trustworthy while `h(0)` stays well below `1e12` or so. Beyond
/// that the specialized subtraction-free solve is the accurate one —
/// verified against a 120-digit arbitrary-precision elimination.
pub fn dense_oracle_solve(params: &Params) -> Result<HittingSolution> {
    let n = params.n();
    if n > 2000 {
        return Err(Error::InvalidParams(format!(
            "dense oracle limited to n <= 2000, got {n}"
        )));
    }
    if params.p() >= 1.0 {
        return Err(Error::NonAbsorbing);
    }

    let mut a = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let row = build_transition_row(params, k)?;
        for (i, &prob) in row.probs().iter().take(n).enumerate() {
            a[(k, i)] = if i == k { 1.0 - prob } else { -prob };
        }
    }
    let b = DVector::from_element(n, 1.0);
    let h = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("dense LU solve failed (singular matrix)".into()))?;

    finish(params, h.iter().copied().collect(), SolveMethod::DenseOracle)
}

fn finish(params: &Params, h: Vec<f64>, method: SolveMethod) -> Result<HittingSolution> {
    let overflow = h.iter().any(|v| !v.is_finite());
    let residual_inf = if overflow {
        f64::INFINITY
    } else {
        build_reduced_system(params)?.residual_inf(&h)
    };
    Ok(HittingSolution {
        h: if overflow {
            h.iter().map(|v| if v.is_finite() { *v } else { f64::INFINITY }).collect()
        } else {
            h
        },
        residual_inf,
        method,
        overflow,
    })
}

/// `n`-th harmonic number, the classical `p = 0` baseline `E[T] = n H_n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}
