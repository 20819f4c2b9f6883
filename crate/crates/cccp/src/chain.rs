//! The careless-collector chain: problem parameters, the set-valued full
//! chain, the reduced count chain on `{0..n}` and its exact transition rows.
//!
//! The reduced chain tracks only the collection size `k = |S_t|`. One round
//! decomposes into two phases: with probability `1 - k/n` the drawn coupon is
//! new (so `k + 1` coupons are held before losses), otherwise it is redundant
//! (`k` held); each held coupon then survives independently with probability
//! `1 - p`. This two-phase decomposition yields the closed-form transition
//! rows and is sampled directly by [`step_reduced`].

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// A problem instance: `n` coupon types, per-round per-coupon loss
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    n: usize,
    p: f64,
}

impl Params {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams(format!("n must be >= 1, got {n}")));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "loss probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Per-round survival probability of a held coupon, `1 - p`.
    pub fn keep_prob(&self) -> f64 {
        1.0 - self.p
    }
}

/// Set of coupon indices (in `1..=n`) currently held by the collector.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FullState {
    owned: BTreeSet<usize>,
}

impl FullState {
    /// The initial state `S_0 = ∅`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_coupons<I: IntoIterator<Item = usize>>(coupons: I) -> Self {
        Self {
            owned: coupons.into_iter().collect(),
        }
    }

    pub fn owned(&self) -> &BTreeSet<usize> {
        &self.owned
    }

    pub fn len(&self) -> usize {
        self.owned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owned.is_empty()
    }

    pub fn contains(&self, coupon: usize) -> bool {
        self.owned.contains(&coupon)
    }

    pub fn is_complete(&self, params: &Params) -> bool {
        self.owned.len() == params.n()
    }
}

/// Draws the round's coupon uniformly from `1..=n`, consuming one uniform.
fn draw_coupon<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    ((u * n as f64) as usize + 1).min(n)
}

/// One round of the set-valued chain: gain the drawn coupon, then lose each
/// held coupon independently with probability `p`.
///
/// Consumes exactly one uniform for the draw plus one Bernoulli uniform per
/// element of `owned ∪ {C_t}`, realized in ascending coupon index. The order
/// is fixed only so that a given seed always yields the same trajectory.
pub fn step_full<R: Rng + ?Sized>(state: &FullState, params: &Params, rng: &mut R) -> FullState {
    let c = draw_coupon(params.n(), rng);
    let mut pool = state.owned.clone();
    pool.insert(c);
    let p = params.p();
    let owned = pool
        .into_iter()
        .filter(|_| rng.random::<f64>() >= p)
        .collect();
    FullState { owned }
}

/// One round of the reduced count chain, sampled without materializing the
/// transition row: a Bernoulli(`1 - k/n`) gain followed by binomial losses
/// over the held coupons.
///
/// Panics if `k > n`.
pub fn step_reduced<R: Rng + ?Sized>(k: usize, params: &Params, rng: &mut R) -> usize {
    let n = params.n();
    assert!(k <= n, "state index {k} out of range 0..={n}");
    let gain_prob = 1.0 - k as f64 / n as f64;
    let gained = rng.random::<f64>() < gain_prob;
    let held = if gained { k + 1 } else { k };
    held - sample_binomial(held, params.p(), rng)
}

fn sample_binomial<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> usize {
    if m == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return m;
    }
    Binomial::new(m as u64, p)
        .expect("p validated by Params")
        .sample(rng) as usize
}

/// Exact one-step law of the reduced chain from state `k`: `probs[i]` is the
/// probability of moving to state `i`. Entries above the first superdiagonal
/// are identically zero (the count grows by at most 1 per round).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTransitionRow {
    k: usize,
    probs: Vec<f64>,
}

impl ReducedTransitionRow {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Probabilities indexed by destination state `0..=n`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Builds the exact transition row of the reduced chain for state `k`.
///
/// The two terms of each entry come from the gain/no-gain phases: losses are
/// Binomial(`k+1`, `p`) after a successful gain and Binomial(`k`, `p`)
/// otherwise. Binomial weights are evaluated by a ratio recurrence anchored
/// at the distribution mode, so no factorial is ever formed and rows stay
/// accurate for `n` well beyond 10^4.
pub fn build_transition_row(params: &Params, k: usize) -> Result<ReducedTransitionRow> {
    let n = params.n();
    if k > n {
        return Err(Error::StateOutOfRange { k, n });
    }
    let p = params.p();
    let mut probs = vec![0.0; n + 1];

    let gain = 1.0 - k as f64 / n as f64;
    if gain > 0.0 {
        // j losses among the k+1 held coupons lands at k + 1 - j.
        for (j, w) in binomial_pmf(k + 1, p).iter().enumerate() {
            probs[k + 1 - j] += gain * w;
        }
    }
    if k > 0 {
        let redundant = k as f64 / n as f64;
        for (j, w) in binomial_pmf(k, p).iter().enumerate() {
            probs[k - j] += redundant * w;
        }
    }
    Ok(ReducedTransitionRow { k, probs })
}

/// Binomial(m, p) probability mass function.
///
/// Anchored at the mode via `ln_gamma`, then extended in both directions by
/// the exact ratio `pmf[j+1]/pmf[j] = (m-j)/(j+1) * p/(1-p)`. Starting the
/// recurrence from `pmf[0] = (1-p)^m` instead would underflow to an all-zero
/// row already at moderate `m`.
pub(crate) fn binomial_pmf(m: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    if p <= 0.0 || m == 0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[m] = 1.0;
        return pmf;
    }
    let q = 1.0 - p;
    let mode = (((m + 1) as f64) * p).floor().min(m as f64) as usize;
    let ln_mode = ln_choose(m, mode) + mode as f64 * p.ln() + (m - mode) as f64 * q.ln();
    pmf[mode] = ln_mode.exp();
    for j in mode..m {
        pmf[j + 1] = pmf[j] * ((m - j) as f64 / (j + 1) as f64) * (p / q);
    }
    for j in (1..=mode).rev() {
        pmf[j - 1] = pmf[j] * (j as f64 / (m - j + 1) as f64) * (q / p);
    }
    // The mode anchor carries the ~1e-14 relative error of ln_gamma, which
    // scales the whole pmf uniformly; renormalizing removes it so row sums
    // stay at unit roundoff for any m.
    let total: f64 = pmf.iter().sum();
    for v in &mut pmf {
        *v /= total;
    }
    pmf
}

fn ln_choose(m: usize, j: usize) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((m - j) as f64 + 1.0)
}

/// One row of `A = I - Q` in row-sparse Hessenberg form: a dense lower part
/// (columns `0..=k`) plus the single superdiagonal entry.
#[derive(Debug, Clone)]
pub struct HessRow {
    /// Columns `0..=k`, the diagonal last.
    pub lower: Vec<f64>,
    /// Column `k + 1`; zero for the last row, whose superdiagonal points at
    /// the absorbing state and is dropped from the system.
    pub super_diag: f64,
}

/// The linear system `(I - Q) h = 1` over the transient states `0..n-1`.
///
/// State `n` is absorbing for hitting-time purposes (`h(n) = 0`), so row `n`
/// of the transition matrix never enters the system.
#[derive(Debug, Clone)]
pub struct ReducedChainSystem {
    n: usize,
    rows: Vec<HessRow>,
    rhs: Vec<f64>,
}

impl ReducedChainSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[HessRow] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub(crate) fn into_parts(self) -> (Vec<HessRow>, Vec<f64>) {
        (self.rows, self.rhs)
    }

    /// Max-norm residual `‖A h - 1‖_∞` of a candidate solution, computed
    /// against freshly rebuilt rows.
    pub fn residual_inf(&self, h: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (k, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for (i, a) in row.lower.iter().enumerate() {
                acc += a * h[i];
            }
            if k + 1 < self.n {
                acc += row.super_diag * h[k + 1];
            }
            worst = worst.max((acc - self.rhs[k]).abs());
        }
        worst
    }
}

/// Assembles `(I - Q) h = 1` from the exact transition rows.
///
/// Fails with [`Error::NonAbsorbing`] at `p = 1`: the collection is then
/// never completed and the system has no finite solution.
pub fn build_reduced_system(params: &Params) -> Result<ReducedChainSystem> {
    if params.p() >= 1.0 {
        return Err(Error::NonAbsorbing);
    }
    let n = params.n();
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let row = build_transition_row(params, k)?;
        let probs = row.probs();
        let mut lower: Vec<f64> = probs[..=k].iter().map(|&v| -v).collect();
        lower[k] += 1.0;
        let super_diag = if k + 1 < n { -probs[k + 1] } else { 0.0 };
        rows.push(HessRow { lower, super_diag });
    }
    Ok(ReducedChainSystem {
        n,
        rows,
        rhs: vec![1.0; n],
    })
}
