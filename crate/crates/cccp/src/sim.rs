//! Seeded Monte Carlo engine.
//!
//! Reproducibility contract: all randomness comes from ChaCha12 seeded with
//! the master seed, with replication `r` on its own ChaCha stream
//! (`set_stream(r)`). Identical `(seed, params, runs)` therefore yield
//! bitwise-identical results regardless of scheduling, and replications are
//! safe to run concurrently as long as results are merged in replication
//! order.
//!
//! Hitting-time sampling walks the reduced count chain, which has the same
//! hitting law as the full chain; the set-valued chain is used where coupon
//! identity matters (marginal estimation, monotone coupling).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::chain::{step_full, step_reduced, FullState, Params};
use crate::error::{Error, Result};

/// Identifier printed by `--version` and embedded in run manifests.
pub const PRNG_ID: &str = "chacha12/stream-per-replication";

/// Hitting times are super-exponential in parts of the parameter space, so
/// simulation must censor; the censored fraction is always surfaced.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

pub type SimRng = ChaCha12Rng;

/// Independent substream for one replication of a batch.
pub fn replication_rng(master_seed: u64, replication: u64) -> SimRng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// One sampled hitting time; `hitting_time` is `None` when the run was
/// censored at the step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimOutcome {
    pub hitting_time: Option<u64>,
    pub steps_used: u64,
    pub seed: u64,
    pub replication: u64,
}

impl SimOutcome {
    pub fn censored(&self) -> bool {
        self.hitting_time.is_none()
    }
}

/// Samples one hitting time of the reduced chain from the empty collection.
pub fn simulate_hitting_time(params: &Params, seed: u64, max_steps: u64) -> SimOutcome {
    run_replication(params, seed, 0, max_steps)
}

/// As [`simulate_hitting_time`] on the given replication substream.
pub fn run_replication(params: &Params, seed: u64, replication: u64, max_steps: u64) -> SimOutcome {
    assert!(max_steps >= 1);
    let mut rng = replication_rng(seed, replication);
    let n = params.n();
    let mut k = 0usize;
    for t in 1..=max_steps {
        k = step_reduced(k, params, &mut rng);
        if k == n {
            return SimOutcome {
                hitting_time: Some(t),
                steps_used: t,
                seed,
                replication,
            };
        }
    }
    SimOutcome {
        hitting_time: None,
        steps_used: max_steps,
        seed,
        replication,
    }
}

/// A single `|S_t|` path, `sizes[t]` for `t = 0..=horizon`.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub sizes: Vec<usize>,
    pub params: Params,
    pub seed: u64,
    pub replication: u64,
}

/// Records the collection-size path of the reduced chain.
pub fn simulate_trajectory(params: &Params, seed: u64, horizon: u64) -> TrajectoryRecord {
    simulate_trajectory_rep(params, seed, 0, horizon)
}

pub fn simulate_trajectory_rep(
    params: &Params,
    seed: u64,
    replication: u64,
    horizon: u64,
) -> TrajectoryRecord {
    assert!(horizon >= 1);
    let mut rng = replication_rng(seed, replication);
    let mut sizes = Vec::with_capacity(horizon as usize + 1);
    let mut k = 0usize;
    sizes.push(k);
    for _ in 0..horizon {
        k = step_reduced(k, params, &mut rng);
        sizes.push(k);
    }
    TrajectoryRecord {
        sizes,
        params: *params,
        seed,
        replication,
    }
}

/// Same path law, via the set-valued chain; used to cross-validate the
/// reduced chain.
pub fn simulate_trajectory_full(params: &Params, seed: u64, horizon: u64) -> TrajectoryRecord {
    assert!(horizon >= 1);
    let mut rng = replication_rng(seed, 0);
    let mut sizes = Vec::with_capacity(horizon as usize + 1);
    let mut state = FullState::empty();
    sizes.push(0);
    for _ in 0..horizon {
        state = step_full(&state, params, &mut rng);
        sizes.push(state.len());
    }
    TrajectoryRecord {
        sizes,
        params: *params,
        seed,
        replication: 0,
    }
}

/// Result of running two chains on shared randomness, with the smaller loss
/// probability first.
#[derive(Debug, Clone, Serialize)]
pub struct CoupledOutcome {
    /// Outcome for the chain with loss probability `p1`.
    pub low: SimOutcome,
    /// Outcome for the chain with loss probability `p2 >= p1`.
    pub high: SimOutcome,
    /// Whether `S_t^{(p1)} ⊇ S_t^{(p2)}` held at every observed step.
    pub inclusion_held: bool,
}

/// Runs the two full-set chains on identical randomness: a shared coupon
/// draw per round and one shared uniform per coupon, thresholded at `p1`
/// and `p2`. Verifies the set inclusion pathwise at every step.
pub fn simulate_coupled(
    params1: &Params,
    params2: &Params,
    seed: u64,
    max_steps: u64,
) -> Result<CoupledOutcome> {
    if params1.n() != params2.n() {
        return Err(Error::InvalidParams(format!(
            "coupled chains need matching n, got {} and {}",
            params1.n(),
            params2.n()
        )));
    }
    if params1.p() > params2.p() {
        return Err(Error::InvalidParams(format!(
            "coupling requires p1 <= p2, got p1 = {} > p2 = {}",
            params1.p(),
            params2.p()
        )));
    }
    assert!(max_steps >= 1);

    let n = params1.n();
    let (p1, p2) = (params1.p(), params2.p());
    let mut rng = replication_rng(seed, 0);
    let mut s1: BTreeSet<usize> = BTreeSet::new();
    let mut s2: BTreeSet<usize> = BTreeSet::new();
    let mut t1: Option<u64> = None;
    let mut t2: Option<u64> = None;
    let mut inclusion_held = true;
    let mut steps = 0;

    for t in 1..=max_steps {
        steps = t;
        let u: f64 = rng.random();
        let c = ((u * n as f64) as usize + 1).min(n);
        s1.insert(c);
        s2.insert(c);
        for i in 1..=n {
            let u: f64 = rng.random();
            if u < p1 {
                s1.remove(&i);
            }
            if u < p2 {
                s2.remove(&i);
            }
        }
        if !s2.iter().all(|i| s1.contains(i)) {
            inclusion_held = false;
        }
        if t1.is_none() && s1.len() == n {
            t1 = Some(t);
        }
        if t2.is_none() && s2.len() == n {
            t2 = Some(t);
        }
        if t1.is_some() && t2.is_some() {
            break;
        }
    }

    Ok(CoupledOutcome {
        low: SimOutcome {
            hitting_time: t1,
            steps_used: steps,
            seed,
            replication: 0,
        },
        high: SimOutcome {
            hitting_time: t2,
            steps_used: steps,
            seed,
            replication: 0,
        },
        inclusion_held,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginalEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Empirical frequency of `{coupon 1 ∈ S_t}` over independent full-chain
/// runs (coupon 1 stands in for any coupon, by symmetry).
pub fn estimate_marginal(params: &Params, t: u64, runs: u64, seed: u64) -> MarginalEstimate {
    assert!(runs >= 1);
    let mut held = 0u64;
    for r in 0..runs {
        let mut rng = replication_rng(seed, r);
        let mut state = FullState::empty();
        for _ in 0..t {
            state = step_full(&state, params, &mut rng);
        }
        if state.contains(1) {
            held += 1;
        }
    }
    let estimate = held as f64 / runs as f64;
    MarginalEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / runs as f64).sqrt(),
    }
}

/// Batch summary over `runs` independent replications.
#[derive(Debug, Clone, Serialize)]
pub struct BatchStats {
    /// Mean hitting time over uncensored runs; `None` when every run was
    /// censored.
    pub mean: Option<f64>,
    /// Sample variance over uncensored runs (n-1 denominator); `None` with
    /// fewer than 2 uncensored runs, 0 for identical samples.
    pub variance: Option<f64>,
    pub censored: u64,
    pub runs: u64,
    pub outcomes: Vec<SimOutcome>,
}

impl BatchStats {
    pub fn stderr(&self) -> Option<f64> {
        match (self.mean, self.variance) {
            (Some(_), Some(var)) => {
                let m = (self.runs - self.censored) as f64;
                Some((var / m).sqrt())
            }
            _ => None,
        }
    }
}

pub fn batch_hitting_stats(params: &Params, runs: u64, seed: u64, max_steps: u64) -> BatchStats {
    assert!(runs >= 1);
    let outcomes: Vec<SimOutcome> = (0..runs)
        .map(|r| run_replication(params, seed, r, max_steps))
        .collect();
    let censored = outcomes.iter().filter(|o| o.censored()).count() as u64;
    let times: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.hitting_time)
        .map(|t| t as f64)
        .collect();
    let (mean, variance) = if times.is_empty() {
        (None, None)
    } else {
        let m = times.iter().sum::<f64>() / times.len() as f64;
        let var = if times.len() < 2 {
            None
        } else {
            Some(
                times.iter().map(|t| (t - m) * (t - m)).sum::<f64>()
                    / (times.len() - 1) as f64,
            )
        };
        (Some(m), var)
    };
    BatchStats {
        mean,
        variance,
        censored,
        runs,
        outcomes,
    }
}
