//! Careless coupon collector: a collector draws one of `n` coupon types
//! uniformly at random each round, then loses each held coupon independently
//! with probability `p`.
//!
//! The crate provides:
//!
//! - the chain itself, both as a set-valued process and as the reduced
//!   count chain on `{0..n}` with its lower-Hessenberg transition rows
//!   ([`chain`]);
//! - closed-form marginal dynamics: the affine recurrence
//!   `q_{t+1} = a q_t + b`, its fixed point `q*` and the marginal mixing
//!   time ([`marginal`]);
//! - an `O(n^2)` exact expected-hitting-time solver exploiting the
//!   Hessenberg structure, plus a dense pivoted reference solver
//!   ([`hitting`]);
//! - rigorous and mean-field bounds on the expected hitting time, evaluated
//!   in log-space so that `e^{Θ(n)}` regimes never overflow ([`bounds`]);
//! - a seeded Monte Carlo engine with censoring, trajectory recording and
//!   the monotone coupling construction ([`sim`]).

pub mod bounds;
pub mod chain;
pub mod error;
pub mod hitting;
pub mod logspace;
pub mod marginal;
pub mod sim;

pub use chain::Params;
pub use error::{Error, Result};
pub use logspace::LogValue;
