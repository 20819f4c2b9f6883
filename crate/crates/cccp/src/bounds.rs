//! Analytic estimates of the expected hitting time and of the metastable
//! band, all evaluated in log-space so that super-exponential regimes never
//! overflow.
//!
//! Two families live here and the CLI labels them accordingly:
//!
//! - *rigorous*: the escape-rate lower bound `ρ`, the unconditional upper
//!   bound `T̂_mix + ⌈n ln n⌉/ρ`, the unconditional lower bound
//!   `1/(5 q*^n)`, and the metastability deviation probabilities;
//! - *heuristic*: the mean-field interval, derived under spatial/temporal
//!   independence assumptions that do not hold for the real chain.

use serde::Serialize;

use crate::chain::Params;
use crate::error::{Error, Result};
use crate::logspace::LogValue;
use crate::marginal::MarginalModel;

/// Mean-field sandwich for `E[T]` at tolerance `epsilon`:
/// `T̂(1 - q*^n T̂) + (1-q*^n)^{T̂+1}/q*^n <= E[T] <= T̂ + (q*-ε)^{-n}`.
///
/// Heuristic: both sides assume independent coupon indicators. The lower
/// side's first term is clamped at zero where the bound is vacuous.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldInterval {
    pub lower: LogValue,
    pub upper: LogValue,
    pub t_mix: u64,
    pub epsilon: f64,
}

pub fn mean_field_interval(params: &Params, epsilon: f64) -> Result<MeanFieldInterval> {
    if params.p() >= 1.0 {
        return Err(Error::NonAbsorbing);
    }
    let model = MarginalModel::from_params(params);
    let q_star = model.q_star();
    if epsilon <= 0.0 || epsilon >= q_star {
        return Err(Error::InvalidEpsilon {
            epsilon,
            limit: q_star,
        });
    }
    let n = params.n() as f64;
    let t_mix = model.mixing_time(epsilon);
    let t = t_mix as f64;

    let ln_qn = n * q_star.ln(); // ln q*^n
    // Upper: T̂ + (q* - ε)^{-n}.
    let upper = LogValue::from_value(t) + LogValue::from_ln(-n * (q_star - epsilon).ln());

    // Lower: max(0, T̂ (1 - q*^n T̂)) + (1 - q*^n)^{T̂+1} / q*^n.
    let climb = (t * (1.0 - ln_qn.exp() * t)).max(0.0);
    let ln_escape = (t + 1.0) * (-ln_qn.exp()).ln_1p() - ln_qn;
    let lower = LogValue::from_value(climb) + LogValue::from_ln(ln_escape);

    Ok(MeanFieldInterval {
        lower,
        upper,
        t_mix,
        epsilon,
    })
}

/// The five qualitative growth regimes of `E[T]`, plus the degenerate ends.
///
/// Asymptotic classes are bucketed with fixed finite-`n` cutoffs: `np`
/// against `0.1` and `10` (the `1/n` boundary and its ±10x zone, which is
/// the `p = c/n` class itself), then `p n^2 / ln n` against the same
/// cutoffs for the `ln n / n^2` boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HittingRegime {
    /// `p = o(ln n / n^2)`: behaves like the classical collector, `Θ(n ln n)`.
    Classical,
    /// `p = c ln n / n^2`: polynomial `n^Θ(c)`.
    SuperClassical,
    /// Between `ln n / n^2` and `1/n`: `e^{Θ(n^2 p)}`.
    MetastableI,
    /// `p = c/n`: exponential `Θ((1+c)^n)`.
    MetastableII,
    /// `p = ω(1/n)`: super-exponential `Θ((np/(1-p))^n)`.
    MetastableIII,
    /// `p = 1`: the collection never completes.
    Infinite,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeReport {
    pub regime: HittingRegime,
    /// Order-of-magnitude estimate of `E[T]`: `n ln n + q*^{-n}` in
    /// log-space. Agrees asymptotically with each regime's displayed
    /// expression and is monotone in `p`, which the per-regime asymptotic
    /// forms are not at bucket boundaries.
    pub scale: LogValue,
}

pub fn hitting_regime(params: &Params) -> RegimeReport {
    let n = params.n() as f64;
    let p = params.p();
    if p >= 1.0 {
        return RegimeReport {
            regime: HittingRegime::Infinite,
            scale: LogValue::INFINITY,
        };
    }
    let regime = if p == 0.0 {
        HittingRegime::Classical
    } else {
        let c_loss = n * p;
        if c_loss > 10.0 {
            HittingRegime::MetastableIII
        } else if c_loss >= 0.1 {
            HittingRegime::MetastableII
        } else if params.n() == 1 {
            HittingRegime::Classical
        } else {
            let c_mix = p * n * n / n.ln();
            if c_mix > 10.0 {
                HittingRegime::MetastableI
            } else if c_mix >= 0.1 {
                HittingRegime::SuperClassical
            } else {
                HittingRegime::Classical
            }
        }
    };
    let q_star = MarginalModel::from_params(params).q_star();
    let mixing_scale = LogValue::from_value(n * n.ln().max(0.0));
    let escape_scale = LogValue::from_ln(-n * q_star.ln());
    RegimeReport {
        regime,
        scale: mixing_scale + escape_scale,
    }
}

/// Rigorous lower bound `ρ = q* (1-ε) (1-p)^{n^2 ln n}` on the probability
/// of completing the collection within one block of `⌈n ln n⌉` rounds from
/// any good state (count at least `(1-ε) n q*`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EscapeBound {
    pub rho: LogValue,
    /// Block length `m = ⌈n ln n⌉` (at least 1).
    pub block_len: u64,
    /// Smallest good count, `⌈(1-ε) n q*⌉`.
    pub good_threshold: u64,
    pub epsilon: f64,
}

pub fn escape_rate(params: &Params, epsilon: f64) -> Result<EscapeBound> {
    if epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidEpsilon {
            epsilon,
            limit: 1.0,
        });
    }
    let n = params.n() as f64;
    let p = params.p();
    let q_star = MarginalModel::from_params(params).q_star();
    // ln ρ; (1-p)^{n^2 ln n} has a real-valued exponent. p = 1 gives -inf.
    let ln_rho = if p >= 1.0 {
        f64::NEG_INFINITY
    } else {
        q_star.ln() + (1.0 - epsilon).ln() + n * n * n.ln().max(0.0) * (1.0 - p).ln()
    };
    Ok(EscapeBound {
        rho: LogValue::from_ln(ln_rho),
        block_len: (n * n.ln()).ceil().max(1.0) as u64,
        good_threshold: ((1.0 - epsilon) * n * q_star).ceil() as u64,
        epsilon,
    })
}

/// Rigorous upper bound `E[T] <= T̂_mix(ε) + ⌈n ln n⌉ / ρ`.
pub fn unconditional_upper_bound(params: &Params, epsilon: f64) -> Result<LogValue> {
    let escape = escape_rate(params, epsilon)?;
    let t_mix = MarginalModel::from_params(params).mixing_time(epsilon);
    Ok(LogValue::from_value(t_mix as f64) + LogValue::from_value(escape.block_len as f64) / escape.rho)
}

/// Rigorous lower bound `E[T] >= 1/(5 q*^n)`.
pub fn unconditional_lower_bound(params: &Params) -> LogValue {
    let n = params.n() as f64;
    let q_star = MarginalModel::from_params(params).q_star();
    LogValue::from_ln(-(5.0f64).ln() - n * q_star.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetastabilityVariant {
    /// `p = O(1/n)`: deviation from the band `|  |S_t| - n q* | > 2δ n q*`
    /// over a window of `L` rounds is at most `2L e^{-δ²(1-δ) n q* / 3}`.
    SmallP,
    /// `p = ω(1/n)`: exceeding `δ n` coupons within the window has
    /// probability at most `L e^{-δ² n / 4}`.
    LargeP,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetastabilityBound {
    pub delta: f64,
    pub window: u64,
    pub prob_bound: LogValue,
    pub variant: MetastabilityVariant,
    /// The displayed expression exceeds 1 and carries no information.
    pub vacuous: bool,
}

/// Union-bound probability that the collection size leaves the metastable
/// band at some point of an `L`-round window starting at the marginal
/// mixing time. Callers choosing the mixing time must respect the small-p
/// precondition `ε <= δ q*`.
pub fn metastability_deviation_bound(
    params: &Params,
    delta: f64,
    window: u64,
    variant: MetastabilityVariant,
) -> Result<MetastabilityBound> {
    if !(0.0..1.0).contains(&delta) || delta <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if window < 1 {
        return Err(Error::InvalidParams("window must be >= 1".into()));
    }
    let n = params.n() as f64;
    let q_star = MarginalModel::from_params(params).q_star();
    let ln_window = (window as f64).ln();
    let ln_bound = match variant {
        MetastabilityVariant::SmallP => {
            (2.0f64).ln() + ln_window - delta * delta * (1.0 - delta) * n * q_star / 3.0
        }
        MetastabilityVariant::LargeP => ln_window - delta * delta * n / 4.0,
    };
    Ok(MetastabilityBound {
        delta,
        window,
        prob_bound: LogValue::from_ln(ln_bound),
        variant,
        vacuous: ln_bound > 0.0,
    })
}
