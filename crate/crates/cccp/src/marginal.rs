//! Closed-form marginal dynamics: the probability `q_t` that a fixed coupon
//! is held at round `t` obeys the affine recurrence `q_{t+1} = a q_t + b`
//! with `a = (1-p)(1-1/n)` and `b = (1-p)/n`, contracting to the fixed
//! point `q* = (1-p)/(1-p+np)`.

use serde::Serialize;

use crate::chain::Params;

/// Coefficients of the marginal recurrence and its fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalModel {
    a: f64,
    b: f64,
    q_star: f64,
}

impl MarginalModel {
    pub fn from_params(params: &Params) -> Self {
        let n = params.n() as f64;
        let p = params.p();
        let a = (1.0 - p) * (1.0 - 1.0 / n);
        let b = (1.0 - p) / n;
        // b / (1 - a) simplified; exact 1 at p = 0, exact 1 - p at n = 1.
        let q_star = if p == 0.0 {
            1.0
        } else {
            (1.0 - p) / (1.0 - p + n * p)
        };
        Self { a, b, q_star }
    }

    /// Contraction factor `(1-p)(1-1/n)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Inflow term `(1-p)/n`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Fixed point `(1-p)/(1-p+np)`.
    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    /// Closed-form `q_t = q* + a^t (q_0 - q*)`.
    pub fn q_at(&self, t: u64, q0: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&q0));
        self.q_star + self.a.powf(t as f64) * (q0 - self.q_star)
    }

    /// Smallest integer `t` with `a^t q* <= epsilon` (convergence from
    /// `q_0 = 0`), i.e. the ceiling of `ln(q*/ε) / ln(1/a)`.
    ///
    /// Returns 0 when `epsilon >= q*` (already within tolerance); when
    /// `a = 0` (`n = 1` or `p = 1`) the marginal sits at its fixed point
    /// after exactly one round, so the answer is 1.
    pub fn mixing_time(&self, epsilon: f64) -> u64 {
        assert!(epsilon > 0.0, "epsilon must be positive");
        if epsilon >= self.q_star {
            return 0;
        }
        if self.a <= 0.0 {
            return 1;
        }
        let raw = ((self.q_star / epsilon).ln() / (1.0 / self.a).ln()).ceil();
        let mut t = if raw.is_finite() && raw > 0.0 {
            raw as u64
        } else {
            0
        };
        // Guard against rounding in the logs: enforce minimality directly.
        while self.a.powf(t as f64) * self.q_star > epsilon {
            t += 1;
        }
        while t > 0 && self.a.powf((t - 1) as f64) * self.q_star <= epsilon {
            t -= 1;
        }
        t
    }
}

/// Default tolerance `q*/n` handed to the mixing time by downstream bound
/// computations; scales with the metastability precondition `ε <= δ q*`.
pub fn default_epsilon(params: &Params) -> f64 {
    let model = MarginalModel::from_params(params);
    model.q_star() / params.n() as f64
}

/// Heuristic bucketing of `q*` by the size of `np`. Asymptotic classes are
/// not decidable from a single `(n, p)`, so fixed cutoffs are used: `np <=
/// 0.1` near one, `np <= 10` constant, above that vanishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QStarRegimeLabel {
    NearOne,
    Constant,
    Vanishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QStarRegime {
    pub label: QStarRegimeLabel,
    /// Exact closed-form value of `q*` for the instance.
    pub scale: f64,
}

pub fn classify_qstar_regime(params: &Params) -> QStarRegime {
    let q_star = MarginalModel::from_params(params).q_star();
    let np = params.n() as f64 * params.p();
    let label = if np <= 0.1 {
        QStarRegimeLabel::NearOne
    } else if np <= 10.0 {
        QStarRegimeLabel::Constant
    } else {
        QStarRegimeLabel::Vanishing
    };
    QStarRegime {
        label,
        scale: q_star,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(n: usize, p: f64) -> Params {
        Params::new(n, p).unwrap()
    }

    #[test]
    fn coeffs_examples() {
        let m = MarginalModel::from_params(&params(10, 0.0));
        assert_abs_diff_eq!(m.a(), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(m.b(), 0.1, epsilon = 1e-15);
        assert_eq!(m.q_star(), 1.0);

        let m = MarginalModel::from_params(&params(10, 0.1));
        assert_relative_eq!(m.q_star(), 0.9 / 1.9, max_relative = 1e-15);

        // p = c/n with c = 1: q* -> 1/2 as n grows.
        let m = MarginalModel::from_params(&params(1_000_000, 1e-6));
        assert_abs_diff_eq!(m.q_star(), 0.5, epsilon = 1e-5);
    }

    #[test]
    fn n1_special_case() {
        let m = MarginalModel::from_params(&params(1, 0.3));
        assert_eq!(m.a(), 0.0);
        assert_relative_eq!(m.q_star(), 0.7, max_relative = 1e-15);
    }

    #[test]
    fn fixed_point_identity() {
        for &(n, p) in &[(2, 0.1), (10, 0.3), (100, 0.01), (7, 0.9)] {
            let m = MarginalModel::from_params(&params(n, p));
            assert_relative_eq!(
                m.q_star(),
                m.a() * m.q_star() + m.b(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn q_at_examples() {
        let m = MarginalModel::from_params(&params(10, 0.0));
        assert_abs_diff_eq!(m.q_at(1, 0.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.q_at(44, 0.0), 1.0 - 0.9f64.powi(44), epsilon = 1e-15);
        assert_abs_diff_eq!(m.q_at(44, 0.0), 0.9903023, epsilon = 1e-6);

        let m = MarginalModel::from_params(&params(5, 0.2));
        assert_abs_diff_eq!(m.q_at(17, m.q_star()), m.q_star(), epsilon = 1e-15);
    }

    #[test]
    fn contraction_step_ratio() {
        let m = MarginalModel::from_params(&params(10, 0.1));
        for t in 0..60u64 {
            let d0 = (m.q_at(t, 0.0) - m.q_star()).abs();
            let d1 = (m.q_at(t + 1, 0.0) - m.q_star()).abs();
            assert_relative_eq!(d1, m.a() * d0, max_relative = 1e-12);
        }
    }

    #[test]
    fn monotone_increasing_from_zero() {
        let m = MarginalModel::from_params(&params(10, 0.1));
        let mut prev = 0.0;
        for t in 1..200u64 {
            let q = m.q_at(t, 0.0);
            assert!(q >= prev && q <= m.q_star());
            // Strict growth until the increment a^t q* falls below f64
            // resolution.
            if m.a().powf(t as f64) * m.q_star() > 1e-14 {
                assert!(q > prev);
            }
            prev = q;
        }
    }

    #[test]
    fn mixing_time_examples() {
        let m = MarginalModel::from_params(&params(10, 0.0));
        assert_eq!(m.mixing_time(0.01), 44);

        let m = MarginalModel::from_params(&params(2, 0.1));
        assert_eq!(m.mixing_time(0.1), 3);

        // epsilon >= q* means no waiting at all.
        assert_eq!(m.mixing_time(0.9), 0);
        // a = 0: converged after exactly one round.
        let m = MarginalModel::from_params(&params(1, 0.4));
        assert_eq!(m.mixing_time(0.01), 1);
        assert_eq!(m.mixing_time(0.7), 0);
    }

    #[test]
    fn mixing_time_minimality() {
        for &(n, p, eps) in &[(10usize, 0.0, 0.01), (2, 0.1, 0.1), (50, 0.02, 1e-4)] {
            let m = MarginalModel::from_params(&params(n, p));
            let t = m.mixing_time(eps);
            assert!(m.a().powf(t as f64) * m.q_star() <= eps);
            if t >= 1 {
                assert!(m.a().powf((t - 1) as f64) * m.q_star() > eps);
            }
        }
    }

    #[test]
    fn qstar_regime_examples() {
        let r = classify_qstar_regime(&params(1000, 1e-6));
        assert_eq!(r.label, QStarRegimeLabel::NearOne);

        let r = classify_qstar_regime(&params(1000, 1e-3));
        assert_eq!(r.label, QStarRegimeLabel::Constant);
        assert_abs_diff_eq!(r.scale, 0.5, epsilon = 1e-3);

        let r = classify_qstar_regime(&params(1000, 0.1));
        assert_eq!(r.label, QStarRegimeLabel::Vanishing);
        assert_abs_diff_eq!(r.scale, 0.00892, epsilon = 1e-5);

        let r = classify_qstar_regime(&params(1000, 0.0));
        assert_eq!(r.label, QStarRegimeLabel::NearOne);
        assert_eq!(r.scale, 1.0);
    }
}
