//! Log-space carrier for positive quantities that reach `e^{Θ(n)}` and
//! beyond. Zero is encoded as `-inf`; sums use log-sum-exp.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogValue {
    ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { ln: 0.0 };
    pub const INFINITY: LogValue = LogValue { ln: f64::INFINITY };

    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    /// Panics on negative input; `0.0` maps to [`LogValue::ZERO`].
    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0, "LogValue requires a nonnegative value, got {v}");
        Self { ln: v.ln() }
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Linear value; overflows to `+inf` when the quantity is not
    /// representable in `f64`.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    /// Whether the linear value fits in `f64`.
    pub fn is_representable(&self) -> bool {
        self.value().is_finite() || self.ln == f64::NEG_INFINITY
    }

    pub fn max(self, other: LogValue) -> LogValue {
        if self.ln >= other.ln {
            self
        } else {
            other
        }
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue {
            ln: log_sum_exp(self.ln, rhs.ln),
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue {
            ln: self.ln + rhs.ln,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        LogValue {
            ln: self.ln - rhs.ln,
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v.is_finite() {
            write!(f, "{v}")
        } else {
            write!(f, "10^{:.4}", self.log10())
        }
    }
}

impl PartialOrd<f64> for LogValue {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        if *other < 0.0 {
            return Some(Ordering::Greater);
        }
        self.ln.partial_cmp(&other.ln())
    }
}

impl PartialEq<f64> for LogValue {
    fn eq(&self, other: &f64) -> bool {
        *other >= 0.0 && self.ln == other.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn add_matches_linear_when_representable() {
        let a = LogValue::from_value(3.5);
        let b = LogValue::from_value(0.25);
        assert_relative_eq!((a + b).value(), 3.75, max_relative = 1e-14);
    }

    #[test]
    fn add_survives_huge_exponents() {
        let a = LogValue::from_ln(1e4);
        let b = LogValue::from_ln(1e4 - 2.0);
        let sum = a + b;
        assert_relative_eq!(sum.ln(), 1e4 + (-2.0f64).exp().ln_1p(), max_relative = 1e-14);
        assert!(!sum.is_representable());
    }

    #[test]
    fn zero_is_absorbing_for_mul_and_neutral_for_add() {
        let x = LogValue::from_value(7.0);
        assert_eq!((x * LogValue::ZERO).ln(), f64::NEG_INFINITY);
        assert_relative_eq!((x + LogValue::ZERO).value(), 7.0, max_relative = 1e-14);
    }

    #[test]
    fn ordering() {
        assert!(LogValue::from_value(2.0) > LogValue::from_value(1.5));
        assert!(LogValue::ZERO < LogValue::from_value(1e-300));
        assert!(LogValue::from_ln(500.0) > 1.0);
    }
}
