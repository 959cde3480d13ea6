//! Overflow-safe carriers for exponentially weighted functionals.
//!
//! Quantities like `e^{2 lambda^2 B} |U|^2` overflow `f64` long before the
//! underlying bound is violated, and the band coefficients they multiply
//! underflow when squared. Every such functional is accumulated as a sum of
//! per-term logarithms and carried as a sign plus log-magnitude.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Why a functional has no finite logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Floor {
    /// Finite logarithm; the value is representable in log space.
    Above,
    /// Structurally zero: every contributing coefficient carried zero data.
    Zero,
    /// Contributing coefficients were flushed to zero by the integrator.
    Flushed,
}

/// Signed functional stored as `(sign, ln|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedValue<T> {
    log_value: T,
    negative: bool,
    floor: Floor,
    raw_hint: Option<T>,
}

impl<T: Real> WeightedValue<T> {
    pub fn from_log(negative: bool, log_value: T) -> Self {
        if log_value == T::neg_infinity() {
            return Self::zero();
        }
        let raw = log_value.exp();
        let raw_hint = (raw.is_finite() && raw > T::zero()).then(|| if negative { -raw } else { raw });
        Self { log_value, negative, floor: Floor::Above, raw_hint }
    }

    pub fn from_raw(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self::from_log(x < T::zero(), x.abs().ln())
        }
    }

    pub fn zero() -> Self {
        Self { log_value: T::neg_infinity(), negative: false, floor: Floor::Zero, raw_hint: Some(T::zero()) }
    }

    pub fn flushed() -> Self {
        Self { log_value: T::neg_infinity(), negative: false, floor: Floor::Flushed, raw_hint: None }
    }

    /// Multiplies by `exp(log_weight)`.
    pub fn weighted(self, log_weight: T) -> Self {
        match self.floor {
            Floor::Above => Self::from_log(self.negative, self.log_value + log_weight),
            _ => self,
        }
    }

    /// Relabels a zero value as flushed when the data that should feed it was nonzero.
    pub fn mark_flushed_if(self, flushed: bool) -> Self {
        if flushed && self.floor == Floor::Zero {
            Self::flushed()
        } else {
            self
        }
    }

    pub fn log_value(&self) -> T {
        self.log_value
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn floor(&self) -> Floor {
        self.floor
    }

    pub fn is_below_floor(&self) -> bool {
        self.floor != Floor::Above
    }

    /// `exp(log_value)` with sign, when representable.
    pub fn raw_hint(&self) -> Option<T> {
        self.raw_hint
    }
}

/// Streaming `ln(sum exp(x_i))`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        Self { max: T::neg_infinity(), scaled: T::zero() }
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn add_log(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + T::one();
            self.max = x;
        }
    }

    /// Adds `exp(log_weight) * x^2` without forming `x^2`.
    pub fn add_weighted_square(&mut self, log_weight: T, x: T) {
        if x != T::zero() {
            self.add_log(log_weight + T::lit(2.0) * x.abs().ln());
        }
    }

    pub fn ln(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Signed version of [`LogSumExp`], for sums whose terms change sign.
#[derive(Debug, Clone, Copy)]
pub struct SignedLogSum<T> {
    positive: LogSumExp<T>,
    negative: LogSumExp<T>,
}

impl<T: Real> Default for SignedLogSum<T> {
    fn default() -> Self {
        Self { positive: LogSumExp::default(), negative: LogSumExp::default() }
    }
}

impl<T: Real> SignedLogSum<T> {
    /// Adds the product `a * b` through `ln|a| + ln|b|`.
    pub fn add_product(&mut self, a: T, b: T) {
        if a == T::zero() || b == T::zero() {
            return;
        }
        let log = a.abs().ln() + b.abs().ln();
        if (a < T::zero()) != (b < T::zero()) {
            self.negative.add_log(log);
        } else {
            self.positive.add_log(log);
        }
    }

    /// Returns `(is_negative, ln|sum|)`.
    pub fn finish(&self) -> (bool, T) {
        let p = self.positive.ln();
        let n = self.negative.ln();
        if p == n {
            return (false, T::neg_infinity());
        }
        if p > n {
            (false, p + (-(n - p).exp()).ln_1p())
        } else {
            (true, n + (-(p - n).exp()).ln_1p())
        }
    }

    pub fn into_value(self) -> WeightedValue<T> {
        let (neg, log) = self.finish();
        WeightedValue::from_log(neg, log)
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn into_value(self) -> WeightedValue<T> {
        WeightedValue::from_log(false, self.ln())
    }
}
