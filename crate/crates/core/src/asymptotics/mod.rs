//! Tail limits and boundedness checks turned into pass/fail reports.

mod report;
mod verify;

pub use report::{Claim, Measurement, VerificationReport, VerifySettings};
pub use verify::{
    predicted, verify_propositions, verify_theorem_1, verify_theorem_2, verify_theorem_a, THEOREM_2_CLAIMS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fewest samples a tail window may hold.
pub const MIN_TAIL_SAMPLES: usize = 8;

/// Two-window estimate of a tail limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate<T> {
    /// Log-time mean over the full trailing window.
    pub value: T,
    /// Log-time mean over the trailing half window.
    pub half_window_value: T,
    /// `|value - half_window_value|`.
    pub spread: T,
}

impl<T: Real> LimitEstimate<T> {
    pub fn to_f64(self) -> LimitEstimate<f64> {
        LimitEstimate {
            value: self.value.as_f64(),
            half_window_value: self.half_window_value.as_f64(),
            spread: self.spread.as_f64(),
        }
    }
}

/// Indices of samples with `log10(1 + t) >= log10(1 + t_last) - decades`.
fn window<T: Real>(ts: &[T], decades: T) -> std::ops::Range<usize> {
    let Some(&last) = ts.last() else { return 0..0 };
    let cut = (T::one() + last).log10() - decades;
    ts.partition_point(|&t| (T::one() + t).log10() < cut)..ts.len()
}

/// Trapezoidal mean of `values` against `ln(1 + t)`.
fn log_time_mean<T: Real>(ts: &[T], values: &[T]) -> T {
    let x: Vec<T> = ts.iter().map(|&t| t.ln_1p()).collect();
    let span = x[x.len() - 1] - x[0];
    if span <= T::zero() {
        return values.iter().copied().sum::<T>() / T::lit(values.len() as f64);
    }
    let mut acc = T::zero();
    for i in 1..x.len() {
        acc += (x[i] - x[i - 1]) * (values[i] + values[i - 1]) / T::lit(2.0);
    }
    acc / span
}

pub fn estimate_limit<T: Real>(ts: &[T], values: &[T], window_decades: T) -> Result<LimitEstimate<T>> {
    if ts.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: ts.len(), found: values.len() });
    }
    if !(window_decades > T::zero()) {
        return Err(Error::InvalidParameter(format!("window must be positive, got {window_decades}")));
    }
    let full = window(ts, window_decades);
    if full.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail { available: full.len(), required: MIN_TAIL_SAMPLES });
    }
    let half = window(ts, window_decades / T::lit(2.0));
    let half = if half.len() < 2 { full.end - 2..full.end } else { half };
    let value = log_time_mean(&ts[full.clone()], &values[full]);
    let half_window_value = log_time_mean(&ts[half.clone()], &values[half]);
    Ok(LimitEstimate { value, half_window_value, spread: (value - half_window_value).abs() })
}

/// Least-squares slope of `log_values` against `ln(1 + t)` over the trailing
/// window. Non-finite logs (below-floor samples) are skipped.
pub fn tail_slope<T: Real>(ts: &[T], log_values: &[T], window_decades: T) -> Result<T> {
    if ts.len() != log_values.len() {
        return Err(Error::DimensionMismatch { expected: ts.len(), found: log_values.len() });
    }
    let range = window(ts, window_decades);
    let pts: Vec<(T, T)> = range.map(|i| (ts[i].ln_1p(), log_values[i])).filter(|(_, y)| y.is_finite()).collect();
    if pts.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail { available: pts.len(), required: MIN_TAIL_SAMPLES });
    }
    let n = T::lit(pts.len() as f64);
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: T = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::InsufficientTail { available: 1, required: MIN_TAIL_SAMPLES });
    }
    Ok(sxy / sxx)
}
