use super::centered_derivative;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which part of the comparison argument a sample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Negative,
    /// `f' <= -K5 sqrt(f) (sqrt(f) - K6)` fails.
    Inequality,
    /// `f(t) <= max{f(0), K6^2}` fails.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub index: usize,
    pub t: T,
    pub violation: Violation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOutcome<T> {
    pub holds: bool,
    /// `max{f(0), K6^2}`.
    pub bound: T,
    /// First violating sample.
    pub witness: Option<Witness<T>>,
}

/// Relative slack used by [`comparison_lemma_check`].
pub const COMPARISON_TOLERANCE: f64 = 1e-6;

pub fn comparison_lemma_check<T: Real>(ts: &[T], fs: &[T], k5: T, k6: T) -> Result<ComparisonOutcome<T>> {
    comparison_lemma_check_with_tolerance(ts, fs, k5, k6, T::lit(COMPARISON_TOLERANCE))
}

/// Checks the differential inequality by three-point differences and the
/// resulting a priori bound, each up to relative slack `tol`.
pub fn comparison_lemma_check_with_tolerance<T: Real>(
    ts: &[T],
    fs: &[T],
    k5: T,
    k6: T,
    tol: T,
) -> Result<ComparisonOutcome<T>> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter("comparison check needs samples".into()));
    }
    let df = centered_derivative(ts, fs)?;
    let bound = fs[0].max(k6 * k6);
    let fail = |index: usize, violation| ComparisonOutcome {
        holds: false,
        bound,
        witness: Some(Witness { index, t: ts[index], violation }),
    };
    for (i, &f) in fs.iter().enumerate() {
        if f < T::zero() || !f.is_finite() {
            return Ok(fail(i, Violation::Negative));
        }
        if i >= 1 && i + 1 < fs.len() {
            let root = f.sqrt();
            let rhs = -k5 * root * (root - k6);
            let scale = df[i - 1].abs() + k5 * f + k5 * root * k6;
            if df[i - 1] > rhs + tol * scale {
                return Ok(fail(i, Violation::Inequality));
            }
        }
        if f > bound * (T::one() + tol) {
            return Ok(fail(i, Violation::Bound));
        }
    }
    Ok(ComparisonOutcome { holds: true, bound, witness: None })
}
