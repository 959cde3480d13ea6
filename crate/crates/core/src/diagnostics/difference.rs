use crate::error::{Error, Result};
use crate::scalar::Real;

/// Three-point derivative on a nonuniform grid at every interior sample.
///
/// Entry `j` of the result is the derivative at `ts[j + 1]`. Exact for
/// quadratics.
pub fn centered_derivative<T: Real>(ts: &[T], fs: &[T]) -> Result<Vec<T>> {
    if ts.len() != fs.len() {
        return Err(Error::DimensionMismatch { expected: ts.len(), found: fs.len() });
    }
    Ok((1..ts.len().saturating_sub(1))
        .map(|i| {
            let h1 = ts[i] - ts[i - 1];
            let h2 = ts[i + 1] - ts[i];
            let sum = h1 + h2;
            -h2 / (h1 * sum) * fs[i - 1] + (h2 - h1) / (h1 * h2) * fs[i] + h1 / (h2 * sum) * fs[i + 1]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratics() {
        let ts = [0.0_f64, 0.1, 0.35, 0.4, 1.0];
        let fs: Vec<f64> = ts.iter().map(|t| 3.0 * t * t - 2.0 * t + 1.0).collect();
        let d = centered_derivative(&ts, &fs).unwrap();
        for (j, &di) in d.iter().enumerate() {
            assert!((di - (6.0 * ts[j + 1] - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn short_series_have_no_interior() {
        assert!(centered_derivative(&[0.0_f64, 1.0], &[1.0, 2.0]).unwrap().is_empty());
        assert!(centered_derivative(&[0.0_f64], &[1.0, 2.0]).is_err());
    }
}
