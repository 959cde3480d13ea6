//! Modal representation of the operator and the problem data.
//!
//! The operator `A` is carried only through its eigenvalue frequencies
//! `lambda_k` (with `A e_k = lambda_k^2 e_k`); multiplicity is expressed by
//! repetition. Everything downstream works coefficient-wise in this basis.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sorted list of positive eigenvalue frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(eigenvalues: Vec<T>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for (index, &value) in eigenvalues.iter().enumerate() {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::NonPositiveEigenvalue { index, value: value.as_f64() });
            }
        }
        if let Some(index) = eigenvalues.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::UnsortedSpectrum { index: index + 1 });
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Coercivity constant `min lambda_k^2`.
    pub fn sigma0(&self) -> T {
        self.eigenvalues[0] * self.eigenvalues[0]
    }

    /// First mode index with `lambda_k >= lambda`; the band `H_lambda` is `start..len`.
    pub fn band_start(&self, lambda: T) -> usize {
        self.eigenvalues.partition_point(|&l| l < lambda)
    }

    pub(crate) fn check_len(&self, u: &[T]) -> Result<()> {
        if u.len() == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.len(), found: u.len() })
        }
    }
}

/// Dirichlet Laplacian on `(0, length)`: `lambda_k = k pi / length`.
pub fn laplacian_interval_spectrum<T: Real>(count: usize, length: T) -> Result<Spectrum<T>> {
    if count == 0 {
        return Err(Error::EmptySpectrum);
    }
    if !(length > T::zero()) {
        return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
    }
    let eigenvalues = (1..=count).map(|k| T::lit(k as f64) * T::PI() / length).collect();
    Spectrum::new(eigenvalues)
}

/// `|A^{h/2} u|^2 = sum lambda_k^{2h} u_k^2`.
pub fn weighted_norm_sq<T: Real>(u: &[T], spectrum: &Spectrum<T>, h: T) -> Result<T> {
    spectrum.check_len(u)?;
    Ok(weighted_norm_sq_unchecked(u, spectrum.eigenvalues(), h))
}

pub(crate) fn weighted_norm_sq_unchecked<T: Real>(u: &[T], lambdas: &[T], h: T) -> T {
    let two_h = T::lit(2.0) * h;
    if h == T::zero() {
        return u.iter().map(|&x| x * x).sum();
    }
    u.iter().zip(lambdas).map(|(&x, &l)| l.powf(two_h) * x * x).sum()
}

/// Validated initial-value problem `eps u'' + |A^{1/2}u|^{2 gamma} A u + u' = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    spectrum: Spectrum<T>,
    gamma: T,
    epsilon: T,
    u0: Vec<T>,
    u1: Vec<T>,
    nu: T,
}

/// Builds a problem from raw lists, sorting modes by eigenvalue.
///
/// Modes below `nu` keep their (zero) slots rather than being truncated.
pub fn build_problem<T: Real>(eigenvalues: &[T], gamma: T, epsilon: T, u0: &[T], u1: &[T]) -> Result<Problem<T>> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    for found in [u0.len(), u1.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    for (index, &value) in eigenvalues.iter().enumerate() {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(Error::NonPositiveEigenvalue { index, value: value.as_f64() });
        }
    }
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma.as_f64()));
    }
    if !(epsilon > T::zero() && epsilon <= T::one()) {
        return Err(Error::InvalidEpsilon(epsilon.as_f64()));
    }
    if u0.iter().all(|&x| x == T::zero()) {
        return Err(Error::AllZeroInitialData);
    }
    if u0.iter().chain(u1).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("initial data must be finite".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).expect("finite eigenvalues"));
    let spectrum = Spectrum::new(order.iter().map(|&i| eigenvalues[i]).collect())?;
    let u0: Vec<T> = order.iter().map(|&i| u0[i]).collect();
    let u1: Vec<T> = order.iter().map(|&i| u1[i]).collect();

    let nu = active_floor(&spectrum, &u0, &u1).expect("u0 has a nonzero entry");
    Ok(Problem { spectrum, gamma, epsilon, u0, u1, nu })
}

/// Smallest eigenvalue carrying nonzero data in either vector.
pub(crate) fn active_floor<T: Real>(spectrum: &Spectrum<T>, a: &[T], b: &[T]) -> Option<T> {
    spectrum
        .eigenvalues()
        .iter()
        .zip(a.iter().zip(b))
        .find(|(_, (&x, &y))| x != T::zero() || y != T::zero())
        .map(|(&l, _)| l)
}

impl<T: Real> Problem<T> {
    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn u0(&self) -> &[T] {
        &self.u0
    }

    pub fn u1(&self) -> &[T] {
        &self.u1
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    /// `b_0 = |A^{1/2} u_0|^{2 gamma}`.
    pub fn b0(&self) -> T {
        weighted_norm_sq_unchecked(&self.u0, self.spectrum.eigenvalues(), T::one()).powf(self.gamma)
    }

    /// Whether mode `k` started from zero data (and therefore stays zero).
    pub fn is_inactive(&self, k: usize) -> bool {
        self.u0[k] == T::zero() && self.u1[k] == T::zero()
    }
}

/// Disjoint split `u = u_nu + ubar_mu + U_mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition<T> {
    /// Modes with `lambda_k = nu`.
    pub low: Vec<T>,
    /// Modes with `nu < lambda_k < mu`.
    pub mid: Vec<T>,
    /// Modes with `lambda_k >= mu`.
    pub high: Vec<T>,
}

pub fn decompose<T: Real>(u: &[T], spectrum: &Spectrum<T>, nu: T, mu: T) -> Result<BandDecomposition<T>> {
    spectrum.check_len(u)?;
    if !(mu > nu) {
        return Err(Error::InvalidBand { nu: nu.as_f64(), mu: mu.as_f64() });
    }
    let n = u.len();
    let mut parts = BandDecomposition { low: vec![T::zero(); n], mid: vec![T::zero(); n], high: vec![T::zero(); n] };
    for (k, (&x, &l)) in u.iter().zip(spectrum.eigenvalues()).enumerate() {
        if l < nu {
            if x != T::zero() {
                return Err(Error::SupportBelowNu { nu: nu.as_f64() });
            }
        } else if l == nu {
            parts.low[k] = x;
        } else if l < mu {
            parts.mid[k] = x;
        } else {
            parts.high[k] = x;
        }
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_with_single_active_mode() {
        let p = build_problem(&[1.0, 2.0, 3.0], 1.0, 0.1, &[1.0, 0.0, 0.0], &[0.0; 3]).unwrap();
        assert_eq!(p.nu(), 1.0);
        assert_eq!(p.b0(), 1.0);
    }

    #[test]
    fn nu_is_smallest_lambda_with_data() {
        let p = build_problem(&[1.0, 2.0, 3.0], 1.0, 0.1, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.nu(), 2.0);
        assert!(p.is_inactive(0));
    }

    #[test]
    fn zero_displacement_rejected() {
        let err = build_problem(&[1.0, 2.0], 0.5, 0.1, &[0.0, 0.0], &[1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::AllZeroInitialData);
    }

    #[test]
    fn build_problem_validates_inputs() {
        assert!(matches!(
            build_problem(&[1.0, 2.0], 1.0, 0.1, &[1.0], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            build_problem(&[1.0, -2.0], 1.0, 0.1, &[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::NonPositiveEigenvalue { index: 1, .. })
        ));
        assert!(matches!(build_problem(&[1.0], 0.0, 0.1, &[1.0], &[0.0]), Err(Error::NonPositiveGamma(_))));
        assert!(matches!(build_problem(&[1.0], 1.0, 1.5, &[1.0], &[0.0]), Err(Error::InvalidEpsilon(_))));
    }

    #[test]
    fn modes_are_sorted_with_their_data() {
        let p = build_problem(&[3.0, 1.0, 2.0], 1.0, 0.1, &[0.3, 0.1, 0.2], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.spectrum().eigenvalues(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.u0(), &[0.1, 0.2, 0.3]);
        assert_eq!(p.u1(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn decompose_partitions_support() {
        let s = Spectrum::new(vec![1.0, 1.0, 2.0, 5.0]).unwrap();
        let d = decompose(&[0.1, 0.2, 0.3, 0.4], &s, 1.0, 3.0).unwrap();
        assert_eq!(d.low, vec![0.1, 0.2, 0.0, 0.0]);
        assert_eq!(d.mid, vec![0.0, 0.0, 0.3, 0.0]);
        assert_eq!(d.high, vec![0.0, 0.0, 0.0, 0.4]);

        let z = decompose(&[0.0; 4], &s, 1.0, 3.0).unwrap();
        assert!(z.low.iter().chain(&z.mid).chain(&z.high).all(|&x| x == 0.0));
    }

    #[test]
    fn decompose_rejects_empty_band() {
        let s = Spectrum::new(vec![2.0, 3.0]).unwrap();
        assert!(matches!(decompose(&[1.0, 1.0], &s, 2.0, 2.0), Err(Error::InvalidBand { .. })));
    }

    #[test]
    fn decompose_rejects_mass_below_nu() {
        let s = Spectrum::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(decompose(&[1.0, 1.0], &s, 2.0, 3.0), Err(Error::SupportBelowNu { .. })));
    }

    #[test]
    fn weighted_norms() {
        let s = Spectrum::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(weighted_norm_sq(&[0.5, 0.25], &s, 1.0).unwrap(), 0.5);
        assert_eq!(weighted_norm_sq(&[0.5, 0.25], &s, 0.0).unwrap(), 0.3125);
        let one = Spectrum::new(vec![2.0]).unwrap();
        assert_eq!(weighted_norm_sq(&[1.0], &one, 2.0).unwrap(), 16.0);
        assert!(weighted_norm_sq(&[1.0], &s, 1.0).is_err());
    }

    #[test]
    fn laplacian_presets() {
        let s = laplacian_interval_spectrum(3, std::f64::consts::PI).unwrap();
        for (l, k) in s.eigenvalues().iter().zip([1.0, 2.0, 3.0]) {
            assert!((l - k).abs() < 1e-15);
        }
        let one = laplacian_interval_spectrum(1, 1.0_f64).unwrap();
        assert_eq!(one.eigenvalues(), &[std::f64::consts::PI]);
        let two = laplacian_interval_spectrum(2, 2.0_f64).unwrap();
        assert_eq!(two.eigenvalues(), &[std::f64::consts::FRAC_PI_2, std::f64::consts::PI]);
        assert!(laplacian_interval_spectrum(0, 1.0_f64).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let s = Spectrum::new(vec![1.0_f32, 2.0]).unwrap();
        assert_eq!(weighted_norm_sq(&[0.5_f32, 0.25], &s, 1.0).unwrap(), 0.5);
        assert_eq!(s.band_start(1.5), 1);
    }
}
