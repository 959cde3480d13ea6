use crate::error::{Error, Result};
use crate::scalar::Real;

/// Prescribed coefficient `b(t)` for the linear problem `eps v'' + b(t) M v + v' = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearCoefficient<T> {
    /// `b(t) = k`. Only for oracle comparisons; it does not decay.
    Constant { k: T },
    /// `b(t) = k / (1 + t)^p`, `0 <= p <= 1`.
    Power { k: T, p: T },
}

impl<T: Real> LinearCoefficient<T> {
    pub fn validate(&self) -> Result<()> {
        let (k, p) = match *self {
            Self::Constant { k } => (k, T::zero()),
            Self::Power { k, p } => (k, p),
        };
        if !(k > T::zero()) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("coefficient scale must be positive, got {k}")));
        }
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidParameter(format!("power exponent must lie in [0, 1], got {p}")));
        }
        Ok(())
    }

    pub fn value(&self, t: T) -> T {
        match *self {
            Self::Constant { k } => k,
            Self::Power { k, p } => k * (-p * t.ln_1p()).exp(),
        }
    }

    pub fn rate(&self, t: T) -> T {
        match *self {
            Self::Constant { .. } => T::zero(),
            Self::Power { k, p } => -p * k * (-(p + T::one()) * t.ln_1p()).exp(),
        }
    }

    /// `B(t) = int_0^t b`.
    pub fn integral(&self, t: T) -> T {
        match *self {
            Self::Constant { k } => k * t,
            Self::Power { k, p } => {
                let log1p = t.ln_1p();
                let e = T::one() - p;
                if e == T::zero() {
                    k * log1p
                } else {
                    k * (e * log1p).exp_m1() / e
                }
            }
        }
    }

    /// Whether the family fits the `b <= K/(1+t)`, `|b'|/b <= K/(1+t)`,
    /// `|b'|/b^2 <= K'` template for some constants.
    pub fn satisfies_decay_template(&self) -> bool {
        matches!(*self, Self::Power { p, .. } if p == T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals() {
        let c = LinearCoefficient::Constant { k: 2.0_f64 };
        assert_eq!(c.integral(3.0), 6.0);
        assert_eq!(c.rate(3.0), 0.0);
        let h = LinearCoefficient::Power { k: 1.0_f64, p: 1.0 };
        assert!((h.integral(9.0) - 10.0_f64.ln()).abs() < 1e-15);
        assert!((h.value(9.0) - 0.1).abs() < 1e-16);
        assert!((h.rate(9.0) + 0.01).abs() < 1e-16);
        let s = LinearCoefficient::Power { k: 1.0_f64, p: 0.5 };
        assert!((s.integral(3.0) - 2.0 * (2.0 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn template_and_validation() {
        assert!(LinearCoefficient::Power { k: 0.7_f64, p: 1.0 }.satisfies_decay_template());
        assert!(!LinearCoefficient::Power { k: 0.7_f64, p: 0.5 }.satisfies_decay_template());
        assert!(!LinearCoefficient::Constant { k: 1.0_f64 }.satisfies_decay_template());
        assert!(LinearCoefficient::Power { k: 1.0_f64, p: 1.5 }.validate().is_err());
        assert!(LinearCoefficient::Constant { k: 0.0_f64 }.validate().is_err());
    }
}
