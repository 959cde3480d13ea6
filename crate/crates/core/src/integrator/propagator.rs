//! Exact transfer matrix for one mode with frozen coefficients.
//!
//! A mode is carried as `(u, z)` with `z = eps u''`. With `c = b lambda^2`,
//! the pair obeys
//!
//! ```text
//! u' = -c u - z
//! z' = (c^2 - c') u + (c - 1/eps) z
//! ```
//!
//! which, with `c` and `c'` frozen, has characteristic polynomial
//! `eps r^2 + r + (c - eps c') = 0`. Carrying `z` instead of `u'` keeps the
//! slaved residual `eps u''` accurate when the step is much longer than `eps`.

use crate::scalar::{expm1_ratio, sinc, Real};

/// `exp(tau K)` for the frozen `(u, z)` system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Transfer<T> {
    pub uu: T,
    pub uz: T,
    pub zu: T,
    pub zz: T,
}

impl<T: Real> Transfer<T> {
    #[inline]
    pub fn apply(&self, u: T, z: T) -> (T, T) {
        (self.uu * u + self.uz * z, self.zu * u + self.zz * z)
    }
}

/// Uses `exp(tau K) = C I + D (K - m I)` with `m = -1/(2 eps)`, where
/// `C = e^{m tau} cosh(delta tau)` and `D = e^{m tau} sinh(delta tau) / delta`
/// (trigonometric for complex roots). `D` is formed from the two real
/// exponentials through `expm1` when the roots are close.
pub(crate) fn transfer<T: Real>(eps: T, c: T, c_rate: T, tau: T) -> Transfer<T> {
    let two = T::lit(2.0);
    let q = c - eps * c_rate;
    let half_rate = T::one() / (two * eps);
    let disc = T::one() - T::lit(4.0) * eps * q;
    let (cosh_part, sinh_part) = if disc > T::zero() {
        let s = disc.sqrt();
        let slow = -two * q / (T::one() + s);
        let fast = -(T::one() + s) / (two * eps);
        let gap = s / eps;
        let e_slow = (slow * tau).exp();
        let e_fast = (fast * tau).exp();
        let x = gap * tau;
        let d = if x <= T::one() { e_fast * tau * expm1_ratio(x) } else { (e_slow - e_fast) / gap };
        ((e_slow + e_fast) / two, d)
    } else {
        let omega = (-disc).sqrt() / (two * eps);
        let envelope = (-tau * half_rate).exp();
        (envelope * (omega * tau).cos(), envelope * tau * sinc(omega * tau))
    };
    let a = half_rate - c;
    Transfer {
        uu: cosh_part + a * sinh_part,
        uz: -sinh_part,
        zu: (c * c - c_rate) * sinh_part,
        zz: cosh_part - a * sinh_part,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-exponential solution of `eps u'' + u' + c u = 0` from distinct roots.
    fn closed_form(eps: f64, c: f64, u0: f64, v0: f64, t: f64) -> (f64, f64) {
        let s = (1.0 - 4.0 * eps * c).sqrt();
        let r1 = (-1.0 + s) / (2.0 * eps);
        let r2 = (-1.0 - s) / (2.0 * eps);
        let a = (v0 - r2 * u0) / (r1 - r2);
        let b = (r1 * u0 - v0) / (r1 - r2);
        (a * (r1 * t).exp() + b * (r2 * t).exp(), a * r1 * (r1 * t).exp() + b * r2 * (r2 * t).exp())
    }

    fn step_uv(eps: f64, c: f64, u: f64, v: f64, tau: f64) -> (f64, f64) {
        let z = -(c * u + v);
        let (u1, z1) = transfer(eps, c, 0.0, tau).apply(u, z);
        (u1, -c * u1 - z1)
    }

    #[test]
    fn matches_two_exponential_solution() {
        for &(eps, c, tau) in &[(0.1, 1.0, 1.0), (0.1, 1.0, 0.01), (0.01, 3.0, 5.0), (0.2, 0.5, 20.0)] {
            let (u, v) = step_uv(eps, c, 1.0, -0.3, tau);
            let (ue, ve) = closed_form(eps, c, 1.0, -0.3, tau);
            assert!((u - ue).abs() <= 1e-12 * ue.abs().max(1e-300), "{eps} {c} {tau}: {u} vs {ue}");
            assert!((v - ve).abs() <= 1e-11 * ve.abs().max(1e-12), "{eps} {c} {tau}: {v} vs {ve}");
        }
    }

    #[test]
    fn oscillatory_branch_matches_complex_solution() {
        let (eps, c, tau) = (0.1_f64, 10.0, 0.7);
        let m = -1.0 / (2.0 * eps);
        let w = (4.0 * eps * c - 1.0).sqrt() / (2.0 * eps);
        // u(0) = 1, u'(0) = 0
        let expected = (m * tau).exp() * ((w * tau).cos() - m / w * (w * tau).sin());
        let (u, _) = step_uv(eps, c, 1.0, 0.0, tau);
        assert!((u - expected).abs() < 1e-13);
    }

    #[test]
    fn continuous_across_double_root() {
        let eps = 0.25;
        let c_crit = 1.0 / (4.0 * eps);
        let below = step_uv(eps, c_crit * (1.0 - 1e-10), 1.0, 0.2, 3.0);
        let at = step_uv(eps, c_crit, 1.0, 0.2, 3.0);
        let above = step_uv(eps, c_crit * (1.0 + 1e-10), 1.0, 0.2, 3.0);
        // critically damped: u = (1 + (v0 + 2) t) e^{-2t}
        let exact = (1.0 + 2.2 * 3.0) * (-6.0_f64).exp();
        for (u, _) in [below, at, above] {
            assert!((u - exact).abs() < 1e-9 * exact, "{u} vs {exact}");
        }
    }

    #[test]
    fn extreme_stiffness_stays_finite() {
        let t = transfer(1e-6_f64, 2.0, -0.5, 1e4);
        for x in [t.uu, t.uz, t.zu, t.zz] {
            assert!(x.is_finite());
        }
        let (u, _) = t.apply(1.0, 0.0);
        let slow: f64 = -2.0 * (2.0 + 0.5e-6) / (1.0 + (1.0_f64 - 4e-6 * (2.0 + 0.5e-6)).sqrt());
        assert!((u - (slow * 1e4).exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_stiffness_is_pure_damping() {
        let (u, v) = step_uv(0.5, 0.0, 1.0, 1.0, 2.0);
        assert!((u - (1.0 + 0.5 * (1.0 - (-4.0_f64).exp()))).abs() < 1e-14);
        assert!((v - (-4.0_f64).exp()).abs() < 1e-14);
    }
}
