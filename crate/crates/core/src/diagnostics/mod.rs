//! Functionals evaluated along recorded trajectories.

pub(crate) mod bands;
mod comparison;
mod difference;
mod energy;
mod trace;

pub use bands::{beta_functionals, h2_constants, theorem1_functionals, BandFunctionals, BetaRecord, H2Constants};
pub use comparison::{
    comparison_lemma_check, comparison_lemma_check_with_tolerance, ComparisonOutcome, Violation, Witness,
    COMPARISON_TOLERANCE,
};
pub use difference::centered_derivative;
pub use energy::{
    corrector, energies, energy_identity_residuals, energy_rates, Corrector, EnergyRates, EnergyRecord, RawEnergies,
};
pub use trace::{LinearSetup, Trace, TraceSource};

use crate::logspace::{LogSumExp, WeightedValue};
use crate::scalar::Real;
use crate::spectrum::{weighted_norm_sq_unchecked, Problem};

/// `b = |A^{1/2} u|^{2 gamma}`; zero for `u = 0`.
pub fn b_of<T: Real>(problem: &Problem<T>, u: &[T]) -> T {
    let s = weighted_norm_sq_unchecked(u, problem.spectrum().eigenvalues(), T::one());
    if s == T::zero() {
        T::zero()
    } else {
        s.powf(problem.gamma())
    }
}

/// `eps |u'|^2 + |A^{1/2} u|^{2 (gamma + 1)} / (gamma + 1)`, nonincreasing in time.
pub fn lyapunov_energy<T: Real>(problem: &Problem<T>, u: &[T], v: &[T]) -> T {
    let lambdas = problem.spectrum().eigenvalues();
    let g1 = problem.gamma() + T::one();
    problem.epsilon() * weighted_norm_sq_unchecked(v, lambdas, T::zero())
        + weighted_norm_sq_unchecked(u, lambdas, T::one()).powf(g1) / g1
}

/// Squared norms of one sample, in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleNorms<T> {
    /// `|u|^2`
    pub u: WeightedValue<T>,
    /// `|A^{1/2} u|^2`
    pub a12_u: WeightedValue<T>,
    /// `|A u|^2`
    pub a_u: WeightedValue<T>,
    /// `|u'|^2`
    pub du: WeightedValue<T>,
    /// `|A^{1/2} u'|^2`
    pub a12_du: WeightedValue<T>,
    /// `|u''|^2`
    pub ddu: WeightedValue<T>,
}

pub fn sample_norms<T: Real>(trace: &Trace<T>, i: usize) -> SampleNorms<T> {
    let s = &trace.samples()[i];
    let lambdas = trace.lambdas();
    let flushed = (0..lambdas.len()).any(|k| trace.is_flushed(i, k));
    let norm = |x: &[T], h: T| {
        let mut acc = LogSumExp::default();
        for (&l, &xk) in lambdas.iter().zip(x) {
            acc.add_weighted_square(T::lit(2.0) * h * l.ln(), xk);
        }
        acc.into_value().mark_flushed_if(flushed)
    };
    SampleNorms {
        u: norm(&s.u, T::zero()),
        a12_u: norm(&s.u, T::one()),
        a_u: norm(&s.u, T::lit(2.0)),
        du: norm(&s.v, T::zero()),
        a12_du: norm(&s.v, T::one()),
        ddu: norm(&s.accel, T::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_problem;

    #[test]
    fn coefficient_values() {
        let p = build_problem(&[1.0, 2.0], 1.0, 0.1, &[0.5, 0.25], &[0.0, 0.0]).unwrap();
        assert_eq!(b_of(&p, &[0.5, 0.25]), 0.5);
        assert_eq!(b_of(&p, &[0.0, 0.0]), 0.0);
        let q = build_problem(&[2.0], 0.5, 0.1, &[1.0], &[0.0]).unwrap();
        assert!((b_of(&q, &[1.0_f64]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn corrector_closed_form() {
        let p = build_problem(&[2.0], 1.0, 0.1, &[1.0], &[0.0]).unwrap();
        assert_eq!(p.b0(), 4.0);
        // slope = U1 + b0 lambda^2 U0 = 16 with b0 = |A^{1/2} u0|^2 = 4
        let c0 = corrector(&p, 2.0, 0.0);
        assert_eq!(c0.theta, vec![0.0]);
        assert_eq!(c0.theta_dot, vec![16.0]);
        let c = corrector(&p, 2.0, 0.3);
        assert!((c.theta[0] - 1.6 * (1.0 - (-3.0_f64).exp())).abs() < 1e-14);
        assert!((c.theta_ddot[0] + 160.0 * (-3.0_f64).exp()).abs() < 1e-12);
        assert_eq!(corrector(&p, 3.0, 0.3).theta_dot, vec![0.0]);
    }

    #[test]
    fn corrector_with_unit_initial_coefficient() {
        let c = energy::corrector_from(&[2.0], 0.1, 1.0, &[1.0], &[0.0], 0, 0.5);
        assert!((c.theta_dot[0] - 4.0 * (-5.0_f64).exp()).abs() < 1e-14);
        assert!((c.theta[0] - 0.4 * (1.0 - (-5.0_f64).exp())).abs() < 1e-14);
        let far = energy::corrector_from(&[2.0_f64], 0.1, 1.0, &[1.0], &[0.0], 0, 100.0);
        assert!((far.theta[0] - 0.4).abs() < 1e-15);
        let empty = energy::corrector_from(&[2.0], 0.1, 1.0, &[0.0], &[0.0], 0, 0.5);
        assert_eq!((empty.theta[0], empty.theta_dot[0], empty.theta_ddot[0]), (0.0, 0.0, 0.0));
    }
}
