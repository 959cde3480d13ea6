//! Long-horizon integration of the coupled mode system and its
//! prescribed-coefficient linear counterpart.

mod linear;
mod propagator;
mod reference;
mod stepper;

pub use linear::LinearCoefficient;
pub use reference::{reference_solve, reference_solve_linear};
pub use stepper::{evolve, evolve_linear, step};

use crate::diagnostics::b_of;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::Problem;

/// Snapshot of a trajectory.
///
/// `accel` is carried alongside `v` rather than recomputed from
/// `-(b lambda^2 u + v) / eps`, which cancels catastrophically once the
/// solution has settled onto its slow manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState<T> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub accel: Vec<T>,
    /// Coefficient `b(t)` at this state.
    pub b: T,
    /// Accumulated `B(t) = int_0^t b`.
    pub big_b: T,
}

impl<T: Real> SystemState<T> {
    pub fn initial(problem: &Problem<T>) -> Self {
        let u = problem.u0().to_vec();
        let v = problem.u1().to_vec();
        let b = b_of(problem, &u);
        let accel = accel_with(problem, b, &u, &v);
        Self { t: T::zero(), u, v, accel, b, big_b: T::zero() }
    }
}

/// Step-size policy for the exponential stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController<T> {
    /// Target relative change of `b` per step.
    pub eta_b: T,
    pub dt_min: T,
    /// `dt <= dt_max_factor * (1 + t)`.
    pub dt_max_factor: T,
    pub flush_threshold: T,
}

impl<T: Real> Default for StepController<T> {
    fn default() -> Self {
        Self {
            eta_b: T::lit(1e-3),
            dt_min: T::lit(1e-12),
            dt_max_factor: T::lit(0.05),
            flush_threshold: T::flush_floor(),
        }
    }
}

impl<T: Real> StepController<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, x: T| Err(Error::InvalidParameter(format!("{what} out of range: {x}")));
        if !(self.eta_b > T::zero() && self.eta_b < T::one()) {
            return bad("eta_b", self.eta_b);
        }
        if !(self.dt_min > T::zero()) {
            return bad("dt_min", self.dt_min);
        }
        if !(self.dt_max_factor > T::zero()) || !self.dt_max_factor.is_finite() {
            return bad("dt_max_factor", self.dt_max_factor);
        }
        if !(self.flush_threshold >= T::zero()) {
            return bad("flush_threshold", self.flush_threshold);
        }
        Ok(())
    }
}

/// Recording times `(1 + t) = 10^{k / samples_per_decade}`, plus `t = 0` and `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePolicy {
    pub samples_per_decade: usize,
}

impl Default for SamplePolicy {
    fn default() -> Self {
        Self { samples_per_decade: 40 }
    }
}

impl SamplePolicy {
    /// Strictly increasing sample times in `(0, t_end]`, ending at `t_end`.
    pub fn targets<T: Real>(&self, t_end: T) -> Vec<T> {
        let per_decade = self.samples_per_decade.max(1) as f64;
        let mut out = Vec::new();
        for k in 1.. {
            let t = T::lit(10f64.powf(k as f64 / per_decade) - 1.0);
            if t >= t_end {
                break;
            }
            out.push(t);
        }
        out.push(t_end);
        out
    }
}

/// `u'' = -(b lambda_k^2 u_k + v_k) / eps` with `b = |A^{1/2} u|^{2 gamma}`.
pub fn accel<T: Real>(problem: &Problem<T>, state: &SystemState<T>) -> Vec<T> {
    accel_with(problem, b_of(problem, &state.u), &state.u, &state.v)
}

fn accel_with<T: Real>(problem: &Problem<T>, b: T, u: &[T], v: &[T]) -> Vec<T> {
    let eps = problem.epsilon();
    problem
        .spectrum()
        .eigenvalues()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&l, (&uk, &vk))| -(b * l * l * uk + vk) / eps)
        .collect()
}

/// Solution of the zero-mass single-mode limit `y' + nu^2 y^{2 gamma + 1} = 0`.
pub fn limit_ode_solution<T: Real>(t: T, y0: T, gamma: T, nu: T) -> T {
    if y0 == T::zero() {
        return T::zero();
    }
    let two_gamma = T::lit(2.0) * gamma;
    let growth = T::one() + two_gamma * nu * nu * y0.abs().powf(two_gamma) * t;
    y0 * growth.powf(-T::one() / two_gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_problem;

    #[test]
    fn accel_single_mode() {
        let p = build_problem(&[1.0], 1.0, 0.1, &[1.0], &[0.0]).unwrap();
        let s = SystemState::initial(&p);
        assert_eq!(s.b, 1.0);
        assert_eq!(accel(&p, &s), vec![-10.0]);
    }

    #[test]
    fn accel_two_modes() {
        let p = build_problem(&[1.0, 2.0], 1.0, 0.5, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(accel(&p, &SystemState::initial(&p)), vec![-2.0, -2.0]);
    }

    #[test]
    fn accel_at_rest_is_zero() {
        let p = build_problem(&[1.0, 2.0], 1.0, 0.5, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        let s = SystemState { t: 0.0, u: vec![0.0; 2], v: vec![0.0; 2], accel: vec![], b: 0.0, big_b: 0.0 };
        assert_eq!(accel(&p, &s), vec![0.0, 0.0]);
    }

    #[test]
    fn limit_ode_closed_form() {
        // separation of variables: y^{-2g} = y0^{-2g} + 2 g nu^2 t
        let y = limit_ode_solution(4.0_f64, 1.0, 1.0, 1.0);
        assert!((y - 1.0 / 3.0).abs() <= f64::EPSILON);
        assert_eq!(limit_ode_solution(0.0_f64, 0.7, 0.5, 2.0), 0.7);
        assert_eq!(limit_ode_solution(5.0_f64, 0.0, 0.5, 2.0), 0.0);
        assert_eq!(limit_ode_solution(4.0_f64, -1.0, 1.0, 1.0), -limit_ode_solution(4.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn limit_ode_satisfies_equation() {
        let (g, nu, y0) = (0.75_f64, 1.3, 0.8);
        for &t in &[0.1, 1.0, 10.0] {
            let h = 1e-5;
            let d = (limit_ode_solution(t + h, y0, g, nu) - limit_ode_solution(t - h, y0, g, nu)) / (2.0 * h);
            let y = limit_ode_solution(t, y0, g, nu);
            assert!((d + nu * nu * y.powf(2.0 * g + 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn sample_targets_are_log_spaced() {
        let p = SamplePolicy { samples_per_decade: 10 };
        let ts: Vec<f64> = p.targets(99.0);
        assert_eq!(*ts.last().unwrap(), 99.0);
        assert_eq!(ts.len(), 20);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(p.targets(1e-3_f64), vec![1e-3]);
    }

    #[test]
    fn controller_validation() {
        assert!(StepController::<f64>::default().validate().is_ok());
        let bad = StepController { eta_b: 1.5, ..StepController::<f64>::default() };
        assert!(bad.validate().is_err());
    }
}
