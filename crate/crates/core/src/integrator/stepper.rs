//! Frozen-coefficient exponential stepping with a midpoint predictor.

use super::propagator::transfer;
use super::{LinearCoefficient, SamplePolicy, StepController, SystemState};
use crate::diagnostics::{LinearSetup, Trace, TraceSource};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::{weighted_norm_sq_unchecked, Problem, Spectrum};

const BLOWUP_RATIO: f64 = 10.0;
const MAX_GROWTH: f64 = 2.0;

/// Source of the stiffness coefficient `b` and its time derivative.
pub(crate) trait Coefficient<T: Real> {
    fn lambdas(&self) -> &[T];
    fn epsilon(&self) -> T;
    /// `(b, b')` at time `t` for modal state `(u, z)`, `z = eps u''`.
    fn eval(&self, t: T, u: &[T], z: &[T]) -> (T, T);
    /// Closed-form `B(t)` when the coefficient is prescribed.
    fn closed_integral(&self, t: T) -> Option<T>;
}

pub(crate) struct Nonlinear<'a, T> {
    pub problem: &'a Problem<T>,
}

impl<T: Real> Coefficient<T> for Nonlinear<'_, T> {
    fn lambdas(&self) -> &[T] {
        self.problem.spectrum().eigenvalues()
    }

    fn epsilon(&self) -> T {
        self.problem.epsilon()
    }

    fn eval(&self, _t: T, u: &[T], z: &[T]) -> (T, T) {
        let lambdas = self.lambdas();
        let s = weighted_norm_sq_unchecked(u, lambdas, T::one());
        if s == T::zero() {
            return (T::zero(), T::zero());
        }
        let gamma = self.problem.gamma();
        let b = s.powf(gamma);
        // b' = 2 gamma <A u, u'> s^{gamma - 1}, with u' = -b A u - z
        let flux: T = lambdas
            .iter()
            .zip(u.iter().zip(z))
            .map(|(&l, (&uk, &zk))| {
                let l2 = l * l;
                l2 * uk * (-b * l2 * uk - zk)
            })
            .sum();
        (b, T::lit(2.0) * gamma * flux * b / s)
    }

    fn closed_integral(&self, _t: T) -> Option<T> {
        None
    }
}

pub(crate) struct Prescribed<'a, T> {
    pub setup: &'a LinearSetup<T>,
}

impl<T: Real> Coefficient<T> for Prescribed<'_, T> {
    fn lambdas(&self) -> &[T] {
        self.setup.spectrum().eigenvalues()
    }

    fn epsilon(&self) -> T {
        self.setup.epsilon()
    }

    fn eval(&self, t: T, _u: &[T], _z: &[T]) -> (T, T) {
        let c = self.setup.coefficient();
        (c.value(t), c.rate(t))
    }

    fn closed_integral(&self, t: T) -> Option<T> {
        Some(self.setup.coefficient().integral(t))
    }
}

#[derive(Debug, Clone)]
struct Work<T> {
    t: T,
    u: Vec<T>,
    z: Vec<T>,
    b: T,
    b_rate: T,
    big_b: T,
}

impl<T: Real> Work<T> {
    fn from_state<C: Coefficient<T>>(model: &C, state: &SystemState<T>) -> Self {
        let eps = model.epsilon();
        let z: Vec<T> = state.accel.iter().map(|&a| eps * a).collect();
        let (b, b_rate) = model.eval(state.t, &state.u, &z);
        Self { t: state.t, u: state.u.clone(), z, b, b_rate, big_b: state.big_b }
    }

    fn to_state<C: Coefficient<T>>(&self, model: &C) -> SystemState<T> {
        let eps = model.epsilon();
        let v = model
            .lambdas()
            .iter()
            .zip(self.u.iter().zip(&self.z))
            .map(|(&l, (&uk, &zk))| -self.b * l * l * uk - zk)
            .collect();
        SystemState {
            t: self.t,
            u: self.u.clone(),
            v,
            accel: self.z.iter().map(|&z| z / eps).collect(),
            b: self.b,
            big_b: self.big_b,
        }
    }

    fn is_finite(&self) -> bool {
        self.b.is_finite() && self.u.iter().chain(&self.z).all(|x| x.is_finite())
    }
}

fn propagate<T: Real>(lambdas: &[T], eps: T, b: T, b_rate: T, tau: T, u: &[T], z: &[T]) -> (Vec<T>, Vec<T>) {
    let mut u_out = Vec::with_capacity(u.len());
    let mut z_out = Vec::with_capacity(u.len());
    for (&l, (&uk, &zk)) in lambdas.iter().zip(u.iter().zip(z)) {
        if uk == T::zero() && zk == T::zero() {
            u_out.push(T::zero());
            z_out.push(T::zero());
            continue;
        }
        let l2 = l * l;
        let (un, zn) = transfer(eps, b * l2, b_rate * l2, tau).apply(uk, zk);
        u_out.push(un);
        z_out.push(zn);
    }
    (u_out, z_out)
}

/// One predictor-corrector step of length `dt` landing at `t_new`.
fn advance<T: Real, C: Coefficient<T>>(model: &C, w: &Work<T>, dt: T, t_new: T, flush: T) -> Work<T> {
    let lambdas = model.lambdas();
    let eps = model.epsilon();
    let half = dt / T::lit(2.0);
    let (u_half, z_half) = propagate(lambdas, eps, w.b, w.b_rate, half, &w.u, &w.z);
    let (b_mid, rate_mid) = model.eval(w.t + half, &u_half, &z_half);
    let (mut u, mut z) = propagate(lambdas, eps, b_mid, rate_mid, dt, &w.u, &w.z);

    for (k, &l) in lambdas.iter().enumerate() {
        let v = -b_mid * l * l * u[k] - z[k];
        if u[k].abs() < flush && v.abs() < flush && z[k].abs() < flush {
            u[k] = T::zero();
            z[k] = T::zero();
        }
    }

    let (b, b_rate) = model.eval(t_new, &u, &z);
    let big_b = model.closed_integral(t_new).unwrap_or_else(|| w.big_b + dt * (w.b + b) / T::lit(2.0));
    Work { t: t_new, u, z, b, b_rate, big_b }
}

/// `(lambda_max^2, eta^3)` for the drift test in [`take_step`].
fn drift_budget<T: Real>(lambdas: &[T], ctrl: &StepController<T>) -> (T, T) {
    let l = lambdas[lambdas.len() - 1];
    (l * l, ctrl.eta_b * ctrl.eta_b * ctrl.eta_b)
}

fn propose<T: Real>(ctrl: &StepController<T>, lambdas: &[T], w: &Work<T>, last: Option<T>) -> T {
    let mut dt = ctrl.dt_max_factor * (T::one() + w.t);
    if w.b > T::zero() && w.b_rate != T::zero() {
        let (l2, budget) = drift_budget(lambdas, ctrl);
        let rate = w.b_rate.abs();
        let relative = ctrl.eta_b * w.b / rate;
        let drift = (budget / (rate * l2)).sqrt();
        dt = dt.min(relative.max(drift));
    }
    if let Some(prev) = last {
        dt = dt.min(T::lit(MAX_GROWTH) * prev);
    }
    dt
}

/// Attempts `dt_try` (landing exactly on `target` when `dt_try` reaches it),
/// shrinking on rejection. Returns the accepted state and step length.
fn take_step<T: Real, C: Coefficient<T>>(
    model: &C,
    w: &Work<T>,
    dt_try: T,
    target: Option<T>,
    ctrl: &StepController<T>,
) -> Result<(Work<T>, T)> {
    let limit = T::lit(2.0) * ctrl.eta_b;
    let (l2, budget) = drift_budget(model.lambdas(), ctrl);
    let mut dt = dt_try;
    let mut landing = target;
    loop {
        let t_new = landing.unwrap_or(w.t + dt);
        let next = advance(model, w, dt, t_new, ctrl.flush_threshold);
        let change = if w.b > T::zero() { (next.b - w.b).abs() / w.b } else { T::zero() };
        // near a zero of b the relative change is unbounded while the
        // coefficient itself barely moves the state
        let drift = (next.b - w.b).abs() * l2 * dt;
        if next.is_finite() && (change <= limit || drift <= budget) {
            return Ok((next, dt));
        }
        let shrink = if change.is_finite() && change > T::zero() {
            (T::lit(0.9) * ctrl.eta_b / change).max(T::lit(0.1)).min(T::lit(0.5))
        } else {
            T::lit(0.25)
        };
        dt *= shrink;
        landing = None;
        if dt < ctrl.dt_min {
            return Err(Error::StepUnderflow { t: w.t.as_f64(), dt: dt.as_f64() });
        }
    }
}

/// Advances `state` by one controller-chosen step.
pub fn step<T: Real>(problem: &Problem<T>, state: &SystemState<T>, ctrl: &StepController<T>) -> Result<SystemState<T>> {
    ctrl.validate()?;
    problem.spectrum().check_len(&state.u)?;
    problem.spectrum().check_len(&state.v)?;
    let model = Nonlinear { problem };
    let mut state = state.clone();
    if state.accel.len() != state.u.len() {
        state.accel = super::accel(problem, &state);
    }
    let w = Work::from_state(&model, &state);
    let dt = propose(ctrl, problem.spectrum().eigenvalues(), &w, None);
    let (next, _) = take_step(&model, &w, dt, None, ctrl)?;
    Ok(next.to_state(&model))
}

struct Guard<T> {
    initial: T,
}

impl<T: Real> Guard<T> {
    fn check(&self, lambdas: &[T], w: &Work<T>) -> Result<()> {
        let s = weighted_norm_sq_unchecked(&w.u, lambdas, T::one());
        if self.initial > T::zero() && (!s.is_finite() || s > T::lit(BLOWUP_RATIO) * self.initial) {
            return Err(Error::BlowupDetected { t: w.t.as_f64(), ratio: (s / self.initial).as_f64() });
        }
        Ok(())
    }
}

fn drive<T: Real, C: Coefficient<T>>(
    model: &C,
    start: Work<T>,
    t_end: T,
    ctrl: &StepController<T>,
    sampler: &SamplePolicy,
    guarded: bool,
) -> Result<Vec<SystemState<T>>> {
    ctrl.validate()?;
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let guard = guarded.then(|| Guard { initial: weighted_norm_sq_unchecked(&start.u, model.lambdas(), T::one()) });
    let mut samples = vec![start.to_state(model)];
    let mut w = start;
    let mut natural: Option<T> = None;
    for target in sampler.targets(t_end) {
        while w.t < target {
            let proposal = propose(ctrl, model.lambdas(), &w, natural);
            let remaining = target - w.t;
            let (dt_try, landing) = if proposal >= remaining { (remaining, Some(target)) } else { (proposal, None) };
            let (next, used) = take_step(model, &w, dt_try, landing, ctrl)?;
            if landing.is_none() || used < dt_try {
                natural = Some(used);
            }
            if let Some(g) = &guard {
                g.check(model.lambdas(), &next)?;
            }
            w = next;
        }
        samples.push(w.to_state(model));
    }
    Ok(samples)
}

/// Integrates the nonlinear problem to `t_end`, recording log-spaced samples.
pub fn evolve<T: Real>(
    problem: &Problem<T>,
    t_end: T,
    ctrl: &StepController<T>,
    sampler: &SamplePolicy,
) -> Result<Trace<T>> {
    let model = Nonlinear { problem };
    let start = Work::from_state(&model, &SystemState::initial(problem));
    let samples = drive(&model, start, t_end, ctrl, sampler, true)?;
    Trace::new(TraceSource::Nonlinear(problem.clone()), samples)
}

/// Integrates `eps v'' + b(t) M v + v' = 0` with `M = diag(lambda_k^2)`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_linear<T: Real>(
    spectrum: &Spectrum<T>,
    coeff: LinearCoefficient<T>,
    epsilon: T,
    v0: &[T],
    v1: &[T],
    t_end: T,
    ctrl: &StepController<T>,
    sampler: &SamplePolicy,
) -> Result<Trace<T>> {
    let setup = LinearSetup::new(spectrum.clone(), coeff, epsilon, v0.to_vec(), v1.to_vec())?;
    let model = Prescribed { setup: &setup };
    let b = coeff.value(T::zero());
    let z: Vec<T> =
        spectrum.eigenvalues().iter().zip(v0.iter().zip(v1)).map(|(&l, (&x, &y))| -(b * l * l * x + y)).collect();
    let start = Work { t: T::zero(), u: v0.to_vec(), z, b, b_rate: coeff.rate(T::zero()), big_b: T::zero() };
    let samples = drive(&model, start, t_end, ctrl, sampler, false)?;
    Trace::new(TraceSource::Linear(setup), samples)
}
