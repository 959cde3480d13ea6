use super::Trace;
use crate::error::{Error, Result};
use crate::integrator::SystemState;
use crate::logspace::{LogSumExp, SignedLogSum, WeightedValue};
use crate::scalar::Real;
use crate::spectrum::Problem;

/// Initial-layer corrector restricted to a band.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrector<T> {
    pub theta: Vec<T>,
    pub theta_dot: Vec<T>,
    pub theta_ddot: Vec<T>,
}

/// Solution of `eps theta'' + theta' = 0`, `theta(0) = 0`,
/// `theta'(0) = U_1 + b_0 lambda_k^2 U_0` on modes `lambda_k >= lambda`.
pub fn corrector<T: Real>(problem: &Problem<T>, lambda: T, t: T) -> Corrector<T> {
    corrector_from(
        problem.spectrum().eigenvalues(),
        problem.epsilon(),
        problem.b0(),
        problem.u0(),
        problem.u1(),
        problem.spectrum().band_start(lambda),
        t,
    )
}

pub(crate) fn corrector_from<T: Real>(
    lambdas: &[T],
    eps: T,
    b0: T,
    x0: &[T],
    x1: &[T],
    start: usize,
    t: T,
) -> Corrector<T> {
    let n = lambdas.len();
    let decay = (-t / eps).exp();
    let rise = -(-t / eps).exp_m1();
    let mut out =
        Corrector { theta: vec![T::zero(); n], theta_dot: vec![T::zero(); n], theta_ddot: vec![T::zero(); n] };
    for k in start..n {
        let slope = x1[k] + b0 * lambdas[k] * lambdas[k] * x0[k];
        out.theta[k] = eps * slope * rise;
        out.theta_dot[k] = slope * decay;
        out.theta_ddot[k] = -slope * decay / eps;
    }
    out
}

/// Exponentially weighted energies along a trace, one entry per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRecord<T> {
    /// `e^{2 alpha B} (eps <u', u> + |u|^2 / 2)`, possibly negative.
    pub d: Vec<WeightedValue<T>>,
    /// `e^{2 alpha B} (eps |u'|^2 / b + |A^{1/2} u|^2)`.
    pub e: Vec<WeightedValue<T>>,
    /// `e^{2 alpha B} |u'|^2 / b^2`.
    pub f: Vec<WeightedValue<T>>,
    /// `e^{2 alpha B} |w''|^2 / b^4` with `w = u - theta`; linear runs only.
    pub g: Option<Vec<WeightedValue<T>>>,
}

/// Whether `b` is usable at sample `i`; `Ok(false)` means the state is identically zero.
pub(crate) fn coefficient_usable<T: Real>(i: usize, s: &SystemState<T>) -> Result<bool> {
    if s.b > T::zero() {
        return Ok(true);
    }
    if s.u.iter().chain(&s.v).all(|&x| x == T::zero()) {
        Ok(false)
    } else {
        Err(Error::DegenerateTrace { index: i })
    }
}

pub(crate) fn any_flushed<T: Real>(trace: &Trace<T>, i: usize, modes: std::ops::Range<usize>) -> bool {
    modes.into_iter().any(|k| trace.is_flushed(i, k))
}

pub fn energies<T: Real>(trace: &Trace<T>, alpha: T) -> Result<EnergyRecord<T>> {
    let lambdas = trace.lambdas();
    let n = lambdas.len();
    let eps = trace.epsilon();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let linear = trace.linear_setup();
    let mut rec = EnergyRecord { d: vec![], e: vec![], f: vec![], g: linear.map(|_| vec![]) };

    for (i, s) in trace.samples().iter().enumerate() {
        let flushed = any_flushed(trace, i, 0..n);
        let weight = two * alpha * s.big_b;
        let mut d = SignedLogSum::default();
        for k in 0..n {
            d.add_product(eps * s.v[k], s.u[k]);
            d.add_product(s.u[k], half * s.u[k]);
        }
        rec.d.push(d.into_value().weighted(weight).mark_flushed_if(flushed));

        if !coefficient_usable(i, s)? {
            let z = WeightedValue::zero().mark_flushed_if(flushed);
            rec.e.push(z);
            rec.f.push(z);
            if let Some(g) = rec.g.as_mut() {
                g.push(z);
            }
            continue;
        }
        let log_b = s.b.ln();
        let mut e = LogSumExp::default();
        let mut f = LogSumExp::default();
        for k in 0..n {
            e.add_weighted_square((eps).ln() - log_b, s.v[k]);
            e.add_weighted_square(two * lambdas[k].ln(), s.u[k]);
            f.add_weighted_square(-two * log_b, s.v[k]);
        }
        rec.e.push(e.into_value().weighted(weight).mark_flushed_if(flushed));
        rec.f.push(f.into_value().weighted(weight).mark_flushed_if(flushed));

        if let (Some(g), Some(setup)) = (rec.g.as_mut(), linear) {
            let th = corrector_from(lambdas, eps, trace.b0(), setup.v0(), setup.v1(), 0, s.t);
            let mut acc = LogSumExp::default();
            for k in 0..n {
                acc.add_weighted_square(-T::lit(4.0) * log_b, s.accel[k] - th.theta_ddot[k]);
            }
            g.push(acc.into_value().weighted(weight).mark_flushed_if(flushed));
        }
    }
    Ok(rec)
}

/// Right-hand sides of the exact energy identities, evaluated pointwise in
/// linear arithmetic (meant for moderate `alpha B`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRates<T> {
    pub d: T,
    pub e: T,
    pub f: T,
    /// Present for linear runs.
    pub g: Option<T>,
}

/// Raw (non-log) energies at one sample, for differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEnergies<T> {
    pub d: T,
    pub e: T,
    pub f: T,
    pub g: Option<T>,
}

fn dot<T: Real>(a: &[T], b: &[T], w: impl Fn(usize) -> T) -> T {
    a.iter().zip(b).enumerate().map(|(k, (&x, &y))| w(k) * x * y).sum()
}

/// Raw energies and their exact time derivatives at every sample.
pub fn energy_rates<T: Real>(trace: &Trace<T>, alpha: T) -> Result<Vec<(RawEnergies<T>, EnergyRates<T>)>> {
    let lambdas = trace.lambdas();
    let m = |k: usize| lambdas[k] * lambdas[k];
    let one = |_: usize| T::one();
    let eps = trace.epsilon();
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(trace.len());
    for (i, s) in trace.samples().iter().enumerate() {
        if !(s.b > T::zero()) {
            return Err(Error::DegenerateTrace { index: i });
        }
        let b = s.b;
        let db = trace.b_rate(i);
        let w = (two * alpha * s.big_b).exp();
        let uv = dot(&s.u, &s.v, one);
        let uu = dot(&s.u, &s.u, one);
        let vv = dot(&s.v, &s.v, one);
        let mu_u = dot(&s.u, &s.u, m);
        let mu_v = dot(&s.u, &s.v, m);

        let d = w * (eps * uv + uu / two);
        let e = w * (eps * vv / b + mu_u);
        let f = w * vv / (b * b);
        let rate_d = two * alpha * b * d - b * w * mu_u + eps * w * vv;
        let rate_e = -w * vv / b * (two + eps * db / b - two * alpha * eps * b) + two * alpha * b * w * mu_u;
        let rate_f = -f / eps * (two + two * eps * db / b - two * alpha * eps * b) - two / eps * w / b * mu_v;

        let (g, rate_g) = match trace.linear_setup() {
            None => (None, None),
            Some(setup) => {
                let th = corrector_from(lambdas, eps, trace.b0(), setup.v0(), setup.v1(), 0, s.t);
                let wdd: Vec<T> = s.accel.iter().zip(&th.theta_ddot).map(|(&a, &t)| a - t).collect();
                let b4 = b * b * b * b;
                let g = w * dot(&wdd, &wdd, one) / b4;
                // eps w''' = -w'' - b M v' - b' M v
                let pull: T =
                    (0..lambdas.len()).map(|k| wdd[k] * (wdd[k] + b * m(k) * s.v[k] + db * m(k) * s.u[k])).sum();
                let rate = g * (two * alpha * b - T::lit(4.0) * db / b) - two / eps * w / b4 * pull;
                (Some(g), Some(rate))
            }
        };
        out.push((RawEnergies { d, e, f, g }, EnergyRates { d: rate_d, e: rate_e, f: rate_f, g: rate_g }));
    }
    Ok(out)
}

/// Largest relative mismatch, over interior samples, between the
type Row<T> = (RawEnergies<T>, EnergyRates<T>);

/// three-point derivative of each energy and its exact rate, as
/// `[D, E, F, G]` (`G` is zero for nonlinear runs).
pub fn energy_identity_residuals<T: Real>(trace: &Trace<T>, alpha: T) -> Result<[T; 4]> {
    let rows = energy_rates(trace, alpha)?;
    let ts = trace.times();
    let pick = |f: &dyn Fn(&Row<T>) -> (T, T)| -> Result<T> {
        let vals: Vec<T> = rows.iter().map(|r| f(r).0).collect();
        let d = super::centered_derivative(&ts, &vals)?;
        let scale = rows.iter().map(|r| f(r).1.abs()).fold(T::zero(), T::max);
        if scale == T::zero() {
            return Ok(T::zero());
        }
        Ok(d.iter().enumerate().map(|(j, &dj)| (dj - f(&rows[j + 1]).1).abs() / scale).fold(T::zero(), T::max))
    };
    let rd = pick(&|r| (r.0.d, r.1.d))?;
    let re = pick(&|r| (r.0.e, r.1.e))?;
    let rf = pick(&|r| (r.0.f, r.1.f))?;
    let rg = if trace.linear_setup().is_some() {
        pick(&|r| (r.0.g.unwrap_or_else(T::zero), r.1.g.unwrap_or_else(T::zero)))?
    } else {
        T::zero()
    };
    Ok([rd, re, rf, rg])
}
