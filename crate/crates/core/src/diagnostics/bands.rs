use super::energy::{any_flushed, coefficient_usable, corrector_from};
use super::{centered_derivative, Trace};
use crate::asymptotics::tail_slope;
use crate::error::{Error, Result};
use crate::logspace::{LogSumExp, WeightedValue};
use crate::scalar::Real;

/// Weighted high-band functionals, one entry per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFunctionals<T> {
    /// `e^{2 lambda^2 B} (eps |A^{h/2} U'|^2 / b + |A^{(h+1)/2} U|^2)`.
    pub d1: Vec<WeightedValue<T>>,
    /// `e^{2 lambda^2 B} |U'|^2 / b^2`.
    pub d2: Vec<WeightedValue<T>>,
    /// `e^{2 lambda^2 B} |U'' - Theta''|^2 / b^4`.
    pub d3: Vec<WeightedValue<T>>,
}

/// Functionals of the projection `U` of the solution onto modes `lambda_k >= lambda`.
pub fn theorem1_functionals<T: Real>(trace: &Trace<T>, lambda: T, h: u32) -> Result<BandFunctionals<T>> {
    band_functionals(trace, trace.spectrum().band_start(lambda), lambda * lambda, h)
}

/// Band functionals over modes `start..`, weighted by `e^{2 rate B}`.
pub(crate) fn band_functionals<T: Real>(trace: &Trace<T>, start: usize, rate: T, h: u32) -> Result<BandFunctionals<T>> {
    if h > 1 {
        return Err(Error::InvalidParameter(format!("h must be 0 or 1, got {h}")));
    }
    let lambdas = trace.lambdas();
    let n = lambdas.len();
    let eps = trace.epsilon();
    let two = T::lit(2.0);
    let hh = T::lit(h as f64);
    let b0 = trace.b0();
    let mut out = BandFunctionals { d1: vec![], d2: vec![], d3: vec![] };
    for (i, s) in trace.samples().iter().enumerate() {
        let flushed = any_flushed(trace, i, start..n);
        if !coefficient_usable(i, s)? {
            let z = WeightedValue::zero().mark_flushed_if(flushed);
            out.d1.push(z);
            out.d2.push(z);
            out.d3.push(z);
            continue;
        }
        let weight = two * rate * s.big_b;
        let log_b = s.b.ln();
        let th = corrector_from(lambdas, eps, b0, trace.initial_position(), trace.initial_velocity(), start, s.t);
        let (mut d1, mut d2, mut d3) = (LogSumExp::default(), LogSumExp::default(), LogSumExp::default());
        for k in start..n {
            let log_l = lambdas[k].ln();
            d1.add_weighted_square(eps.ln() - log_b + two * hh * log_l, s.v[k]);
            d1.add_weighted_square(two * (hh + T::one()) * log_l, s.u[k]);
            d2.add_weighted_square(-two * log_b, s.v[k]);
            d3.add_weighted_square(-T::lit(4.0) * log_b, s.accel[k] - th.theta_ddot[k]);
        }
        out.d1.push(d1.into_value().weighted(weight).mark_flushed_if(flushed));
        out.d2.push(d2.into_value().weighted(weight).mark_flushed_if(flushed));
        out.d3.push(d3.into_value().weighted(weight).mark_flushed_if(flushed));
    }
    Ok(out)
}

/// `beta_0 .. beta_4` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaRecord<T> {
    pub beta: [Vec<WeightedValue<T>>; 5],
}

/// Split of the solution into its `nu`-band and the remainder, weighted by
/// `e^{2 nu^2 B}`. The remainders are summed directly over `lambda_k > nu`.
pub fn beta_functionals<T: Real>(trace: &Trace<T>) -> Result<BetaRecord<T>> {
    let problem =
        trace.problem().ok_or_else(|| Error::InvalidParameter("beta functionals need a nonlinear trace".into()))?;
    let nu = problem.nu();
    let lambdas = trace.lambdas();
    let n = lambdas.len();
    let lo = trace.spectrum().band_start(nu);
    let hi = lambdas.partition_point(|&l| l <= nu);
    let two = T::lit(2.0);
    let mut rec = BetaRecord { beta: Default::default() };
    for (i, s) in trace.samples().iter().enumerate() {
        let usable = coefficient_usable(i, s)?;
        let weight = two * nu * nu * s.big_b;
        let flushed_low = any_flushed(trace, i, lo..hi);
        let flushed_high = any_flushed(trace, i, hi..n);

        let mut b0 = LogSumExp::default();
        for k in lo..hi {
            b0.add_weighted_square(T::zero(), s.u[k]);
        }
        rec.beta[0].push(b0.into_value().weighted(weight).mark_flushed_if(flushed_low));

        let mut acc: [LogSumExp<T>; 4] = Default::default();
        let log_b = if usable { s.b.ln() } else { T::zero() };
        for k in hi..n {
            let log_l = lambdas[k].ln();
            acc[0].add_weighted_square(two * log_l, s.u[k]);
            acc[1].add_weighted_square(T::lit(4.0) * log_l, s.u[k]);
            if usable {
                acc[2].add_weighted_square(-two * log_b, s.v[k]);
                acc[3].add_weighted_square(two * log_l - two * log_b, s.v[k]);
            }
        }
        for (j, a) in acc.into_iter().enumerate() {
            rec.beta[j + 1].push(a.into_value().weighted(weight).mark_flushed_if(flushed_high));
        }
    }
    Ok(rec)
}

/// Empirical witnesses of the two-sided coefficient bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Constants<T> {
    /// `min (1 + t) b`.
    pub k3_hat: T,
    /// `max { (1 + t) b, (1 + t) |b'| / b }`.
    pub k4_hat: T,
    /// `(1 + t) b` does not grow over the trailing decade.
    pub template_ok: bool,
}

/// Slope of `ln((1 + t) b)` against `ln(1 + t)` allowed before the bound is
/// declared violated.
const TEMPLATE_SLOPE: f64 = 0.05;

pub fn h2_constants<T: Real>(trace: &Trace<T>) -> Result<H2Constants<T>> {
    let ts = trace.times();
    let bs: Vec<T> = trace.samples().iter().map(|s| s.b).collect();
    if let Some(index) = bs.iter().position(|&b| !(b > T::zero())) {
        return Err(Error::DegenerateTrace { index });
    }
    let db = centered_derivative(&ts, &bs)?;
    let mut k3 = T::infinity();
    let mut k4 = T::zero();
    for (i, (&t, &b)) in ts.iter().zip(&bs).enumerate() {
        let scaled = (T::one() + t) * b;
        k3 = k3.min(scaled);
        k4 = k4.max(scaled);
        if i >= 1 && i + 1 < ts.len() {
            k4 = k4.max((T::one() + t) * db[i - 1].abs() / b);
        }
    }
    let scaled: Vec<T> = ts.iter().zip(&bs).map(|(&t, &b)| ((T::one() + t) * b).ln()).collect();
    let template_ok = match tail_slope(&ts, &scaled, T::one()) {
        Ok(slope) => slope <= T::lit(TEMPLATE_SLOPE),
        Err(_) => true,
    };
    Ok(H2Constants { k3_hat: k3, k4_hat: k4, template_ok })
}
