use std::collections::BTreeMap;

use super::report::{Claim, Measurement, VerificationReport, VerifySettings};
use super::{estimate_limit, tail_slope, LimitEstimate};
use crate::diagnostics::bands::band_functionals;
use crate::diagnostics::{sample_norms, theorem1_functionals, Trace};
use crate::error::{Error, Result};
use crate::logspace::{LogSumExp, WeightedValue};
use crate::scalar::Real;
use crate::spectrum::Problem;

/// Claim ids produced by [`verify_theorem_2`], in report order.
pub const THEOREM_2_CLAIMS: [&str; 11] =
    ["B1", "B2", "B31b", "B32b:A12", "B32b:A", "B4b:du", "B4b:A12du", "B5", "LIM:support", "LIM:velocity", "LIM:norm"];

/// Boundedness claims look at `t >= TAIL_START` only, past the initial layer.
const TAIL_START: f64 = 1.0;

/// Minimum horizon, in decades of `1 + t`, for limit claims.
const MIN_DECADES: f64 = 2.0;

/// Closed-form tail constants as functions of `(gamma, nu)`.
pub mod predicted {
    /// `lim (1 + t) b`.
    pub fn coefficient(gamma: f64, nu: f64) -> f64 {
        1.0 / (2.0 * nu * nu * gamma)
    }

    /// `lim (1 + t)^{1/gamma} |u_nu|^2`.
    pub fn low_band(gamma: f64, nu: f64) -> f64 {
        coefficient(gamma, nu).powf(1.0 / gamma) / (nu * nu)
    }

    /// `lim (1 + t)^{1/gamma} |A^{1/2} u|^2`.
    pub fn energy_norm(gamma: f64, nu: f64) -> f64 {
        coefficient(gamma, nu).powf(1.0 / gamma)
    }

    /// `lim (1 + t)^{1/gamma} |A u|^2`.
    pub fn graph_norm(gamma: f64, nu: f64) -> f64 {
        nu * nu * energy_norm(gamma, nu)
    }

    /// `lim (1 + t)^{2 + 1/gamma} |u'|^2`.
    pub fn velocity(gamma: f64, nu: f64) -> f64 {
        nu * nu * coefficient(gamma, nu).powf(2.0 + 1.0 / gamma)
    }

    /// `lim (1 + t)^{2 + 1/gamma} |A^{1/2} u'|^2`.
    pub fn velocity_energy(gamma: f64, nu: f64) -> f64 {
        nu * nu * velocity(gamma, nu)
    }

    /// `v_inf / u_inf`.
    pub fn velocity_ratio(gamma: f64) -> f64 {
        -1.0 / (2.0 * gamma)
    }
}

fn nonlinear<T: Real>(trace: &Trace<T>) -> Result<&Problem<T>> {
    trace.problem().ok_or_else(|| Error::InvalidParameter("verification needs a nonlinear trace".into()))
}

fn metadata<T: Real>(trace: &Trace<T>) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let fmt = |x: T| format!("{}", x.as_f64());
    m.insert("epsilon".into(), fmt(trace.epsilon()));
    m.insert("t_end".into(), fmt(trace.last().t));
    m.insert("samples".into(), trace.len().to_string());
    m.insert("dim".into(), trace.lambdas().len().to_string());
    if let Some(p) = trace.problem() {
        m.insert("gamma".into(), fmt(p.gamma()));
        m.insert("nu".into(), fmt(p.nu()));
        m.insert("b0".into(), fmt(p.b0()));
    }
    m
}

/// Tail boundedness of a positive quantity given through its logarithm.
fn bound_claim<T: Real>(id: &str, ts: &[T], logs: &[T], two_sided: bool, s: &VerifySettings) -> Claim {
    let tail: Vec<f64> =
        ts.iter().zip(logs).filter(|(t, _)| t.as_f64() >= TAIL_START).map(|(_, l)| l.as_f64()).collect();
    let slope = match tail_slope(ts, logs, T::lit(s.window_decades)) {
        Ok(x) => x.as_f64(),
        Err(Error::InsufficientTail { available, required }) => {
            return Claim::insufficient(id, None, available, required)
        }
        Err(_) => f64::NAN,
    };
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower = two_sided.then(|| lo.exp());
    let upper = hi.exp();
    let slope_ok = if two_sided { slope.abs() <= s.slope_slack } else { slope <= s.slope_slack };
    let pass = upper.is_finite() && slope_ok && lower.is_none_or(|l| l > 0.0 && l.is_finite());
    Claim {
        id: id.into(),
        predicted: None,
        measured: Measurement::Bound { lower, upper, slope },
        tolerance: s.slope_slack,
        pass,
    }
}

/// Tail boundedness of a log-space functional.
fn log_bound_claim<T: Real>(id: &str, ts: &[T], values: &[WeightedValue<T>], s: &VerifySettings) -> Claim {
    let tail: Vec<&WeightedValue<T>> =
        ts.iter().zip(values).filter(|(t, _)| t.as_f64() >= TAIL_START).map(|(_, v)| v).collect();
    let vacuous =
        Claim { id: id.into(), predicted: None, measured: Measurement::Vacuous, tolerance: s.slope_slack, pass: true };
    if tail.iter().all(|v| v.is_below_floor()) {
        return vacuous;
    }
    let logs: Vec<T> = values.iter().map(|v| v.log_value()).collect();
    let log_sup =
        tail.iter().filter(|v| !v.is_below_floor()).map(|v| v.log_value().as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let slope = match tail_slope(ts, &logs, T::lit(s.window_decades)) {
        Ok(x) => x.as_f64(),
        Err(Error::InsufficientTail { available, required }) => {
            return Claim::insufficient(id, None, available, required)
        }
        Err(_) => f64::NAN,
    };
    Claim {
        id: id.into(),
        predicted: None,
        measured: Measurement::LogBound { log_sup, slope },
        tolerance: s.slope_slack,
        pass: log_sup.is_finite() && slope <= s.slope_slack,
    }
}

fn limit_claim<T: Real>(id: &str, ts: &[T], values: &[T], predicted: f64, tol: f64, s: &VerifySettings) -> Claim {
    match estimate_limit(ts, values, T::lit(s.window_decades)) {
        Ok(est) => Claim::limit(id, predicted, est.to_f64(), tol),
        Err(Error::InsufficientTail { available, required }) => {
            Claim::insufficient(id, Some(predicted), available, required)
        }
        Err(_) => Claim::insufficient(id, Some(predicted), 0, super::MIN_TAIL_SAMPLES),
    }
}

fn exp_series<T: Real>(logs: &[T]) -> Vec<T> {
    logs.iter().map(|l| l.exp()).collect()
}

/// Uniform bounds in time-rescaled form.
pub fn verify_theorem_a<T: Real>(trace: &Trace<T>, settings: &VerifySettings) -> Result<VerificationReport> {
    let p = nonlinear(trace)?;
    let ts = trace.times();
    let inv_g = T::one() / p.gamma();
    let norms: Vec<_> = (0..trace.len()).map(|i| sample_norms(trace, i)).collect();
    let series = |f: &dyn Fn(usize) -> T| -> Vec<T> { (0..ts.len()).map(f).collect() };
    let energy = series(&|i| ts[i].ln_1p() * inv_g + norms[i].a12_u.log_value());
    let graph = series(&|i| ts[i].ln_1p() * inv_g + norms[i].a_u.log_value());
    let velocity = series(&|i| ts[i].ln_1p() * (T::lit(2.0) + inv_g) + norms[i].du.log_value());
    let claims = vec![
        bound_claim("h1", &ts, &energy, true, settings),
        bound_claim("h11", &ts, &graph, true, settings),
        bound_claim("h12", &ts, &velocity, false, settings),
    ];
    let mut metadata = metadata(trace);
    let (mut k1, mut k2) = (f64::INFINITY, 0.0_f64);
    for c in &claims {
        if let Measurement::Bound { lower, upper, .. } = c.measured {
            k1 = lower.map_or(k1, |l| k1.min(l));
            k2 = k2.max(upper);
        }
    }
    metadata.insert("K1_hat".into(), k1.to_string());
    metadata.insert("K2_hat".into(), k2.to_string());
    Ok(VerificationReport { title: "Theorem A".into(), claims, metadata })
}

/// Boundedness of the weighted high-band functionals for each `lambda`.
pub fn verify_theorem_1<T: Real>(
    trace: &Trace<T>,
    lambdas: &[T],
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let p = nonlinear(trace)?;
    let ts = trace.times();
    let mut claims = Vec::new();
    for &lambda in lambdas {
        if lambda < p.nu() {
            return Err(Error::InvalidParameter(format!("band floor {lambda} lies below nu = {}", p.nu())));
        }
        let tag = lambda.as_f64();
        for h in 0..2 {
            let f = theorem1_functionals(trace, lambda, h)?;
            claims.push(log_bound_claim(&format!("D1[lambda={tag},h={h}]"), &ts, &f.d1, settings));
            if h == 0 {
                claims.push(log_bound_claim(&format!("D2[lambda={tag}]"), &ts, &f.d2, settings));
                claims.push(log_bound_claim(&format!("D3[lambda={tag}]"), &ts, &f.d3, settings));
            }
        }
    }
    Ok(VerificationReport { title: "Theorem 1".into(), claims, metadata: metadata(trace) })
}

/// Renormalized tail limits and their closed-form constants.
pub fn verify_theorem_2<T: Real>(trace: &Trace<T>, settings: &VerifySettings) -> Result<VerificationReport> {
    let p = nonlinear(trace)?;
    let decades = trace.last().t.ln_1p().as_f64() / std::f64::consts::LN_10;
    if decades < MIN_DECADES {
        return Err(Error::InsufficientTail { available: decades as usize, required: MIN_DECADES as usize });
    }
    let (gamma, nu) = (p.gamma(), p.nu());
    let (g, n) = (gamma.as_f64(), nu.as_f64());
    let tol = settings.limit_tolerance(g);
    let ts = trace.times();
    let lambdas = trace.lambdas();
    let lo = trace.spectrum().band_start(nu);
    let hi = lambdas.partition_point(|&l| l <= nu);
    let inv_g = T::one() / gamma;
    let two = T::lit(2.0);
    let norms: Vec<_> = (0..trace.len()).map(|i| sample_norms(trace, i)).collect();
    let lt: Vec<T> = ts.iter().map(|t| t.ln_1p()).collect();
    let series = |f: &dyn Fn(usize) -> T| -> Vec<T> { (0..ts.len()).map(f).collect() };
    let band_log = |i: usize, range: std::ops::Range<usize>| {
        let mut acc = LogSumExp::default();
        for k in range {
            acc.add_weighted_square(T::zero(), trace.samples()[i].u[k]);
        }
        acc.ln()
    };

    let mut claims = Vec::new();
    let b1 = series(&|i| lt[i] - two * nu * nu * gamma * trace.samples()[i].big_b);
    claims.push(bound_claim("B1", &ts, &b1, true, settings));
    let b2 = series(&|i| (lt[i] + trace.samples()[i].b.ln()).exp());
    claims.push(limit_claim("B2", &ts, &b2, predicted::coefficient(g, n), tol, settings));
    let low = series(&|i| (lt[i] * inv_g + band_log(i, lo..hi)).exp());
    claims.push(limit_claim("B31b", &ts, &low, predicted::low_band(g, n), tol, settings));
    let a12 = exp_series(&series(&|i| lt[i] * inv_g + norms[i].a12_u.log_value()));
    claims.push(limit_claim("B32b:A12", &ts, &a12, predicted::energy_norm(g, n), tol, settings));
    let a = exp_series(&series(&|i| lt[i] * inv_g + norms[i].a_u.log_value()));
    claims.push(limit_claim("B32b:A", &ts, &a, predicted::graph_norm(g, n), tol, settings));
    let vt = settings.velocity_tolerance;
    let du = exp_series(&series(&|i| lt[i] * (two + inv_g) + norms[i].du.log_value()));
    claims.push(limit_claim("B4b:du", &ts, &du, predicted::velocity(g, n), vt, settings));
    let a12du = exp_series(&series(&|i| lt[i] * (two + inv_g) + norms[i].a12_du.log_value()));
    claims.push(limit_claim("B4b:A12du", &ts, &a12du, predicted::velocity_energy(g, n), vt, settings));
    let b5 = series(&|i| lt[i] * (T::lit(4.0) + inv_g) + norms[i].ddu.log_value());
    claims.push(bound_claim("B5", &ts, &b5, true, settings));
    claims.extend(limit_pair_claims(trace, &lt, lo..hi, tol, settings)?);

    let mut metadata = metadata(trace);
    metadata.insert("limit_tolerance".into(), tol.to_string());
    Ok(VerificationReport { title: "Theorem 2".into(), claims, metadata })
}

/// Componentwise limits of `((1+t)^{1/(2 gamma)} u, (1+t)^{1 + 1/(2 gamma)} u')`.
fn limit_pair_claims<T: Real>(
    trace: &Trace<T>,
    lt: &[T],
    band: std::ops::Range<usize>,
    tol: f64,
    s: &VerifySettings,
) -> Result<Vec<Claim>> {
    let p = nonlinear(trace)?;
    let (g, n) = (p.gamma().as_f64(), p.nu().as_f64());
    let ts = trace.times();
    let w = T::lit(s.window_decades);
    let half_g = T::one() / (T::lit(2.0) * p.gamma());
    let scale_u: Vec<T> = lt.iter().map(|&l| (l * half_g).exp()).collect();
    let scale_v: Vec<T> = lt.iter().map(|&l| (l * (T::one() + half_g)).exp()).collect();
    let component = |k: usize, scale: &[T], pick: fn(&crate::integrator::SystemState<T>, usize) -> T| {
        let vals: Vec<T> = trace.samples().iter().zip(scale).map(|(st, &c)| c * pick(st, k)).collect();
        estimate_limit(&ts, &vals, w).map(LimitEstimate::to_f64)
    };
    let ids = ["LIM:support", "LIM:velocity", "LIM:norm"];
    let mut u_inf = Vec::new();
    let mut v_inf = Vec::new();
    for k in 0..trace.lambdas().len() {
        let uk = component(k, &scale_u, |st, k| st.u[k]);
        let vk = component(k, &scale_v, |st, k| st.v[k]);
        match (uk, vk) {
            (Ok(a), Ok(b)) => {
                u_inf.push(a);
                v_inf.push(b);
            }
            (Err(Error::InsufficientTail { available, required }), _)
            | (_, Err(Error::InsufficientTail { available, required })) => {
                return Ok(ids.iter().map(|id| Claim::insufficient(*id, None, available, required)).collect());
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }

    let sq = |xs: &[LimitEstimate<f64>], r: std::ops::Range<usize>, half: bool| -> f64 {
        xs[r].iter().map(|e| if half { e.half_window_value.powi(2) } else { e.value.powi(2) }).sum()
    };
    let dim = u_inf.len();
    let on = sq(&u_inf, band.clone(), false);
    let on_half = sq(&u_inf, band.clone(), true);
    let off = sq(&u_inf, 0..band.start, false) + sq(&u_inf, band.end..dim, false);
    let off_half = sq(&u_inf, 0..band.start, true) + sq(&u_inf, band.end..dim, true);
    let leak = if on > 0.0 { off / on } else { f64::INFINITY };
    let leak_half = if on_half > 0.0 { off_half / on_half } else { f64::INFINITY };
    let support = Claim {
        id: ids[0].into(),
        predicted: Some(0.0),
        measured: Measurement::Limit(LimitEstimate {
            value: leak,
            half_window_value: leak_half,
            spread: (leak - leak_half).abs(),
        }),
        tolerance: s.support_leak,
        pass: leak <= s.support_leak && leak_half <= s.support_leak,
    };

    // worst component of the ratio v_inf / u_inf over the non-negligible part of the band
    let peak = u_inf[band.clone()].iter().map(|e| e.value.abs()).fold(0.0, f64::max);
    let target = predicted::velocity_ratio(g);
    let mut worst: Option<LimitEstimate<f64>> = None;
    for k in band.clone() {
        if u_inf[k].value.abs() < 1e-3 * peak {
            continue;
        }
        let value = v_inf[k].value / u_inf[k].value;
        let half_window_value = v_inf[k].half_window_value / u_inf[k].half_window_value;
        let est = LimitEstimate { value, half_window_value, spread: (value - half_window_value).abs() };
        let badness = |e: &LimitEstimate<f64>| (e.value - target).abs().max(2.0 * e.spread);
        if worst.is_none_or(|w| badness(&est) > badness(&w)) {
            worst = Some(est);
        }
    }
    let velocity = match worst {
        Some(est) => Claim::limit(ids[1], target, est, tol),
        None => Claim {
            id: ids[1].into(),
            predicted: Some(target),
            measured: Measurement::Vacuous,
            tolerance: tol,
            pass: false,
        },
    };
    let norm_est = LimitEstimate { value: on, half_window_value: on_half, spread: (on - on_half).abs() };
    let norm = Claim::limit(ids[2], predicted::low_band(g, n), norm_est, tol);
    Ok(vec![support, velocity, norm])
}

/// Weighted bounds of the prescribed-coefficient linear problem, with
/// weight `e^{2 sigma_m^2 B}`.
pub fn verify_propositions<T: Real>(
    trace: &Trace<T>,
    sigma_m: T,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let setup =
        trace.linear_setup().ok_or_else(|| Error::InvalidParameter("propositions need a linear trace".into()))?;
    if !(sigma_m > T::zero()) {
        return Err(Error::InvalidParameter(format!("sigma_m must be positive, got {sigma_m}")));
    }
    let ts = trace.times();
    let f1 = band_functionals(trace, 0, sigma_m * sigma_m, 1)?;
    let f0 = band_functionals(trace, 0, sigma_m * sigma_m, 0)?;
    let zero_data = setup.v0().iter().chain(setup.v1()).all(|&x| x == T::zero());
    let mut claims = Vec::new();
    for (id, values) in [("SL1b", &f1.d1), ("SL2b", &f0.d2), ("SL3b", &f0.d3)] {
        let claim = log_bound_claim(id, &ts, values, settings);
        if let (Measurement::InsufficientTail { available, required }, false) = (&claim.measured, zero_data) {
            return Err(Error::InsufficientTail { available: *available, required: *required });
        }
        claims.push(claim);
    }
    let mut metadata = metadata(trace);
    metadata.insert("sigma_m".into(), sigma_m.as_f64().to_string());
    metadata.insert("coefficient".into(), format!("{:?}", setup.coefficient()));
    Ok(VerificationReport { title: "Propositions 1-2".into(), claims, metadata })
}
