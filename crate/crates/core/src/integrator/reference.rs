//! Dormand-Prince 5(4) integration of the untransformed first-order system.
//!
//! Independent of the exponential stepper: it integrates `(u, u', B)`
//! directly with an explicit embedded pair, so it shares no propagator code.

use super::{LinearCoefficient, SamplePolicy, SystemState};
use crate::diagnostics::{b_of, LinearSetup, Trace, TraceSource};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::{weighted_norm_sq_unchecked, Problem, Spectrum};

const MAX_HORIZON: f64 = 1e3;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Right-hand side over the packed vector `[u..., v..., B]`.
trait Field<T> {
    fn dim(&self) -> usize;
    fn eval(&self, t: T, y: &[T], out: &mut [T]);
}

struct NonlinearField<'a, T> {
    problem: &'a Problem<T>,
}

impl<T: Real> Field<T> for NonlinearField<'_, T> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn eval(&self, _t: T, y: &[T], out: &mut [T]) {
        let n = self.dim();
        let (u, rest) = y.split_at(n);
        let v = &rest[..n];
        let b = b_of(self.problem, u);
        let eps = self.problem.epsilon();
        for (k, &l) in self.problem.spectrum().eigenvalues().iter().enumerate() {
            out[k] = v[k];
            out[n + k] = -(b * l * l * u[k] + v[k]) / eps;
        }
        out[2 * n] = b;
    }
}

struct LinearField<'a, T> {
    setup: &'a LinearSetup<T>,
}

impl<T: Real> Field<T> for LinearField<'_, T> {
    fn dim(&self) -> usize {
        self.setup.spectrum().len()
    }

    fn eval(&self, t: T, y: &[T], out: &mut [T]) {
        let n = self.dim();
        let b = self.setup.coefficient().value(t);
        let eps = self.setup.epsilon();
        for (k, &l) in self.setup.spectrum().eigenvalues().iter().enumerate() {
            out[k] = y[n + k];
            out[n + k] = -(b * l * l * y[k] + y[n + k]) / eps;
        }
        out[2 * n] = b;
    }
}

fn dopri<T: Real, F: Field<T>>(
    field: &F,
    y0: Vec<T>,
    targets: &[T],
    tol: T,
    h_max: T,
    mut record: impl FnMut(T, &[T], &[T]),
) -> Result<()> {
    let m = y0.len();
    let mut y = y0;
    let mut t = T::zero();
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); m]; 7];
    let mut stage = vec![T::zero(); m];
    let mut y5 = vec![T::zero(); m];
    let mut h = h_max.min(T::lit(1e-3));
    field.eval(t, &y, &mut k[0]);
    record(t, &y, &k[0]);

    for &target in targets {
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            for s in 1..7 {
                for i in 0..m {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += T::lit(A[s][j]) * kj[i];
                    }
                    stage[i] = y[i] + step * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                field.eval(t + T::lit(C[s]) * step, &stage, &mut tail[0]);
            }
            let mut err_sq = T::zero();
            for i in 0..m {
                let mut hi = T::zero();
                let mut lo = T::zero();
                for s in 0..7 {
                    hi += T::lit(B5[s]) * k[s][i];
                    lo += T::lit(B4[s]) * k[s][i];
                }
                y5[i] = y[i] + step * hi;
                let scale = tol + tol * y[i].abs().max(y5[i].abs());
                let e = step * (hi - lo) / scale;
                err_sq += e * e;
            }
            let err = (err_sq / T::lit(m as f64)).sqrt();
            if !err.is_finite() {
                return Err(Error::ToleranceNotMet { t: t.as_f64() });
            }
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
            };
            if err <= T::one() {
                t = if landing { target } else { t + step };
                std::mem::swap(&mut y, &mut y5);
                // FSAL: the seventh stage is the derivative at the new point
                let last = k[6].clone();
                k[0] = last;
                if !landing {
                    h = (step * factor).min(h_max);
                }
            } else {
                h = (step * factor).min(h_max);
            }
            if h < T::lit(1e-14) * (T::one() + t) {
                return Err(Error::ToleranceNotMet { t: t.as_f64() });
            }
        }
        record(t, &y, &k[0]);
    }
    Ok(())
}

fn check_horizon<T: Real>(t_end: T, tol: T) -> Result<()> {
    if !(t_end > T::zero() && t_end <= T::lit(MAX_HORIZON)) {
        return Err(Error::InvalidParameter(format!("reference horizon must lie in (0, 1e3], got {t_end}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn unpack<T: Real>(n: usize, t: T, y: &[T], dy: &[T], b: T) -> SystemState<T> {
    SystemState { t, u: y[..n].to_vec(), v: y[n..2 * n].to_vec(), accel: dy[n..2 * n].to_vec(), b, big_b: y[2 * n] }
}

/// High-accuracy oracle for short horizons (`t_end <= 1e3`).
pub fn reference_solve<T: Real>(problem: &Problem<T>, t_end: T, tol: T, sampler: &SamplePolicy) -> Result<Trace<T>> {
    check_horizon(t_end, tol)?;
    let n = problem.dim();
    let field = NonlinearField { problem };
    let mut y0 = problem.u0().to_vec();
    y0.extend_from_slice(problem.u1());
    y0.push(T::zero());
    let mut samples = Vec::new();
    let h_max = problem.epsilon() / T::lit(4.0);
    dopri(&field, y0, &sampler.targets(t_end), tol, h_max, |t, y, dy| {
        let b = weighted_norm_sq_unchecked(&y[..n], problem.spectrum().eigenvalues(), T::one()).powf(problem.gamma());
        samples.push(unpack(n, t, y, dy, b));
    })?;
    Trace::new(TraceSource::Nonlinear(problem.clone()), samples)
}

/// Oracle counterpart of [`super::evolve_linear`].
#[allow(clippy::too_many_arguments)]
pub fn reference_solve_linear<T: Real>(
    spectrum: &Spectrum<T>,
    coeff: LinearCoefficient<T>,
    epsilon: T,
    v0: &[T],
    v1: &[T],
    t_end: T,
    tol: T,
    sampler: &SamplePolicy,
) -> Result<Trace<T>> {
    check_horizon(t_end, tol)?;
    let setup = LinearSetup::new(spectrum.clone(), coeff, epsilon, v0.to_vec(), v1.to_vec())?;
    let n = spectrum.len();
    let field = LinearField { setup: &setup };
    let mut y0 = v0.to_vec();
    y0.extend_from_slice(v1);
    y0.push(T::zero());
    let mut samples = Vec::new();
    dopri(&field, y0, &sampler.targets(t_end), tol, epsilon / T::lit(4.0), |t, y, dy| {
        samples.push(unpack(n, t, y, dy, coeff.value(t)));
    })?;
    Trace::new(TraceSource::Linear(setup), samples)
}
