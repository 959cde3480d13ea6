use crate::error::{Error, Result};
use crate::integrator::{LinearCoefficient, SystemState};
use crate::scalar::Real;
use crate::spectrum::{active_floor, weighted_norm_sq_unchecked, Problem, Spectrum};

/// Data of a prescribed-coefficient linear run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSetup<T> {
    spectrum: Spectrum<T>,
    coefficient: LinearCoefficient<T>,
    epsilon: T,
    v0: Vec<T>,
    v1: Vec<T>,
}

impl<T: Real> LinearSetup<T> {
    pub fn new(
        spectrum: Spectrum<T>,
        coefficient: LinearCoefficient<T>,
        epsilon: T,
        v0: Vec<T>,
        v1: Vec<T>,
    ) -> Result<Self> {
        spectrum.check_len(&v0)?;
        spectrum.check_len(&v1)?;
        if !(epsilon > T::zero() && epsilon <= T::one()) {
            return Err(Error::InvalidEpsilon(epsilon.as_f64()));
        }
        coefficient.validate()?;
        if v0.iter().chain(&v1).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("initial data must be finite".into()));
        }
        Ok(Self { spectrum, coefficient, epsilon, v0, v1 })
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn coefficient(&self) -> LinearCoefficient<T> {
        self.coefficient
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn v0(&self) -> &[T] {
        &self.v0
    }

    pub fn v1(&self) -> &[T] {
        &self.v1
    }
}

/// What produced a trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource<T> {
    Nonlinear(Problem<T>),
    Linear(LinearSetup<T>),
}

/// Recorded samples of one trajectory together with its defining data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    source: TraceSource<T>,
    samples: Vec<SystemState<T>>,
}

impl<T: Real> Trace<T> {
    pub fn new(source: TraceSource<T>, samples: Vec<SystemState<T>>) -> Result<Self> {
        let trace = Self { source, samples };
        if trace.samples.is_empty() {
            return Err(Error::InvalidParameter("trace needs at least one sample".into()));
        }
        for (i, s) in trace.samples.iter().enumerate() {
            let spectrum = trace.spectrum();
            spectrum.check_len(&s.u)?;
            spectrum.check_len(&s.v)?;
            spectrum.check_len(&s.accel)?;
            if i > 0 && !(s.t > trace.samples[i - 1].t) {
                return Err(Error::InvalidParameter(format!("sample times not increasing at index {i}")));
            }
        }
        Ok(trace)
    }

    pub fn source(&self) -> &TraceSource<T> {
        &self.source
    }

    pub fn samples(&self) -> &[SystemState<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &SystemState<T> {
        &self.samples[self.samples.len() - 1]
    }

    pub fn problem(&self) -> Option<&Problem<T>> {
        match &self.source {
            TraceSource::Nonlinear(p) => Some(p),
            TraceSource::Linear(_) => None,
        }
    }

    pub fn linear_setup(&self) -> Option<&LinearSetup<T>> {
        match &self.source {
            TraceSource::Linear(s) => Some(s),
            TraceSource::Nonlinear(_) => None,
        }
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        match &self.source {
            TraceSource::Nonlinear(p) => p.spectrum(),
            TraceSource::Linear(s) => s.spectrum(),
        }
    }

    pub fn lambdas(&self) -> &[T] {
        self.spectrum().eigenvalues()
    }

    pub fn epsilon(&self) -> T {
        match &self.source {
            TraceSource::Nonlinear(p) => p.epsilon(),
            TraceSource::Linear(s) => s.epsilon(),
        }
    }

    pub fn initial_position(&self) -> &[T] {
        match &self.source {
            TraceSource::Nonlinear(p) => p.u0(),
            TraceSource::Linear(s) => s.v0(),
        }
    }

    pub fn initial_velocity(&self) -> &[T] {
        match &self.source {
            TraceSource::Nonlinear(p) => p.u1(),
            TraceSource::Linear(s) => s.v1(),
        }
    }

    /// Smallest eigenvalue carrying data, `None` for a zero linear run.
    pub fn nu(&self) -> Option<T> {
        active_floor(self.spectrum(), self.initial_position(), self.initial_velocity())
    }

    /// Coefficient value at `t = 0`.
    pub fn b0(&self) -> T {
        match &self.source {
            TraceSource::Nonlinear(p) => p.b0(),
            TraceSource::Linear(s) => s.coefficient().value(T::zero()),
        }
    }

    /// Exact `b'` at sample `i`: chain rule for the nonlinear coefficient,
    /// analytic derivative for a prescribed one.
    pub fn b_rate(&self, i: usize) -> T {
        let s = &self.samples[i];
        match &self.source {
            TraceSource::Linear(setup) => setup.coefficient().rate(s.t),
            TraceSource::Nonlinear(p) => {
                let lambdas = p.spectrum().eigenvalues();
                let norm = weighted_norm_sq_unchecked(&s.u, lambdas, T::one());
                if norm == T::zero() {
                    return T::zero();
                }
                let flux: T = lambdas.iter().zip(s.u.iter().zip(&s.v)).map(|(&l, (&u, &v))| l * l * u * v).sum();
                T::lit(2.0) * p.gamma() * flux * norm.powf(p.gamma() - T::one())
            }
        }
    }

    /// Mode `k` started from zero data.
    pub fn is_inactive(&self, k: usize) -> bool {
        self.initial_position()[k] == T::zero() && self.initial_velocity()[k] == T::zero()
    }

    /// Mode `k` carried data but reads exactly zero at sample `i`.
    pub fn is_flushed(&self, i: usize, k: usize) -> bool {
        let s = &self.samples[i];
        !self.is_inactive(k) && s.u[k] == T::zero() && s.v[k] == T::zero()
    }
}
