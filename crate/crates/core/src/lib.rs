//! Spectral simulation of `eps u'' + |A^{1/2} u|^{2 gamma} A u + u' = 0` and
//! numerical verification of its long-time asymptotics.
//!
//! The operator `A` is represented by its eigenvalues `lambda_k^2`; each mode
//! obeys `eps u_k'' + b lambda_k^2 u_k + u_k' = 0` with the shared coefficient
//! `b = (sum lambda_j^2 u_j^2)^gamma`. Everything is generic over [`Real`]
//! (`f32` or `f64`); the `*64` / `*32` aliases fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod logspace;
pub mod scalar;
pub mod spectrum;

pub use asymptotics::{
    estimate_limit, tail_slope, verify_propositions, verify_theorem_1, verify_theorem_2, verify_theorem_a, Claim,
    LimitEstimate, Measurement, VerificationReport, VerifySettings,
};
pub use diagnostics::{b_of, Trace, TraceSource};
pub use error::{Error, Result};
pub use integrator::{
    evolve, evolve_linear, limit_ode_solution, reference_solve, reference_solve_linear, step, LinearCoefficient,
    SamplePolicy, StepController, SystemState,
};
pub use logspace::{Floor, WeightedValue};
pub use scalar::Real;
pub use spectrum::{
    build_problem, decompose, laplacian_interval_spectrum, weighted_norm_sq, BandDecomposition, Problem, Spectrum,
};

pub type Spectrum64 = Spectrum<f64>;
pub type Problem64 = Problem<f64>;
pub type SystemState64 = SystemState<f64>;
pub type StepController64 = StepController<f64>;
pub type Trace64 = Trace<f64>;
pub type LinearCoefficient64 = LinearCoefficient<f64>;

pub type Spectrum32 = Spectrum<f32>;
pub type Problem32 = Problem<f32>;
pub type SystemState32 = SystemState<f32>;
pub type StepController32 = StepController<f32>;
pub type Trace32 = Trace<f32>;
pub type LinearCoefficient32 = LinearCoefficient<f32>;
