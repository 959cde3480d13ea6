use std::path::{Path, PathBuf};

use kirchhoff_core::asymptotics::THEOREM_2_CLAIMS;
use kirchhoff_core::{
    evolve, evolve_linear, verify_propositions, verify_theorem_1, verify_theorem_2, verify_theorem_a, Claim, Error,
    LinearCoefficient, Measurement, Trace, VerificationReport, VerifySettings,
};
use rayon::prelude::*;

use crate::config::{ConfigError, Resolved, RunConfig};
use crate::output::{self, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowupDetected { .. }
            | Error::StepUnderflow { .. }
            | Error::ToleranceNotMet { .. }
            | Error::DegenerateTrace { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Config(format!("cannot write {}: {e}", path.display()))
}

/// Effective configuration plus command-line options that do not belong in it.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub claims: Option<Vec<String>>,
    pub threads: Option<usize>,
}

impl Run {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_metadata(&self, resolved: &Resolved) -> Result<(), Failure> {
        let path = self.file("run.toml");
        std::fs::write(&path, self.config.emit(resolved)).map_err(io(&path))
    }

    fn write_trace(&self, trace: &Trace<f64>) -> Result<(), Failure> {
        let path = self.file("trace.csv");
        output::write_trace(&path, trace).map_err(io(&path))
    }

    /// Applies `--claims`, dropping reports left without claims.
    fn filter(&self, reports: Vec<VerificationReport>) -> Result<Vec<VerificationReport>, Failure> {
        let Some(ids) = &self.claims else {
            return Ok(reports);
        };
        let kept: Vec<VerificationReport> = reports
            .into_iter()
            .map(|mut r| {
                r.retain_claims(ids);
                r
            })
            .filter(|r| !r.claims.is_empty())
            .collect();
        if kept.is_empty() {
            return Err(Failure::Config(format!("no claim matches {}", ids.join(","))));
        }
        Ok(kept)
    }

    fn finish(&self, reports: Vec<VerificationReport>) -> Result<bool, Failure> {
        let reports = self.filter(reports)?;
        let path = self.file("report.json");
        output::write_reports(&path, &reports).map_err(io(&path))?;
        for r in &reports {
            println!("{}", r.summary_line());
        }
        Ok(reports.iter().all(VerificationReport::passed))
    }
}

fn simulate_trace(run: &Run) -> Result<Trace<f64>, Failure> {
    let c = &run.config;
    let problem = c.problem()?;
    let trace = evolve(&problem, c.horizon()?, &c.controller()?, &c.sampler()?)?;
    run.write_trace(&trace)?;
    run.write_metadata(&Resolved {
        eigenvalues: problem.spectrum().eigenvalues().to_vec(),
        nu: Some(problem.nu()),
        b0: Some(problem.b0()),
    })?;
    println!("wrote {} samples to {}", trace.len(), run.file("trace.csv").display());
    Ok(trace)
}

pub fn simulate(run: &Run) -> Result<bool, Failure> {
    simulate_trace(run).map(|_| true)
}

/// Theorem 2 report, with every claim marked when the horizon is too short.
fn theorem_2(trace: &Trace<f64>, settings: &VerifySettings) -> Result<VerificationReport, Failure> {
    match verify_theorem_2(trace, settings) {
        Ok(r) => Ok(r),
        Err(Error::InsufficientTail { available, required }) => Ok(VerificationReport {
            title: "Theorem 2".into(),
            claims: THEOREM_2_CLAIMS.iter().map(|id| Claim::insufficient(*id, None, available, required)).collect(),
            metadata: Default::default(),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn verify(run: &Run) -> Result<bool, Failure> {
    let settings = run.config.settings()?;
    let trace = simulate_trace(run)?;
    let problem = trace.problem().expect("nonlinear trace");
    let lambdas = match &run.config.theorem1_lambdas {
        Some(l) => l.clone(),
        None => {
            let mut l: Vec<f64> = trace.lambdas().iter().copied().filter(|&l| l >= problem.nu()).collect();
            l.dedup();
            l
        }
    };
    let reports = vec![
        verify_theorem_a(&trace, &settings)?,
        verify_theorem_1(&trace, &lambdas, &settings)?,
        theorem_2(&trace, &settings)?,
    ];
    run.finish(reports)
}

/// `eps v'' + c v + v' = 0` solved through its characteristic roots.
fn closed_form(eps: f64, c: f64, v0: f64, v1: f64, t: f64) -> (f64, f64) {
    let disc = 1.0 - 4.0 * eps * c;
    let alpha = -1.0 / (2.0 * eps);
    if disc > 0.0 {
        let root = disc.sqrt() / (2.0 * eps);
        let (r1, r2) = (alpha + root, alpha - root);
        let a = (v1 - r2 * v0) / (r1 - r2);
        let b = v0 - a;
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        (a * e1 + b * e2, a * r1 * e1 + b * r2 * e2)
    } else if disc < 0.0 {
        let omega = (-disc).sqrt() / (2.0 * eps);
        let c2 = (v1 - alpha * v0) / omega;
        let (s, co, e) = ((omega * t).sin(), (omega * t).cos(), (alpha * t).exp());
        let u = e * (v0 * co + c2 * s);
        let du = e * ((alpha * v0 + omega * c2) * co + (alpha * c2 - omega * v0) * s);
        (u, du)
    } else {
        let c2 = v1 - alpha * v0;
        let e = (alpha * t).exp();
        (e * (v0 + c2 * t), e * (alpha * (v0 + c2 * t) + c2))
    }
}

const ORACLE_TOLERANCE: f64 = 1e-9;

fn oracle_claim(trace: &Trace<f64>, k: f64) -> Claim {
    let setup = trace.linear_setup().expect("linear trace");
    let mut worst = 0.0_f64;
    for s in trace.samples() {
        let mut diff = 0.0_f64;
        let mut scale = 0.0_f64;
        for (j, &l) in trace.lambdas().iter().enumerate() {
            let (u, du) = closed_form(setup.epsilon(), k * l * l, setup.v0()[j], setup.v1()[j], s.t);
            diff = diff.max((s.u[j] - u).abs()).max((s.v[j] - du).abs());
            scale = scale.max(u.abs()).max(du.abs());
        }
        if scale > 1e-250 {
            worst = worst.max(diff / scale);
        }
    }
    Claim {
        id: "ORACLE".into(),
        predicted: Some(0.0),
        measured: Measurement::Deviation { max_relative: worst },
        tolerance: ORACLE_TOLERANCE,
        pass: worst <= ORACLE_TOLERANCE,
    }
}

pub fn linear(run: &Run) -> Result<bool, Failure> {
    let c = &run.config;
    let settings = c.settings()?;
    let (spectrum, coeff, v0, v1) = c.linear()?;
    let trace = evolve_linear(&spectrum, coeff, c.epsilon, &v0, &v1, c.horizon()?, &c.controller()?, &c.sampler()?)?;
    run.write_trace(&trace)?;
    run.write_metadata(&Resolved { eigenvalues: spectrum.eigenvalues().to_vec(), nu: None, b0: None })?;
    println!("wrote {} samples to {}", trace.len(), run.file("trace.csv").display());
    let report = match coeff {
        LinearCoefficient::Constant { k } => VerificationReport {
            title: "Constant coefficient".into(),
            claims: vec![oracle_claim(&trace, k)],
            metadata: [("epsilon".to_string(), c.epsilon.to_string())].into(),
        },
        LinearCoefficient::Power { .. } => {
            let sigma_m = c.sigma_m.unwrap_or(spectrum.eigenvalues()[0]);
            match verify_propositions(&trace, sigma_m, &settings) {
                Ok(r) => r,
                Err(Error::InsufficientTail { available, required }) => VerificationReport {
                    title: "Propositions 1-2".into(),
                    claims: ["SL1b", "SL2b", "SL3b"]
                        .iter()
                        .map(|id| Claim::insufficient(*id, None, available, required))
                        .collect(),
                    metadata: Default::default(),
                },
                Err(e) => return Err(e.into()),
            }
        }
    };
    run.finish(vec![report])
}

fn sweep_point(run: &Run, config: &RunConfig, settings: &VerifySettings) -> Result<VerificationReport, Failure> {
    let problem = config.problem()?;
    let trace = evolve(&problem, config.horizon()?, &config.controller()?, &config.sampler()?)?;
    let mut report = theorem_2(&trace, settings)?;
    if let Some(ids) = &run.claims {
        report.retain_claims(ids);
    }
    Ok(report)
}

/// Exit status: 0 when every row passes, 1 on a failed claim, 2 or 3 when a
/// row could not be run (configuration or numerics, numerics taking precedence).
pub fn sweep(run: &Run) -> Result<u8, Failure> {
    let c = &run.config;
    let (parameter, values) = c.sweep()?;
    let settings = c.settings()?;
    c.controller()?;
    c.sampler()?;
    c.horizon()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Config(format!("cannot start workers: {e}")))?;
    let outcomes: Vec<Result<VerificationReport, Failure>> = pool
        .install(|| values.par_iter().map(|&v| sweep_point(run, &c.with_parameter(parameter, v), &settings)).collect());

    let mut code = 0;
    let mut rows = Vec::new();
    for (&value, outcome) in values.iter().zip(outcomes) {
        match &outcome {
            Ok(r) => {
                println!("{parameter}={value}: {}", r.summary_line());
                if !r.passed() {
                    code = code.max(1);
                }
            }
            Err(f) => {
                println!("{parameter}={value}: error: {}", f.message());
                code = code.max(f.exit_code());
            }
        }
        rows.push(SweepRow { value, outcome: outcome.map_err(|f| f.message().to_string()) });
    }
    let path = run.file("sweep.csv");
    output::write_sweep(&path, parameter, &rows).map_err(io(&path))?;
    let resolved = c.eigenvalues()?;
    run.write_metadata(&Resolved { eigenvalues: sorted(resolved), nu: None, b0: None })?;
    Ok(code)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
