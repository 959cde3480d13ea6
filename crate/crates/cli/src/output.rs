use std::io;
use std::path::Path;

use kirchhoff_core::diagnostics::{beta_functionals, lyapunov_energy, sample_norms};
use kirchhoff_core::{Floor, Measurement, Trace, VerificationReport, WeightedValue};

const NORMS: [&str; 6] = ["norm_u2", "norm_A12u2", "norm_Au2", "norm_du2", "norm_A12du2", "norm_ddu2"];

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Raw value, or a sentinel when it does not fit in `f64`.
fn raw(w: &WeightedValue<f64>) -> String {
    match (w.raw_hint(), w.floor()) {
        (Some(x), _) => num(x),
        (None, Floor::Above) if w.log_value() > 0.0 => "overflow".into(),
        _ => "underflow".into(),
    }
}

fn log(w: &WeightedValue<f64>) -> String {
    match w.floor() {
        Floor::Above => num(w.log_value()),
        Floor::Zero => "-inf".into(),
        Floor::Flushed => "underflow".into(),
    }
}

pub fn trace_header(nonlinear: bool) -> Vec<String> {
    let mut h: Vec<String> = ["t", "b", "B"].iter().chain(&NORMS).map(|s| s.to_string()).collect();
    if nonlinear {
        h.push("E_lyap".into());
        h.extend((0..5).map(|j| format!("beta{j}")));
        h.extend((0..5).map(|j| format!("log_beta{j}")));
    }
    h
}

/// One row per sample. Linear traces stop after the norm columns.
pub fn write_trace(path: &Path, trace: &Trace<f64>) -> io::Result<()> {
    let problem = trace.problem();
    let betas = problem.map(|_| beta_functionals(trace).expect("nonlinear trace"));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trace_header(problem.is_some()))?;
    for (i, s) in trace.samples().iter().enumerate() {
        let n = sample_norms(trace, i);
        let mut row = vec![num(s.t), num(s.b), num(s.big_b)];
        row.extend([n.u, n.a12_u, n.a_u, n.du, n.a12_du, n.ddu].iter().map(raw));
        if let (Some(p), Some(rec)) = (problem, &betas) {
            row.push(num(lyapunov_energy(p, &s.u, &s.v)));
            row.extend(rec.beta.iter().map(|b| raw(&b[i])));
            row.extend(rec.beta.iter().map(|b| log(&b[i])));
        }
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn write_reports(path: &Path, reports: &[VerificationReport]) -> io::Result<()> {
    let text = serde_json::to_string_pretty(reports).map_err(io::Error::other)?;
    std::fs::write(path, text + "\n")
}

/// Limit claims tabulated by [`write_sweep`].
pub const SWEEP_CLAIMS: [&str; 6] = ["B2", "B31b", "B32b:A12", "B32b:A", "B4b:du", "B4b:A12du"];

pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<VerificationReport, String>,
}

pub fn write_sweep(path: &Path, parameter: &str, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![parameter.to_string(), "status".into(), "pass".into()];
    header.extend(SWEEP_CLAIMS.iter().map(|c| c.to_string()));
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![num(row.value)];
        match &row.outcome {
            Ok(report) => {
                record.push("ok".into());
                record.push(report.passed().to_string());
                for id in SWEEP_CLAIMS {
                    record.push(match report.claim(id).map(|c| &c.measured) {
                        Some(Measurement::Limit(e)) => num(e.value),
                        _ => String::new(),
                    });
                }
            }
            Err(msg) => {
                record.push(msg.clone());
                record.push("false".into());
                record.extend(SWEEP_CLAIMS.iter().map(|_| String::new()));
            }
        }
        w.write_record(&record)?;
    }
    w.flush()
}
