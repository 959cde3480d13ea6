use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LimitEstimate;

/// What was measured for one claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement {
    Limit(LimitEstimate<f64>),
    /// Extremes of a positive quantity over the tail and its log-log slope.
    Bound {
        lower: Option<f64>,
        upper: f64,
        slope: f64,
    },
    /// Supremum of a log-space functional over the tail and its log-log slope.
    LogBound {
        log_sup: f64,
        slope: f64,
    },
    /// Largest relative deviation from an exact solution.
    Deviation {
        max_relative: f64,
    },
    /// Every tail sample is below the representable floor.
    Vacuous,
    InsufficientTail {
        available: usize,
        required: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub predicted: Option<f64>,
    pub measured: Measurement,
    pub tolerance: f64,
    pub pass: bool,
}

impl Claim {
    /// Limit rule: `|m - p| <= tol |p|` and `spread <= tol |p| / 2`.
    pub fn limit(id: impl Into<String>, predicted: f64, est: LimitEstimate<f64>, tolerance: f64) -> Self {
        let scale = predicted.abs();
        let pass = (est.value - predicted).abs() <= tolerance * scale && est.spread <= tolerance * scale / 2.0;
        Self { id: id.into(), predicted: Some(predicted), measured: Measurement::Limit(est), tolerance, pass }
    }

    pub fn insufficient(id: impl Into<String>, predicted: Option<f64>, available: usize, required: usize) -> Self {
        Self {
            id: id.into(),
            predicted,
            measured: Measurement::InsufficientTail { available, required },
            tolerance: 0.0,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub claims: Vec<Claim>,
    pub metadata: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    /// Keeps only claims whose id equals or starts with one of `ids`
    /// followed by `:` or `[`.
    pub fn retain_claims(&mut self, ids: &[String]) {
        self.claims.retain(|c| {
            ids.iter().any(|id| {
                c.id == *id || c.id.strip_prefix(id.as_str()).is_some_and(|rest| rest.starts_with([':', '[']))
            })
        });
    }

    /// `"<title>: <passed>/<total> claims pass"`.
    pub fn summary_line(&self) -> String {
        let ok = self.claims.iter().filter(|c| c.pass).count();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!("{status} {}: {ok}/{} claims pass", self.title, self.claims.len())
    }
}

/// Tolerances and windows used by the verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    /// Relative tolerance for limit claims; `None` picks 2%, or 5% when `gamma < 1/2`.
    pub tolerance: Option<f64>,
    /// Relative tolerance for the two velocity limits.
    pub velocity_tolerance: f64,
    /// Allowed log-log tail slope for boundedness claims.
    pub slope_slack: f64,
    /// Width of the trailing window in decades of `1 + t`.
    pub window_decades: f64,
    /// Support mass allowed off the lowest band, relative to `|u_inf|^2`.
    pub support_leak: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self { tolerance: None, velocity_tolerance: 0.05, slope_slack: 0.05, window_decades: 1.0, support_leak: 1e-3 }
    }
}

impl VerifySettings {
    pub fn limit_tolerance(&self, gamma: f64) -> f64 {
        self.tolerance.unwrap_or(if gamma < 0.5 { 0.05 } else { 0.02 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(value: f64, spread: f64) -> LimitEstimate<f64> {
        LimitEstimate { value, half_window_value: value + spread, spread }
    }

    #[test]
    fn limit_rule() {
        assert!(Claim::limit("B2", 0.5, est(0.505, 0.001), 0.02).pass);
        assert!(!Claim::limit("B2", 0.5, est(0.52, 0.001), 0.02).pass);
        assert!(!Claim::limit("B2", 0.5, est(0.5, 0.006), 0.02).pass);
    }

    #[test]
    fn filtering_by_prefix() {
        let claim = |id: &str| Claim::limit(id, 1.0, est(1.0, 0.0), 0.02);
        let mut r = VerificationReport {
            title: "t".into(),
            claims: vec![claim("B5"), claim("B4b:du"), claim("B4b:A12du"), claim("B52")],
            metadata: BTreeMap::new(),
        };
        r.retain_claims(&["B5".into(), "B4b".into()]);
        let ids: Vec<_> = r.claims.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["B5", "B4b:du", "B4b:A12du"]);
    }

    #[test]
    fn json_round_trip() {
        let r = VerificationReport {
            title: "x".into(),
            claims: vec![Claim::insufficient("B2", Some(0.5), 3, 8)],
            metadata: BTreeMap::from([("gamma".to_string(), "1".to_string())]),
        };
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
