use std::path::Path;

use kirchhoff_core::{
    build_problem, laplacian_interval_spectrum, LinearCoefficient, Problem, SamplePolicy, Spectrum, StepController,
    VerifySettings,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Key of the table appended to emitted run metadata.
const RESOLVED: &str = "resolved";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Dirichlet Laplacian on `(0, length)`: `lambda_k = k pi / length`.
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientFamily {
    Constant,
    Power,
}

fn default_eta_b() -> f64 {
    1e-3
}

fn default_dt_min() -> f64 {
    1e-12
}

fn default_samples_per_decade() -> usize {
    40
}

fn default_flush_threshold() -> f64 {
    1e-300
}

fn default_velocity_tolerance() -> f64 {
    0.05
}

fn default_slope_slack() -> f64 {
    0.05
}

fn default_window_decades() -> f64 {
    1.0
}

fn default_support_leak() -> f64 {
    1e-3
}

fn default_one() -> f64 {
    1.0
}

/// Flat run configuration. Optional keys are omitted on output; every other
/// key is always written, so an emitted config pins every default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default = "default_one")]
    pub gamma: f64,
    pub epsilon: f64,
    pub u0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<Vec<f64>>,
    pub t_end: f64,

    #[serde(default = "default_eta_b")]
    pub eta_b: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_samples_per_decade")]
    pub samples_per_decade: usize,
    #[serde(default = "default_flush_threshold")]
    pub flush_threshold: f64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem1_lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default = "default_velocity_tolerance")]
    pub velocity_tolerance: f64,
    #[serde(default = "default_slope_slack")]
    pub slope_slack: f64,
    #[serde(default = "default_window_decades")]
    pub window_decades: f64,
    #[serde(default = "default_support_leak")]
    pub support_leak: f64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientFamily>,
    #[serde(default = "default_one")]
    pub coefficient_k: f64,
    #[serde(default = "default_one")]
    pub coefficient_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_m: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_gamma: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

/// Quantities derived from the config, echoed next to it in run metadata.
/// Eigenvalues are listed in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolved {
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
}

/// Sorted spectrum, coefficient, and data `(v0, v1)` reordered to match.
pub type LinearInputs = (Spectrum<f64>, LinearCoefficient<f64>, Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses a config, or the metadata emitted by a previous run. A
    /// `[resolved]` table, when present, must agree with the config.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e| ConfigError(format!("malformed config: {e}")))?;
        let resolved = table.remove(RESOLVED);
        let config: RunConfig =
            toml::Value::Table(table).try_into().map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return fail(format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", config.schema_version));
        }
        if let Some(value) = resolved {
            let recorded: Resolved =
                value.try_into().map_err(|e| ConfigError(format!("invalid [{RESOLVED}] table: {e}")))?;
            let mut expected = config.eigenvalues()?;
            expected.sort_by(f64::total_cmp);
            if recorded.eigenvalues != expected {
                return fail(format!("[{RESOLVED}] eigenvalues disagree with the config"));
            }
        }
        Ok(config)
    }

    /// Config followed by the `[resolved]` table.
    pub fn emit(&self, resolved: &Resolved) -> String {
        let head = toml::to_string(self).expect("config serializes");
        let tail = toml::to_string(resolved).expect("resolved block serializes");
        format!("{head}\n[{RESOLVED}]\n{tail}")
    }

    /// Eigenvalues in input order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.eigenvalues, self.preset, self.count, self.length) {
            (Some(list), None, None, None) => Ok(list.clone()),
            (None, Some(Preset::Laplacian), Some(count), Some(length)) => laplacian_interval_spectrum(count, length)
                .map(|s| s.eigenvalues().to_vec())
                .map_err(|e| ConfigError(e.to_string())),
            (None, Some(_), _, _) => fail("preset needs both count and length"),
            (Some(_), _, _, _) => fail("give either eigenvalues or a preset, not both"),
            (None, None, _, _) => fail("missing eigenvalues or preset"),
        }
    }

    pub fn u1(&self) -> Vec<f64> {
        self.u1.clone().unwrap_or_else(|| vec![0.0; self.u0.len()])
    }

    pub fn problem(&self) -> Result<Problem<f64>, ConfigError> {
        build_problem(&self.eigenvalues()?, self.gamma, self.epsilon, &self.u0, &self.u1())
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn controller(&self) -> Result<StepController<f64>, ConfigError> {
        let ctrl = StepController {
            eta_b: self.eta_b,
            dt_min: self.dt_min,
            flush_threshold: self.flush_threshold,
            ..StepController::default()
        };
        ctrl.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(ctrl)
    }

    pub fn sampler(&self) -> Result<SamplePolicy, ConfigError> {
        if self.samples_per_decade == 0 {
            return fail("samples_per_decade must be positive");
        }
        Ok(SamplePolicy { samples_per_decade: self.samples_per_decade })
    }

    pub fn horizon(&self) -> Result<f64, ConfigError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        Ok(self.t_end)
    }

    pub fn settings(&self) -> Result<VerifySettings, ConfigError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                fail(format!("{name} must be positive, got {x}"))
            }
        };
        if let Some(t) = self.tolerance {
            positive("tolerance", t)?;
        }
        positive("velocity_tolerance", self.velocity_tolerance)?;
        positive("slope_slack", self.slope_slack)?;
        positive("window_decades", self.window_decades)?;
        positive("support_leak", self.support_leak)?;
        Ok(VerifySettings {
            tolerance: self.tolerance,
            velocity_tolerance: self.velocity_tolerance,
            slope_slack: self.slope_slack,
            window_decades: self.window_decades,
            support_leak: self.support_leak,
        })
    }

    /// Sorted spectrum and matching data for the linear problem.
    pub fn linear(&self) -> Result<LinearInputs, ConfigError> {
        let family = self.coefficient.ok_or_else(|| ConfigError("linear runs need `coefficient`".into()))?;
        let coeff = match family {
            CoefficientFamily::Constant => LinearCoefficient::Constant { k: self.coefficient_k },
            CoefficientFamily::Power => LinearCoefficient::Power { k: self.coefficient_k, p: self.coefficient_p },
        };
        coeff.validate().map_err(|e| ConfigError(e.to_string()))?;
        let eigenvalues = self.eigenvalues()?;
        let u1 = self.u1();
        for found in [self.u0.len(), u1.len()] {
            if found != eigenvalues.len() {
                return fail(format!("expected {} coefficients, found {found}", eigenvalues.len()));
            }
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let pick = |x: &[f64]| order.iter().map(|&i| x[i]).collect::<Vec<_>>();
        let spectrum = Spectrum::new(pick(&eigenvalues)).map_err(|e| ConfigError(e.to_string()))?;
        Ok((spectrum, coeff, pick(&self.u0), pick(&u1)))
    }

    /// The single swept parameter and its values.
    pub fn sweep(&self) -> Result<(&'static str, Vec<f64>), ConfigError> {
        match (&self.sweep_epsilon, &self.sweep_gamma) {
            (Some(_), Some(_)) => fail("sweep over one of sweep_epsilon or sweep_gamma, not both"),
            (Some(v), None) if !v.is_empty() => Ok(("epsilon", v.clone())),
            (None, Some(v)) if !v.is_empty() => Ok(("gamma", v.clone())),
            _ => fail("sweep list is empty"),
        }
    }

    pub fn with_parameter(&self, name: &str, value: f64) -> Self {
        let mut c = self.clone();
        match name {
            "epsilon" => c.epsilon = value,
            "gamma" => c.gamma = value,
            _ => unreachable!("unknown sweep parameter {name}"),
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\neigenvalues = [1.0]\nepsilon = 0.05\nu0 = [1.0]\nt_end = 10.0\n";

    #[test]
    fn defaults_are_filled_in() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.gamma, 1.0);
        assert_eq!(c.eta_b, 1e-3);
        assert_eq!(c.samples_per_decade, 40);
        assert_eq!(c.u1(), vec![0.0]);
        assert_eq!(c.problem().unwrap().b0(), 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(&format!("{MINIMAL}colour = 3\n")).unwrap_err();
        assert!(err.0.contains("colour"), "{err}");
    }

    #[test]
    fn schema_version_is_checked() {
        assert!(RunConfig::parse(&MINIMAL.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(RunConfig::parse(&MINIMAL.replace("schema_version = 1\n", "")).is_err());
    }

    #[test]
    fn preset_resolves_to_integers() {
        let text = MINIMAL.replace(
            "eigenvalues = [1.0]",
            &format!("preset = \"laplacian\"\ncount = 3\nlength = {}", std::f64::consts::PI),
        );
        let c = RunConfig::parse(&text.replace("u0 = [1.0]", "u0 = [1.0, 0.0, 0.0]")).unwrap();
        let l = c.eigenvalues().unwrap();
        for (k, x) in l.iter().enumerate() {
            assert!((x - (k + 1) as f64).abs() < 1e-15);
        }
        assert!(RunConfig::parse(&text.replace("count = 3\n", "")).unwrap().eigenvalues().is_err());
    }

    #[test]
    fn emitted_metadata_round_trips() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.tolerance = Some(0.03);
        c.epsilon = 0.1 + 0.2;
        c.theorem1_lambdas = Some(vec![1.0 / 3.0]);
        let resolved = Resolved { eigenvalues: vec![1.0], nu: Some(1.0), b0: Some(1.0) };
        let text = c.emit(&resolved);
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
        let tampered = text.replace("[resolved]\neigenvalues = [1.0]", "[resolved]\neigenvalues = [2.0]");
        assert!(RunConfig::parse(&tampered).is_err());
    }

    #[test]
    fn sweep_needs_one_nonempty_list() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        assert!(c.sweep().is_err());
        c.sweep_gamma = Some(vec![]);
        assert!(c.sweep().is_err());
        c.sweep_gamma = Some(vec![0.5, 1.0]);
        assert_eq!(c.sweep().unwrap(), ("gamma", vec![0.5, 1.0]));
        c.sweep_epsilon = Some(vec![0.1]);
        assert!(c.sweep().is_err());
    }
}
