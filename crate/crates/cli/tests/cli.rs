use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const THREE_MODES: &str = "schema_version = 1
eigenvalues = [1.0, 2.0, 3.0]
gamma = 1.0
epsilon = 0.05
u0 = [1.0, 0.5, 0.25]
t_end = 1e5
";

struct Case {
    dir: TempDir,
}

impl Case {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("run.in.toml"), config).unwrap();
        Self { dir }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, command: &str, out: &str, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_kirchhoff"))
            .arg(command)
            .arg("--config")
            .arg(self.dir.path().join("run.in.toml"))
            .arg("--out")
            .arg(self.out(out))
            .args(extra)
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn reports(dir: &Path) -> Vec<Value> {
    serde_json::from_str::<Value>(&fs::read_to_string(dir.join("report.json")).unwrap())
        .unwrap()
        .as_array()
        .unwrap()
        .clone()
}

fn claim<'a>(reports: &'a [Value], id: &str) -> &'a Value {
    reports
        .iter()
        .flat_map(|r| r["claims"].as_array().unwrap())
        .find(|c| c["id"] == id)
        .unwrap_or_else(|| panic!("no claim {id}"))
}

#[test]
fn simulate_starts_from_the_initial_coefficient() {
    let case = Case::new("schema_version = 1\neigenvalues = [2.0]\nepsilon = 0.1\nu0 = [1.0]\nt_end = 10.0\n");
    let o = case.run("simulate", "a", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(case.out("a/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,b,B,norm_u2,norm_A12u2,norm_Au2,norm_du2,norm_A12du2,norm_ddu2,E_lyap,\
         beta0,beta1,beta2,beta3,beta4,log_beta0,log_beta1,log_beta2,log_beta3,log_beta4"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(first[1].parse::<f64>().unwrap(), 4.0);
}

#[test]
fn preset_eigenvalues_are_echoed() {
    let config = format!(
        "schema_version = 1\npreset = \"laplacian\"\ncount = 3\nlength = {}\nepsilon = 0.05\nu0 = [1.0, 0.0, 0.0]\nt_end = 10.0\n",
        std::f64::consts::PI
    );
    let case = Case::new(&config);
    assert_eq!(code(&case.run("simulate", "a", &[])), 0);
    let meta: toml::Table = fs::read_to_string(case.out("a/run.toml")).unwrap().parse().unwrap();
    let eig = meta["resolved"]["eigenvalues"].as_array().unwrap();
    for (k, x) in eig.iter().enumerate() {
        assert!((x.as_float().unwrap() - (k + 1) as f64).abs() < 1e-14);
    }
    assert_eq!(meta["resolved"]["nu"].as_float().unwrap(), eig[0].as_float().unwrap());
}

#[test]
fn emitted_metadata_reproduces_the_run() {
    let case = Case::new(THREE_MODES);
    assert_eq!(code(&case.run("simulate", "a", &["--t-end", "1e3", "--gamma", "0.5"])), 0);
    let meta = fs::read_to_string(case.out("a/run.toml")).unwrap();
    assert!(meta.contains("gamma = 0.5"));
    let again = Command::new(env!("CARGO_BIN_EXE_kirchhoff"))
        .args(["simulate", "--config"])
        .arg(case.out("a/run.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(fs::read(case.out("a/run.toml")).unwrap(), meta.as_bytes());
    let first = fs::read(case.out("a/trace.csv")).unwrap();
    assert_eq!(code(&case.run("simulate", "b", &["--t-end", "1e3", "--gamma", "0.5"])), 0);
    assert_eq!(fs::read(case.out("b/trace.csv")).unwrap(), first);
}

#[test]
fn heavy_mass_with_large_velocity_is_a_numeric_failure() {
    let case =
        Case::new("schema_version = 1\neigenvalues = [1.0]\nepsilon = 0.05\nu0 = [0.1]\nu1 = [10.0]\nt_end = 100.0\n");
    let o = case.run("simulate", "a", &["--epsilon", "0.9"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("blowup"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2() {
    let case = Case::new(&format!("{THREE_MODES}colour = \"red\"\n"));
    let o = case.run("simulate", "a", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));
    let case = Case::new(&THREE_MODES.replace("schema_version = 1", "schema_version = 7"));
    assert_eq!(code(&case.run("simulate", "a", &[])), 2);
    let case = Case::new(THREE_MODES);
    assert_eq!(code(&case.run("simulate", "a", &["--epsilon", "1.5"])), 2);
    assert_eq!(code(&case.run("verify", "b", &["--claims", "NOPE"])), 2);
}

#[test]
fn verify_passes_on_the_reference_run() {
    let case = Case::new(THREE_MODES);
    let o = case.run("verify", "a", &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS Theorem 2: 11/11 claims pass"));
    let r = reports(&case.out("a"));
    assert_eq!(claim(&r, "B2")["predicted"], 0.5);
    let measured = claim(&r, "B2")["measured"]["value"].as_f64().unwrap();
    assert!((measured - 0.5).abs() < 0.01);
}

#[test]
fn claim_filter_keeps_only_the_named_claims() {
    let case = Case::new(THREE_MODES);
    let o = case.run("verify", "a", &["--claims", "B5"]);
    assert_eq!(code(&o), 0);
    let r = reports(&case.out("a"));
    assert_eq!(r.len(), 1);
    let ids: Vec<&str> = r[0]["claims"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["B5"]);
}

#[test]
fn short_horizon_marks_claims_insufficient() {
    let case = Case::new(THREE_MODES);
    let o = case.run("verify", "a", &["--t-end", "20"]);
    assert_eq!(code(&o), 1);
    let r = reports(&case.out("a"));
    let b2 = claim(&r, "B2");
    assert_eq!(b2["pass"], false);
    assert_eq!(b2["measured"]["kind"], "insufficient_tail");
}

#[test]
fn linear_power_family_is_bounded() {
    let case = Case::new(
        "schema_version = 1\neigenvalues = [1.0, 2.0]\nepsilon = 0.05\nu0 = [1.0, 0.5]\nt_end = 1e4\ncoefficient = \"power\"\n",
    );
    let o = case.run("linear", "a", &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let r = reports(&case.out("a"));
    for id in ["SL1b", "SL2b", "SL3b"] {
        assert_eq!(claim(&r, id)["pass"], true);
    }
    let header = fs::read_to_string(case.out("a/trace.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,b,B,norm_u2,norm_A12u2,norm_Au2,norm_du2,norm_A12du2,norm_ddu2");
}

#[test]
fn linear_constant_matches_characteristic_roots() {
    let case = Case::new(
        "schema_version = 1\neigenvalues = [1.0, 3.0]\nepsilon = 0.1\nu0 = [1.0, -0.5]\nu1 = [0.0, 2.0]\nt_end = 20.0\n\
         coefficient = \"constant\"\ncoefficient_k = 1.0\n",
    );
    let o = case.run("linear", "a", &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let r = reports(&case.out("a"));
    assert!(claim(&r, "ORACLE")["measured"]["max_relative"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn linear_zero_data_passes_vacuously() {
    let case = Case::new(
        "schema_version = 1\neigenvalues = [1.0, 2.0]\nepsilon = 0.05\nu0 = [0.0, 0.0]\nt_end = 1e3\ncoefficient = \"power\"\n",
    );
    let o = case.run("linear", "a", &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let r = reports(&case.out("a"));
    assert_eq!(claim(&r, "SL1b")["measured"]["kind"], "vacuous");
}

#[test]
fn linear_needs_a_coefficient_family() {
    let case = Case::new(THREE_MODES);
    assert_eq!(code(&case.run("linear", "a", &[])), 2);
}

fn sweep_column(dir: &Path, column: &str) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn epsilon_sweep_limits_agree() {
    let case = Case::new(&format!("{THREE_MODES}sweep_epsilon = [0.1, 0.05, 0.01]\n"));
    let o = case.run("sweep", "a", &["--threads", "3"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let b2 = sweep_column(&case.out("a"), "B2");
    assert_eq!(b2.len(), 3);
    for x in &b2 {
        assert!((x - 0.5).abs() < 0.01, "{b2:?}");
    }
    assert_eq!(code(&case.run("sweep", "b", &["--threads", "1"])), 0);
    assert_eq!(fs::read(case.out("a/sweep.csv")).unwrap(), fs::read(case.out("b/sweep.csv")).unwrap());
}

#[test]
fn gamma_sweep_follows_the_closed_form() {
    let case = Case::new(&format!("{THREE_MODES}sweep_gamma = [0.5, 1.0, 2.0]\n"));
    let o = case.run("sweep", "a", &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let gammas = sweep_column(&case.out("a"), "gamma");
    for (g, b2) in gammas.iter().zip(sweep_column(&case.out("a"), "B2")) {
        assert!((b2 - 0.5 / g).abs() < 0.02 * 0.5 / g);
    }
}

#[test]
fn sweep_rows_record_errors_and_continue() {
    let case = Case::new(&format!("{THREE_MODES}sweep_epsilon = [0.05, 2.0]\n"));
    let o = case.run("sweep", "a", &[]);
    assert_eq!(code(&o), 2);
    let text = fs::read_to_string(case.out("a/sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("5e-2,ok,true"));
}

#[test]
fn empty_sweep_is_a_config_error() {
    let case = Case::new(&format!("{THREE_MODES}sweep_epsilon = []\n"));
    assert_eq!(code(&case.run("sweep", "a", &[])), 2);
    let case = Case::new(THREE_MODES);
    assert_eq!(code(&case.run("sweep", "a", &[])), 2);
}
