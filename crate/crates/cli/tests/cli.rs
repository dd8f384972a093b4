use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use phi_inclusion_cli::config::ProblemConfig;
use phi_inclusion_cli::{run, Cli};
use serde_json::Value;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_json(args: &[&str]) -> (i32, Value, String) {
    let cli = Cli::try_parse_from(std::iter::once("phi-inclusion").chain(args.iter().copied()).chain(["--json"])).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    let json = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, json, String::from_utf8(err).unwrap())
}

const QUADRATIC: &str = "\
period = 2*pi
nodes = 64
phi.family = power
phi.p = 2
phi.dim = 1
potential.dim = 1
potential.term.0.kind = phi
potential.term.0.phi.family = power
potential.term.0.phi.p = 2
potential.term.0.phi.dim = 1
potential.term.1.coefficient = cos(t)
potential.term.1.kind = affine
potential.term.1.weights = 1
";

#[test]
fn example_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ProblemConfig::from_path(&path).unwrap();
        assert_eq!(ProblemConfig::parse(&cfg.to_text()).unwrap(), cfg, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn too_few_nodes_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "n3.conf", &QUADRATIC.replace("nodes = 64", "nodes = 3"));
    let (code, _, err) = run_json(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("nodes"), "{err}");
}

#[test]
fn unknown_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.conf", &format!("{QUADRATIC}solver.warp = 9\n"));
    let (code, _, err) = run_json(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("solver.warp"), "{err}");
}

#[test]
fn tiny_budget_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "tiny.conf", &format!("{QUADRATIC}solver.max_iter = 2\n"));
    let (code, json, _) = run_json(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json["solve"]["converged"], Value::Bool(false));
    assert_eq!(json["solve"]["exit_code"], 2);
}

#[test]
fn zero_potential_convergence_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let text = "period = 2*pi\nnodes = 16\nphi.family = power\nphi.p = 3\nphi.dim = 2\n\
                potential.dim = 2\npotential.term.0.kind = constant\npotential.term.0.value = 0\n";
    let path = write_config(dir.path(), "zero.conf", text);
    let (code, json, err) = run_json(&["convergence", "--config", path.to_str().unwrap(), "--levels", "2"]);
    assert_eq!(code, 0, "{err}");
    let rows = json["convergence"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row["action"].as_f64().unwrap(), 0.0);
        assert_eq!(row["oscillation"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn inverse_time_potential_fails_integrability_and_has_infinite_action() {
    let path = configs_dir().join("inverse_t.conf");
    let (code, json, _) = run_json(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let h3 = &json["hypotheses"]["h3"];
    assert_eq!(h3["status"], "fail");
    let w = &h3["witness"];
    assert!(w["lhs"].as_f64().unwrap() > w["rhs"].as_f64().unwrap(), "{w}");

    let (code, json, _) = run_json(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json["solve"]["status"], "infinite_action");
}

#[test]
fn analyze_reports_power_indices() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "p3.conf", "phi.family = power\nphi.p = 3\nphi.dim = 2\n");
    let (code, json, err) = run_json(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let a = &json["analysis"];
    for key in ["alpha", "beta"] {
        assert!((a["indices"][key].as_f64().unwrap() - 3.0).abs() <= 0.05);
        assert!((a["conjugate_indices"][key].as_f64().unwrap() - 1.5).abs() <= 0.05);
    }
    assert!(!a["conjugate_table"].as_array().unwrap().is_empty());
}

#[test]
fn binary_writes_report_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.conf", QUADRATIC);
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_phi-inclusion"))
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["solve"]["status"], "verified");
    assert_eq!(report["config_echo"]["nodes"], "64");
    let u = phi_inclusion::read_trajectory_csv(std::fs::File::open(out.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(u.nodes(), 64);
}

#[test]
fn missing_config_file_exits_with_one() {
    let status = Command::new(env!("CARGO_BIN_EXE_phi-inclusion"))
        .args(["check", "--config", "/nonexistent/problem.conf"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}
