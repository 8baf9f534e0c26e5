use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL_RUN: &str = r#"
[model]
c1 = 1
c2 = 1.0

[grid]
t_min = -40.0
t_max = 40.0
n = 512

[solver]
dz = 2e-3
z_end = 0.5
snapshot_every = 25

[initial]
kind = "gaussian"
amplitude = 1.0
width = 1.0
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlse-lab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn simulate_writes_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let out = dir.path().join("out");
    let o = run(&["simulate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["metrics.csv", "report.json", "plots/moments.svg"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(report["relative_mass_drift"].as_f64().unwrap() < 1e-10);
}

#[test]
fn closeness_passes_on_a_small_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let out = dir.path().join("out");
    let o = run(&["closeness"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report["violations"].as_array().unwrap().is_empty());
    assert!(out.join("plots/distance.svg").is_file());
}

#[test]
fn invalid_parameter_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &SMALL_RUN.replace("c2 = 1.0", "c2 = -1.0"));
    let o = run(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.c2"));
}

#[test]
fn missing_or_malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], &dir.path().join("absent.toml"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "broken.toml", "[model\nc2 = ");
    let o = run(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "extra.toml", &format!("{SMALL_RUN}\n[bogus]\nx = 1\n"));
    let o = run(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wrong_potential_fails_the_painleve_check() {
    let dir = tempfile::tempdir().unwrap();
    let family = r#"
[painleve]
f = { kind = "const", value = 0.5 }
g = { kind = "exp", scale = -1.0, rate = -0.5 }
v2 = { kind = "const", value = 5.0 }
z = { start = 0.0, end = 2.0, points = 64 }
"#;
    let good = write(dir.path(), "good.toml", &family.replace("5.0", "0.125"));
    let o = run(&["painleve-check"], &good, &dir.path().join("good"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bad = write(dir.path(), "bad.toml", family);
    let o = run(&["painleve-check"], &bad, &dir.path().join("bad"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_without_epsilons_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let out = dir.path().join("out");
    let o = run(&["sweep"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(report["rows"].as_array().unwrap().is_empty());
    assert!(report["epsilons"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_lengths_grow_with_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{SMALL_RUN}\n[bounds]\nk = 0.05\nc_tilde = 1.0\n"),
    );
    let out = dir.path().join("out");
    let o = run(&["sweep", "--epsilons", "0.01,0.1,1", "--deltas", "0.01"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let l: Vec<f64> = report["epsilons"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["L_of_epsilon"].as_f64().unwrap())
        .collect();
    assert!(l.windows(2).all(|w| w[1] > w[0]), "{l:?}");
    assert_eq!(report["constants_source"], "config");
}

#[test]
fn sweep_rejects_non_positive_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let o = run(&["sweep", "--epsilons", "0.1,-1"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}
