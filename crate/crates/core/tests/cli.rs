//! The binary end to end: files written, exit codes and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghz-lattice"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .env_remove("GHZ_LATTICE_THREADS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn oracle_passes_and_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["oracle_analytic.csv", "oracle_numeric.csv", "oracle.json", "timing.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let report = json(&dir.path().join("oracle.json"));
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn csv_files_start_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["-N", "2", "-M", "2", "--tau", "50", "ramp"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ramp.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(header["config"]["N"], 2);
    assert!(header["version"].as_str().unwrap().starts_with("ghz-lattice"));
    assert!(lines.next().unwrap().contains("C2"));
    let summary = json(&dir.path().join("ramp.json"));
    assert!(summary["max_norm_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["-M", "0", "ground"],
        vec!["--set", "no_such_field=1", "ground"],
        vec!["--set", "sweep.tau_grid=[-5]", "sweep"],
        vec!["--set", "direction=[[2,0],[0,0],[0,0]]", "ramp"],
        vec!["audit", "--inject-fault", "no_such_check"],
    ] {
        let out = bin(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = bin(dir.path(), &["--config", "/nonexistent/run.json", "ground"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ghz-lattice"))
        .args(["oracle", "--output"])
        .arg(dir.path())
        .env("GHZ_LATTICE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let ok = Command::new(env!("CARGO_BIN_EXE_ghz-lattice"))
        .args(["oracle", "--output"])
        .arg(dir.path())
        .env("GHZ_LATTICE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&dir.path().join("timing.json"))["threads"], 2);
}

#[test]
fn injected_fault_fails_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["--set", "audit.samples=500", "--set", "audit.sites=[2]"];
    let clean = bin(dir.path(), &[&small[..], &["audit"]].concat());
    assert_eq!(code(&clean), 0, "{}", String::from_utf8_lossy(&clean.stderr));
    let faulty = bin(dir.path(), &[&small[..], &["audit", "--inject-fault", "bound"]].concat());
    assert_eq!(code(&faulty), 1);
    assert!(String::from_utf8_lossy(&faulty.stderr).contains("bound."));
    let report = json(&dir.path().join("audit.json"));
    assert_eq!(report["passed"], false);
}

#[test]
fn same_seed_reproduces_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--seed", "11", "--set", "audit.samples=400", "--set", "audit.sites=[2,3]", "audit"];
    assert_eq!(code(&bin(a.path(), &args)), 0);
    assert_eq!(code(&bin(b.path(), &args)), 0);
    // Everything but the output directory recorded in the provenance.
    let read = |d: &Path| {
        let mut v = json(&d.join("audit.json"));
        v["provenance"]["config"]["output"] = Value::Null;
        v
    };
    assert_eq!(read(a.path()), read(b.path()));

    let other = tempfile::tempdir().unwrap();
    let args = ["--seed", "12", "--set", "audit.samples=400", "--set", "audit.sites=[2,3]", "audit"];
    assert_eq!(code(&bin(other.path(), &args)), 0);
    assert_ne!(read(a.path()), read(other.path()));
}

#[test]
fn sweep_phase_diagram_and_band_table_run() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = bin(dir.path(), &["-N", "2", "-M", "2", "--set", "sweep.tau_grid=[20,40,60]", "sweep"]);
    assert_eq!(code(&sweep), 0, "{}", String::from_utf8_lossy(&sweep.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let pd = bin(
        dir.path(),
        &[
            "--set",
            "phase_diagram.sites=3",
            "--set",
            "phase_diagram.particles=[1,3]",
            "--set",
            "phase_diagram.j_over_u=[0.01,2.0]",
            "phase-diagram",
        ],
    );
    assert_eq!(code(&pd), 0, "{}", String::from_utf8_lossy(&pd.stderr));
    let rows = std::fs::read_to_string(dir.path().join("phase_diagram.csv")).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 5);

    let bt = bin(
        dir.path(),
        &["--set", "band_table.v_min=5", "--set", "band_table.v_max=10", "--set", "band_table.points=3", "band-table"],
    );
    assert_eq!(code(&bt), 0, "{}", String::from_utf8_lossy(&bt.stderr));
    let table = std::fs::read_to_string(dir.path().join("band_table.csv")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("v0,J,")));
}

#[test]
fn ground_reports_a_converged_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["-N", "3", "-M", "3", "--set", "ground.dump_state=true", "ground"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let g = json(&dir.path().join("ground.json"));
    assert!(g["residual"].as_f64().unwrap() < 1e-9);
    assert!(g["fc"].as_f64().unwrap() > 0.9);
    assert!(dir.path().join("ground_state.csv").exists());
}
