use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn equibif(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equibif"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn report(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap()
}

const CLIFFORD: &str = "family = \"clifford\"\n[clifford]\nn = 1\nm = 1\ninterval = [0.4, 0.6]\n";

/// Canned configurations with one defect each.
fn malformed() -> Vec<std::path::PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed");
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

#[test]
fn malformed_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let files = malformed();
    assert_eq!(files.len(), 10);
    for file in &files {
        let path = file.to_str().unwrap();
        for cmd in ["validate", "scan"] {
            let out = equibif(dir.path(), &[cmd, "--config", path]);
            assert_eq!(
                out.status.code(),
                Some(2),
                "{cmd} {path}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            assert!(!out.stderr.is_empty());
        }
    }
    assert!(
        !dir.path().join("out").exists(),
        "nothing is written for a rejected config"
    );
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(&dir).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        assert_eq!(equibif_cli::diagnose(&text), Vec::new());
    }
}

#[test]
fn valid_config_validates() {
    let dir = tempfile::tempdir().unwrap();
    let name = write(dir.path(), "ok.toml", CLIFFORD);
    let out = equibif(dir.path(), &["validate", "--config", &name]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn clifford_scan_finds_the_half_radius_instant() {
    let dir = tempfile::tempdir().unwrap();
    let name = write(dir.path(), "c.toml", CLIFFORD);
    let out = equibif(dir.path(), &["scan", "--config", &name, "--out", "run"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "run");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["clifford"]["interval"], serde_json::json!([0.4, 0.6]));
    let instants = v["report"]["instants"].as_array().unwrap();
    assert_eq!(instants.len(), 1);
    assert!((instants[0]["parameter"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(instants[0]["verdict"]["fired"], "morse_jump");
    for f in ["table.csv", "plot-index.svg"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let name = write(dir.path(), "c.toml", CLIFFORD);
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = equibif(dir.path(), &["scan", "--config", &name, "--out", "run", "--seed", "5"]);
        assert_eq!(out.status.code(), Some(0));
        let read = |f: &str| fs::read(dir.path().join("run").join(f)).unwrap();
        outputs.push((read("report.json"), read("table.csv"), read("plot-index.svg")));
        fs::remove_dir_all(dir.path().join("run")).unwrap();
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn flags_override_file_keys() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "family = \"clifford\"\n[output]\ndir = \"from_file\"\nformats = [\"csv\"]\n[run]\nthreads = 1\n{}",
        &CLIFFORD[CLIFFORD.find('[').unwrap()..]
    );
    let name = write(dir.path(), "c.toml", &text);
    let out = equibif(
        dir.path(),
        &[
            "scan",
            "--config",
            &name,
            "--out",
            "cli",
            "--format",
            "json",
            "--threads",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("from_file").exists());
    assert!(!dir.path().join("cli/table.csv").exists());
    let v = report(dir.path(), "cli");
    assert_eq!(v["config"]["output"]["dir"], "cli");
    assert_eq!(v["config"]["run"]["threads"], 2);
}

#[test]
fn spheres_counterexample_is_gate_locked() {
    let dir = tempfile::tempdir().unwrap();
    let out = equibif(dir.path(), &["counterexample", "spheres", "--out", "caps"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "caps");
    let instants = v["report"]["instants"].as_array().unwrap();
    assert!(!instants.is_empty());
    for i in instants {
        assert_eq!(i["verdict"]["fired"], "none");
        let gates = i["verdict"]["gate_failures"].as_array().unwrap();
        assert!(gates.contains(&Value::from("parameter_derivative_zero")));
    }
}

#[test]
fn counterexample_config_section_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let name = write(
        dir.path(),
        "s.toml",
        "family = \"counterexample\"\n[counterexample]\nname = \"spheres\"\ninterval = [-0.3, 0.2]\nsamples = 6\n",
    );
    let out = equibif(
        dir.path(),
        &["scan", "--config", &name, "--out", "caps", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "caps");
    assert_eq!(v["report"]["interval"], serde_json::json!([-0.3, 0.2]));
}

#[test]
fn sandbox_reports_the_branch() {
    let dir = tempfile::tempdir().unwrap();
    let out = equibif(dir.path(), &["sandbox", "--out", "sb", "--format", "json,csv"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "sb");
    assert_eq!(v["report"]["instants"][0]["verdict"]["fired"], "morse_jump");
    assert!(dir.path().join("sb/table.csv").exists());
    assert!(!dir.path().join("sb/plot-index.svg").exists());
}

#[test]
fn subcommand_rejects_a_config_for_another_family() {
    let dir = tempfile::tempdir().unwrap();
    let name = write(dir.path(), "c.toml", CLIFFORD);
    let out = equibif(dir.path(), &["sandbox", "--config", &name]);
    assert_eq!(out.status.code(), Some(2));
}
