//! The `diffauc` binary: output and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn diffauc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffauc"))
        .args(args)
        .env_remove("DIFFAUC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_fixture_text_and_json() {
    let o = diffauc(&["run", "--fixture", "seven-buyer", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("step 1: explored {a,b} winner b"), "{out}");
    assert!(out.contains("SW 12.5"), "{out}");
    assert!(out.contains("RV 7"), "{out}");

    let o = diffauc(&["run", "--fixture", "seven-buyer", "--mechanism", "mudar", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rv"], 6.0);
    assert_eq!(v["sw"], 18.0);
    assert_eq!(v["buyers"][1]["payment"], -1.0);
}

fn write_instance(dir: &Path) -> (String, String) {
    let g = dir.join("g.txt");
    let p = dir.join("v.csv");
    std::fs::write(&g, "0 1\n0 2\n1 3\n2 3\n3 4\n").unwrap();
    std::fs::write(&p, "id,values\n1,5,4\n2,6,1\n3,7,7\n4,9,2\n").unwrap();
    (g.display().to_string(), p.display().to_string())
}

#[test]
fn run_from_files_multi_demand() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = write_instance(dir.path());
    for mech in ["mudan", "mudar"] {
        let o = diffauc(&[
            "run", "--graph", &g, "--profiles", &p, "--seller", "0", "-m", "2", "--demand", "multi",
            "--mechanism", mech,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("SW_opt 16"), "{}", stdout(&o));
    }
}

#[test]
fn reduce_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = write_instance(dir.path());
    let out = dir.path().join("red");
    let o = diffauc(&[
        "reduce", "--graph", &g, "--profiles", &p, "--seller", "0", "-m", "2", "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("seller label 8"), "{}", stdout(&o));
    for f in ["reduced.edges", "reduced.csv", "map.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn check_exit_codes() {
    let clean = diffauc(&["check", "--mechanism", "mudan", "--instances", "30"]);
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    assert!(stdout(&clean).contains("ic: 0 failing instances"));

    let broken = diffauc(&["check", "--mechanism", "dnamu", "--instances", "200"]);
    assert_eq!(broken.status.code(), Some(1), "{}", stdout(&broken));

    let json = diffauc(&["check", "--instances", "5", "--json", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    assert_eq!(v["config"]["seed"], 3);
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(diffauc(&["run", "--mechanism", "vcg", "--fixture", "seven-buyer"]).status.code(), Some(2));
    assert_eq!(diffauc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(diffauc(&["check", "--demand", "multi", "--mechanism", "dnamu"]).status.code(), Some(2));
    let o = diffauc(&["run", "--graph", "/nonexistent", "--profiles", "x", "--seller", "0", "-m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "graph = pa:60:2\nstrategy = degree, random\nm = 3\ntrials = 2 # short\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = diffauc(&[
            "sweep", "--config", cfg.to_str().unwrap(), "--set", "seed=5", "--mechanism", "mudan,mudar",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# seed = 5"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 2 * 2);

    let o = Command::new(env!("CARGO_BIN_EXE_diffauc"))
        .args(["sweep", "--print-config"])
        .env("DIFFAUC_SEED", "123")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("seed = 123"), "{}", stdout(&o));
}
