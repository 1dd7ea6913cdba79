//! End-to-end checks of the `qss` binary: exit codes, report files and
//! configuration layering.

use std::path::Path;
use std::process::{Command, Output};

use qss_core::harness::{ReportFile, CSV_COLUMNS};
use qss_core::protocol::read_transcript_jsonl;

fn qss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn honest_run_is_secure_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qss(&["run", "--preset", "honest", "--rounds", "2000", "--out", path_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: ReportFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.reports.len(), 1);
    assert_eq!(report.reports[0].rounds, 2000);
}

#[test]
fn detected_attack_exits_with_one() {
    let o = qss(&[
        "run",
        "--preset",
        "opaque-no-cheat",
        "--rounds",
        "4000",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 1);
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert!(lines.next().unwrap().ends_with(",compromised"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let o = qss(&["run", "--eta", "1.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta"));

    let o = qss(&["run", "--preset", "no-such-preset"]);
    assert_eq!(code(&o), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "rounds = 100\nbogus_field = 1\n").unwrap();
    let o = qss(&["run", "--config", path_arg(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus_field"));
}

#[test]
fn flags_override_config_file_which_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "rounds = 1500\neta = 0.5\neta_prime = 0.5\nseed = 4\n").unwrap();
    let out = dir.path().join("r.json");
    let o = qss(&[
        "run",
        "--config",
        path_arg(&cfg),
        "--seed",
        "8",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &serde_json::from_str::<ReportFile>(&std::fs::read_to_string(&out).unwrap())
        .unwrap()
        .reports[0];
    assert_eq!(r.rounds, 1500);
    assert_eq!(r.eta, 0.5);
    assert_eq!(r.seed, 8);
    assert_eq!(r.scenario, "honest");
}

#[test]
fn transcript_file_has_one_line_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.jsonl");
    let o = qss(&[
        "run",
        "--preset",
        "opaque-vulnerable",
        "--rounds",
        "20000",
        "--transcript",
        path_arg(&t),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines = read_transcript_jsonl(std::io::BufReader::new(std::fs::File::open(&t).unwrap())).unwrap();
    assert_eq!(lines.len(), 20_000);
    assert!(lines.iter().any(|l| l.attack.is_some()));
}

#[test]
fn same_seed_gives_identical_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = qss(&["run", "--preset", "hardened", "--rounds", "3000", "--out", path_arg(p)]);
        assert_eq!(code(&o), 1);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_reports_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = qss(&[
        "sweep",
        "--eta",
        "0.25",
        "--eta-prime-list",
        "0.2,0.3,0.5",
        "--rounds",
        "20000",
        "--test-fraction",
        "0.1",
        "--format",
        "csv",
        "--out",
        path_arg(&out),
    ]);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(code(&o), 0, "{stderr}");
    assert!(stderr.contains("skipped"), "{stderr}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sweep_without_points_is_a_config_error() {
    assert_eq!(code(&qss(&["sweep", "--preset", "honest"])), 2);
}

#[test]
fn verify_table1_and_selftest_pass() {
    let o = qss(&["verify-table1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .filter(|l| l.ends_with("pass"))
            .count(),
        16
    );
    let o = qss(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn presets_are_listed() {
    let o = qss(&["presets"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8(o.stdout).unwrap();
    for name in ["honest", "opaque-vulnerable", "hardened", "hbb"] {
        assert!(names.lines().any(|l| l == name), "{name}");
    }
}
