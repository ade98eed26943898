use std::fs;
use std::path::Path;
use std::process::Command;

use mwplast::output::{read_csv, read_json_lines};
use mwplast::Mode;
use mwplast_cli::{run_cli_with, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["mwplast"];
    argv.extend_from_slice(args);
    let code = run_cli_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn field<'a>(summary: &'a str, key: &str) -> &'a str {
    let start = summary.find(&format!("{key}=")).unwrap() + key.len() + 1;
    summary[start..].split_whitespace().next().unwrap()
}

#[test]
fn hydrostatic_plateau_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.2\n");
    let r = run(&["--config", &cfg, "--scenario", "2.1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let mean: f64 = field(&r.stderr, "final_mean_stress").parse().unwrap();
    assert!((mean - 2.95).abs() <= 0.01, "{mean}");
    assert!(r.stderr.contains("SmoothReturn:0"));
    let rows = read_csv(&r.stdout).unwrap();
    assert_eq!(rows.len(), 200);
}

#[test]
fn confined_apex_onset_near_half_of_phase_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.3\n");
    let out = dir.path().join("o.csv");
    let r = run(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    // summary goes to stdout when records go to a file
    let onset = r.stdout.split("apex_onset=").nth(1).unwrap();
    assert!(onset.contains("phase 2"), "{onset}");
    let pct: f64 = onset
        .rsplit(", ")
        .next()
        .unwrap()
        .trim_end_matches(")\n")
        .trim_end_matches('%')
        .parse()
        .unwrap();
    assert!((35.0..=65.0).contains(&pct), "{pct}");
    assert_eq!(read_csv(&fs::read_to_string(out).unwrap()).unwrap().len(), 400);
}

#[test]
fn empty_config_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", "");
    let r = run(&["--config", &cfg]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("parse error"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        ("run.scenario = 2.1\nmaterial.nu = 0.5\n", "nu"),
        ("run.scenario = 2.1\nmaterial.gamma = 1\n", "unknown key"),
        ("material.E = 30000\n", "material.nu"),
        (
            "run.scenario = no_such_program.txt\nmaterial.E = 30000\n",
            "material.nu",
        ),
    ] {
        let cfg = write(dir.path(), "bad.cfg", text);
        let r = run(&["--config", &cfg]);
        assert_eq!(r.code, EXIT_CONFIG, "{text}");
        assert!(r.stderr.contains(needle), "{text}: {}", r.stderr);
    }
    let r = run(&["--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("missing.cfg"));
}

#[test]
fn flag_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.1\n");
    assert_eq!(run(&[]).code, EXIT_CONFIG);
    assert_eq!(run(&["--config", &cfg, "--format", "xml"]).code, EXIT_CONFIG);
    assert_eq!(run(&["--config", &cfg, "--scenario", "9.9"]).code, EXIT_CONFIG);
    let help = run(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("--config"));
}

#[test]
fn quiet_suppresses_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.1\nrun.increments = 10\n");
    let r = run(&["--config", &cfg, "--quiet"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stderr.is_empty());
    assert_eq!(read_csv(&r.stdout).unwrap().len(), 10);
}

#[test]
fn json_lines_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.4\nrun.increments = 50\n");
    let r = run(&["--config", &cfg, "--format", "json-lines", "--quiet"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows = read_json_lines(&r.stdout).unwrap();
    assert_eq!(rows.len(), 100);
    let csv = run(&["--config", &cfg, "--quiet"]);
    assert_eq!(rows, read_csv(&csv.stdout).unwrap());
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.4\n");
    let a = run(&["--config", &cfg]);
    let b = run(&["--config", &cfg]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn output_path_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_config.csv");
    let cfg = write(
        dir.path(),
        "run.cfg",
        &format!(
            "run.scenario = 2.1\nrun.increments = 20\nrun.output = {}\n",
            out.display()
        ),
    );
    let r = run(&["--config", &cfg, "--quiet"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.is_empty());
    assert_eq!(read_csv(&fs::read_to_string(out).unwrap()).unwrap().len(), 20);
}

#[test]
fn unwritable_output_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.1\nrun.increments = 5\n");
    let bad = dir.path().join("no_dir").join("o.csv");
    let r = run(&["--config", &cfg, "--out", bad.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("no_dir"), "{}", r.stderr);
}

const TABLE: &str = "\
material.E = 30000
material.nu = 0.15
material.fc = 32
material.ft = 3
material.e = 0.52
material.t = 0.0055
material.k1d = 0.10008
material.qh0 = 0.2
material.gA = 21.22
material.gB = 31.46
";

#[test]
fn custom_program_file_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "pull.txt",
        "# uniaxial pull, lateral faces free\n40 e:2e-4 s:0 s:0 e:0 e:0 e:0\n",
    );
    let cfg = write(dir.path(), "run.cfg", &format!("{TABLE}run.scenario = pull.txt\n"));
    let r = run(&["--config", &cfg, "--quiet"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows = read_csv(&r.stdout).unwrap();
    assert_eq!(rows.len(), 40);
    for row in &rows {
        assert!(row.sig22.abs() < 1e-8 && row.sig33.abs() < 1e-8);
    }
    assert!(rows.iter().any(|r| r.mode != Mode::Elastic));
}

#[test]
fn unreachable_stress_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // hydrostatic tension well beyond the apex cannot be sustained
    write(dir.path(), "over.txt", "10 s:10 s:10 s:10 e:0 e:0 e:0\n");
    let cfg = write(dir.path(), "run.cfg", &format!("{TABLE}run.scenario = over.txt\n"));
    let r = run(&["--config", &cfg, "--quiet"]);
    assert_eq!(r.code, EXIT_NONCONVERGENCE, "{}", r.stderr);
    assert!(!r.stderr.is_empty());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_mwplast");
    let good = write(dir.path(), "good.cfg", "run.scenario = 2.1\nrun.increments = 10\n");
    let empty = write(dir.path(), "empty.cfg", "");
    let out = Command::new(exe).args(["--config", &good]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&out.stdout).contains("step,eps11"));
    let out = Command::new(exe).args(["--config", &empty]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn every_preset_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "run.scenario = 2.1\n");
    for s in ["2.1", "2.2", "2.2-unload", "2.3", "2.4"] {
        let r = run(&["--config", &cfg, "--scenario", s, "--quiet"]);
        assert_eq!(r.code, EXIT_OK, "{s}: {}", r.stderr);
    }
}
