use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finsler_cli::{
    cmd_construct, normalized_toml, parse_config, CliError, EXIT_COVERAGE, EXIT_DATA, EXIT_FAIL,
    EXIT_IO, EXIT_OK, EXIT_USAGE,
};
use finsler_core::RunConfig;

const EXAMPLE: &str = r#"
[model]
n = 3

[model.phi]
kind = "shen-example"

[grid]
x_points = 10
directions = 32
seed = 3
"#;

const UNICORN_C1_ZERO: &str = r#"
[model]
n = 3

[model.phi]
kind = "unicorn"
c1 = [0.0]
lambda1 = [1.0]

[grid]
x_points = 4
directions = 8
"#;

const COMPAT_CONTROL: &str = r#"
[model]
n = 3
b_range = [1.0, 1.0]

[model.phi]
kind = "unicorn"
c1 = [0.0, 1.0]

[grid]
x_points = 1
directions = 1
"#;

// phi = 1 - s^2 loses positive definiteness for b near 1
const INDEFINITE: &str = r#"
[model]
n = 3
b_range = [0.9, 0.99]

[model.phi]
kind = "custom"
expr = { sub = [{ const = 1.0 }, { mul = ["s", "s"] }] }

[grid]
x_points = 4
directions = 8
"#;

fn finsler(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn finsler")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_with(body: &str, args: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", body);
    let mut full: Vec<&str> = args.to_vec();
    let cfg = cfg.display().to_string();
    full.extend(["--config", &cfg, "--out", "out"]);
    let o = finsler(&full, dir.path());
    (o, dir)
}

#[test]
fn landsberg_suite_passes_on_the_example() {
    let (o, dir) = run_with(EXAMPLE, &["verify", "--theorem", "thm1.2-landsberg"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let json = fs::read_to_string(dir.path().join("out/verify-thm1.2-landsberg.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["suite"]["passed"], true);
    assert_eq!(v["points"], 320);
    assert!(v["config"]["tolerances"]["tensor"].is_number());
}

#[test]
fn nonberwald_suite_fails_when_c1_vanishes() {
    let (o, _dir) = run_with(
        UNICORN_C1_ZERO,
        &["verify", "--theorem", "thm1.2-nonberwald"],
    );
    assert_eq!(code(&o), EXIT_FAIL);
}

#[test]
fn riemannian_suites_are_consistent_for_c1_zero() {
    for t in ["thm1.3", "cor1.3", "prop-berwald"] {
        let (o, _dir) = run_with(UNICORN_C1_ZERO, &["verify", "--theorem", t]);
        assert_eq!(
            code(&o),
            EXIT_OK,
            "{t}: {}",
            String::from_utf8_lossy(&o.stdout)
        );
    }
}

#[test]
fn compatibility_control_fails_with_sigma_two() {
    let (o, dir) = run_with(COMPAT_CONTROL, &["verify", "--theorem", "family-compat"]);
    assert_eq!(code(&o), EXIT_FAIL);
    let json = fs::read_to_string(dir.path().join("out/verify-family-compat.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["suite"]["details"]["max_sigma"], 2.0);
}

#[test]
fn unknown_theorem_is_a_usage_error() {
    let (o, _dir) = run_with(EXAMPLE, &["verify", "--theorem", "bogus"]);
    assert_eq!(code(&o), EXIT_USAGE);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&finsler(&["frobnicate"], dir.path())), EXIT_USAGE);
    assert_eq!(code(&finsler(&["scan"], dir.path())), EXIT_USAGE);
    assert_eq!(code(&finsler(&["--help"], dir.path())), EXIT_OK);
}

#[test]
fn empty_grid_is_a_data_error() {
    let body = EXAMPLE.replace("directions = 32", "directions = 0");
    let (o, _dir) = run_with(&body, &["scan"]);
    assert_eq!(code(&o), EXIT_DATA);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty grid"));
}

#[test]
fn malformed_config_is_a_data_error() {
    let (o, _dir) = run_with("[model]\nn = \"three\"\n", &["construct"]);
    assert_eq!(code(&o), EXIT_DATA);
    let (o, _dir) = run_with(&EXAMPLE.replace("n = 3", "n = 1"), &["construct"]);
    assert_eq!(code(&o), EXIT_DATA);
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = finsler(&["scan", "--config", "absent.toml"], dir.path());
    assert_eq!(code(&o), EXIT_IO);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXAMPLE);
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = finsler(
        &[
            "scan",
            "--config",
            &cfg.display().to_string(),
            "--out",
            "blocker/out",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_IO);
}

#[test]
fn indefinite_metric_fails_coverage() {
    let (o, dir) = run_with(INDEFINITE, &["scan"]);
    assert_eq!(code(&o), EXIT_COVERAGE);
    let csv = fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    assert!(csv.contains("not positive definite"));
}

#[test]
fn scan_writes_one_row_per_grid_point() {
    let (o, dir) = run_with(EXAMPLE, &["scan", "--jobs", "2"]);
    assert_eq!(code(&o), EXIT_OK);
    let mut rd = csv::Reader::from_path(dir.path().join("out/scan.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    for col in [
        "x0",
        "y2",
        "b2",
        "s",
        "landsberg_tensor",
        "x_sx2",
        "positive_d1",
        "positive_d2",
    ] {
        assert!(header.iter().any(|h| h == col), "missing {col}");
    }
    assert_eq!(rd.records().count(), 320);
}

#[test]
fn seed_override_changes_the_grid() {
    let (_, a) = run_with(EXAMPLE, &["scan"]);
    let (_, b) = run_with(EXAMPLE, &["scan", "--seed", "99"]);
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("out/scan.csv")).unwrap();
    assert_ne!(read(&a), read(&b));
}

#[test]
fn construct_reports_the_example_domain() {
    let (o, dir) = run_with(EXAMPLE, &["construct"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/model.json")).unwrap())
            .unwrap();
    for iv in v["intervals"].as_array().unwrap() {
        let lo = iv["lo_over_b"].as_f64().unwrap();
        assert!((lo + 0.5f64.sqrt()).abs() < 1e-4, "{lo}");
        assert_eq!(iv["hi_over_b"], 1.0);
    }
    assert!(v["min_d1_rel"].as_f64().unwrap() > 0.0);
    assert!(v["min_d2_rel"].as_f64().unwrap() > 0.0);
}

#[test]
fn construct_of_riemannian_model_has_full_interval() {
    let body = r#"
[model]
n = 3
[model.phi]
kind = "riemannian"
lambda1 = [1.0]
"#;
    let cfg = parse_config(body).unwrap();
    let summary = cmd_construct(&cfg).unwrap();
    for iv in &summary.intervals {
        assert_eq!((iv.lo_over_b, iv.hi_over_b), (-1.0, 1.0));
    }
    assert!(summary.min_d1_rel > 0.0 && summary.min_d2_rel > 0.0);
    assert_eq!(summary.positivity_violations, 0);
}

#[test]
fn lambda3_sign_change_names_the_offending_value() {
    let body = r#"
[model]
n = 3
b_range = [0.5, 1.5]
[model.phi]
kind = "riemannian"
lambda3 = [1.0, -1.0]
"#;
    match parse_config(body) {
        Err(CliError::Data(m)) => assert!(m.contains("lambda3") && m.contains("b^2"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn normalized_config_round_trips() {
    for body in [EXAMPLE, UNICORN_C1_ZERO, COMPAT_CONTROL, INDEFINITE] {
        let cfg = parse_config(body).unwrap();
        let text = normalized_toml(&cfg).unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(normalized_toml(&again).unwrap(), text);
    }
    let text = normalized_toml(&RunConfig::example()).unwrap();
    assert_eq!(parse_config(&text).unwrap(), RunConfig::example());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            finsler_cli::load_config(&path).unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
