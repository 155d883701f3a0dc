//! The `weakconv` binary against the bundled scenario files.

use std::path::PathBuf;
use std::process::{Command, Output};

use weakconv::cli::{RunReport, ScenarioFile};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn weakconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakconv"))
        .args(args)
        .env_remove("WEAKCONV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    weakconv(args).status.code().expect("exit code")
}

fn file_arg(name: &str) -> String {
    scenario(name).to_string_lossy().into_owned()
}

#[test]
fn certify_exit_codes_follow_status() {
    assert_eq!(code(&["certify", &file_arg("dirac_drift.json")]), 0);
    assert_eq!(code(&["certify", &file_arg("alternating.json")]), 1);
    assert_eq!(code(&["certify", &file_arg("slow_short.json")]), 2);
    assert_eq!(code(&["certify", &file_arg("explicit_sequence.json")]), 0);
    assert_eq!(code(&["certify", &file_arg("escape.json")]), 1);
}

#[test]
fn flags_override_the_file() {
    // the slow drift reaches tolerance with a longer prefix and a looser tol
    assert_eq!(code(&["certify", "--n", "64", "--tol", "0.2", &file_arg("slow_short.json")]), 0);
}

#[test]
fn scenario_run_reports_agreement() {
    for name in ["dirac_drift.json", "alternating.json", "escape.json"] {
        assert_eq!(code(&["scenario", "run", &file_arg(name)]), 0, "{name}");
    }
}

#[test]
fn integrate_certifies_continuous_functions_only() {
    let out = weakconv(&["integrate", &file_arg("integrate_identity.json")]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = csv.lines().last().unwrap();
    let value: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 0.62).abs() <= 2f64.powi(-8));
    assert_eq!(code(&["integrate", &file_arg("integrate_constant.json")]), 0);
    assert_eq!(code(&["integrate", &file_arg("integrate_step.json")]), 1);
}

#[test]
fn bl_prints_nine_decimals() {
    let out = weakconv(&["bl", &file_arg("bl.json")]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.250000000\n");
    let out = weakconv(&[
        "bl",
        "--mu",
        r#"{"atoms":[{"point":[0.0],"weight":0.5},{"point":[1.0],"weight":0.5}]}"#,
        "--nu",
        r#"{"atoms":[{"point":[0.0],"weight":1}]}"#,
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.500000000\n");
}

#[test]
fn errors_map_to_documented_codes() {
    assert_eq!(code(&["certify", "/nonexistent/file.json"]), 64);
    assert_eq!(code(&["bogus"]), 64);
    let unnormalized = r#"{"atoms":[{"point":[0.5],"weight":3}]}"#;
    assert_eq!(code(&["bl", "--mu", unnormalized, "--nu", unnormalized]), 64);
    assert_eq!(code(&["bl", "--normalize", "--mu", unnormalized, "--nu", unnormalized]), 0);
    let wide: Vec<String> = (0..201).map(|i| format!(r#"{{"point":[{}],"weight":1}}"#, i as f64 / 201.0)).collect();
    let wide = format!(r#"{{"atoms":[{}]}}"#, wide.join(","));
    assert_eq!(code(&["bl", "--normalize", "--mu", &wide, "--nu", &wide]), 65);
}

#[test]
fn report_echoes_effective_config_and_is_deterministic() {
    let dir = std::env::temp_dir().join(format!("weakconv-cli-{}", std::process::id()));
    let args = ["certify", "--seed", "5", "--out", dir.to_str().unwrap(), &file_arg("dirac_drift.json")];
    let first = weakconv(&args);
    let report_path = dir.join("report.json");
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.config.run.seed, Some(5));
    assert_eq!(report.config.run.n, Some(64));
    assert!(dir.join("diagnostics.csv").exists());

    // the echoed config runs to the same result
    let echoed = dir.join("echo.json");
    std::fs::write(&echoed, serde_json::to_string(&report.config).unwrap()).unwrap();
    let again = weakconv(&["certify", echoed.to_str().unwrap()]);
    assert_eq!(first.status.code(), again.status.code());
    let parsed = ScenarioFile::parse(&std::fs::read_to_string(&echoed).unwrap()).unwrap();
    assert_eq!(parsed, report.config);

    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.contains("wall_clock_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&first), strip(&weakconv(&args)));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_passes() {
    let out = weakconv(&["selftest", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("overall pass"));
    assert!(text.lines().any(|l| l.starts_with("wall_clock_ms")));
}
