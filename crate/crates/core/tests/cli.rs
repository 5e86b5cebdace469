use std::fs;
use std::process::Command;

fn pinchisac() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pinchisac"))
}

#[test]
fn case_study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("case.csv");
    let status = pinchisac()
        .args(["case-study", "--case", "1", "--gammas", "0,2", "--threads", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "case,radar_snr_requirement,algorithm,rate,radar_snr,feasible,solve_time_s,sca_iterations,positions"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,0.0,pinching,"));
    assert!(lines[2].starts_with("1,0.0,exhaustive,"));
}

#[test]
fn detector_oracle_prints_json() {
    let out =
        pinchisac().args(["oracle", "--kind", "detector", "--trials", "20000", "--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
    for r in rows.as_array().unwrap() {
        let (v, reference) = (r["value"].as_f64().unwrap(), r["reference"].as_f64().unwrap());
        assert!((v - reference).abs() < 0.03);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "p_max_watts = -3.0\n").unwrap();
    let code = |args: &[&str]| pinchisac().args(args).output().unwrap().status.code();

    assert_eq!(code(&["--config", bad.to_str().unwrap(), "monte-carlo", "--trials", "1"]), Some(2));
    assert_eq!(code(&["--config", "/nonexistent/scenario.toml", "monte-carlo"]), Some(2));
    assert_eq!(code(&["sweep", "--axis", "gamma"]), Some(2));
    assert_eq!(code(&["sweep", "--axis", "num-tx", "--values", "2,2.5", "--trials", "1"]), Some(2));

    let hopeless = dir.path().join("hopeless.toml");
    fs::write(&hopeless, "radar_snr_requirement = 1e6\nplacement = \"fixed\"\n").unwrap();
    assert_eq!(code(&["--config", hopeless.to_str().unwrap(), "monte-carlo", "--trials", "1"]), Some(3));
}

#[test]
fn selftest_passes() {
    let out = pinchisac().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
