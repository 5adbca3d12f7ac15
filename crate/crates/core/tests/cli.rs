//! End-to-end runs of the `gate-witness` binary.

use std::io::Write as _;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use gate_witness::cli::{Report, SweepResult};
use gate_witness::json::to_string_precise;
use gate_witness::verify::VerifySummary;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gate-witness"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn gate-witness");
    let mut pipe = child.stdin.take().expect("stdin");
    pipe.write_all(stdin.unwrap_or("").as_bytes()).expect("write stdin");
    drop(pipe);
    child.wait_with_output().expect("wait for gate-witness")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const DEPOLARIZING: &str = r#"{"gate": "cnot", "noise": {"type": "depolarizing", "p": 0.1}, "mode": "analytic"}"#;

#[test]
fn report_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.json", DEPOLARIZING);
    let out_path = dir.path().join("report.json");
    let out = run(
        &["report", "--config", &config, "--out", out_path.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("process fidelity bounds"));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(to_string_precise(&report).unwrap(), text);
    assert!((report.fidelity("F_zz->zz").unwrap().value - 0.925).abs() < 1e-12);
    assert!((report.bounds.process_fidelity_exact.unwrap() - 0.90625).abs() < 1e-12);
    assert!((report.bounds.process_bounds.lower - 0.85).abs() < 1e-12);
    assert!((report.bounds.process_bounds.upper - 0.925).abs() < 1e-12);
}

#[test]
fn report_from_stdin_honours_output_key() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-config.json");
    let config = format!(
        r#"{{"noise": {{"type": "ideal"}}, "output": {}}}"#,
        serde_json::to_string(target.to_str().unwrap()).unwrap()
    );
    let out = run(&["report"], Some(&config));
    assert_eq!(code(&out), 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert!(report.bounds.fidelities.iter().all(|f| (f.value - 1.0).abs() < 1e-12));
    assert!((report.bounds.concurrence_lower - 1.0).abs() < 1e-12);
}

#[test]
fn sampled_reports_are_byte_identical() {
    let args = ["report", "--shots", "100000", "--seed", "42"];
    let a = run(&args, Some(DEPOLARIZING));
    let b = run(&args, Some(DEPOLARIZING));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let report: Report = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.shots_per_input, Some(100000));
    assert_eq!(report.seed, Some(42));
    assert!(report.bounds.fidelities.iter().all(|f| f.std_error.is_some()));
    assert!(report.bounds.process_bounds_sigma.is_some() && report.bounds.process_bounds_pair_sigma.is_some());
    assert_eq!(report.counts.len(), report.bounds.fidelities.len() - 4);
    for table in &report.counts {
        assert!(table.inputs.iter().all(|i| i.counts.iter().sum::<u64>() == 100000));
    }
    let other_seed = run(&["report", "--shots", "100000", "--seed", "43"], Some(DEPOLARIZING));
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn config_errors_exit_with_usage_code() {
    let cases = [
        r#"{"noise": {"type": "ideal"}, "extra": true}"#,
        r#"{"noise": {"type": "depolarizing"}}"#,
        r#"{"noise": {"type": "ideal"}, "mode": "sampled"}"#,
        r#"{"noise": {"type": "ideal"}, "gate": [[1, 0], [0, 0]]}"#,
        "{",
    ];
    for config in cases {
        let out = run(&["report"], Some(config));
        assert_eq!(code(&out), 1, "{config}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(
        code(&run(&["report", "--config", "/nonexistent/scenario.json"], None)),
        1
    );
    assert_eq!(code(&run(&["report", "--shots", "0"], Some(DEPOLARIZING))), 1);
}

#[test]
fn argument_errors_exit_with_usage_code() {
    assert_eq!(code(&run(&["frobnicate"], None)), 1);
    assert_eq!(code(&run(&["verify-bounds"], None)), 1);
    assert_eq!(code(&run(&["verify-bounds", "--channels", "0"], None)), 1);
    assert_eq!(
        code(&run(&["verify-bounds", "--channels", "2", "--rank", "17"], None)),
        1
    );
    assert_eq!(code(&run(&["table", "--gate", "toffoli"], None)), 1);
    assert_eq!(code(&run(&["--help"], None)), 0);
    assert_eq!(code(&run(&["--version"], None)), 0);
}

#[test]
fn sweep_finds_capability_crossing() {
    let out = run(&["sweep", "--param-range", "0:0.4:41"], Some(DEPOLARIZING));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sweep: SweepResult = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sweep.parameter, "p");
    assert_eq!(sweep.rows.len(), 41);
    assert!(sweep.rows.windows(2).all(|w| w[0].value < w[1].value));
    let crossing = sweep.capability_crossing.unwrap();
    assert!((crossing - 1.0 / 3.0).abs() <= 0.01 + 1e-12);
}

#[test]
fn sweep_rejects_bad_ranges() {
    assert_eq!(
        code(&run(&["sweep", "--param-range", "0:0.4:1"], Some(DEPOLARIZING))),
        1
    );
    assert_eq!(
        code(&run(&["sweep", "--param-range", "zero:0.4:5"], Some(DEPOLARIZING))),
        1
    );
    assert_eq!(code(&run(&["sweep", "--param-range", "0:2:5"], Some(DEPOLARIZING))), 1);
    let ideal = r#"{"noise": {"type": "ideal"}}"#;
    assert_eq!(code(&run(&["sweep", "--param-range", "0:1:5"], Some(ideal))), 1);
}

#[test]
fn verify_bounds_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("summary.json");
    let out = run(
        &[
            "verify-bounds",
            "--channels",
            "200",
            "--seed",
            "7",
            "--rank",
            "4",
            "--out",
            out_path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: VerifySummary = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(summary.channels, 200);
    assert_eq!(summary.violations, 0);

    let single = run(
        &["verify-bounds", "--channels", "1", "--rank", "1", "--mix-identity"],
        None,
    );
    assert_eq!(code(&single), 0);
}

#[test]
fn table_renders_known_gates() {
    let cnot = run(&["table"], None);
    assert_eq!(code(&cnot), 0);
    let text = String::from_utf8(cnot.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split("  ").filter(|s| !s.is_empty()).map(str::trim).collect())
        .collect();
    assert_eq!(rows[0], ["X", "reverse CNOT", "reverse CNOT", "identity"]);
    assert_eq!(rows[1], ["Y", "entangle", "entangle", "CNOT"]);
    assert_eq!(rows[2], ["Z", "entangle", "entangle", "CNOT"]);

    let identity = String::from_utf8(run(&["table", "--gate", "identity"], None).stdout).unwrap();
    assert_eq!(identity.matches("identity").count(), 9);

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("swap.json");
    let swap = run(&["table", "--gate", "swap", "--out", json.to_str().unwrap()], None);
    assert_eq!(code(&swap), 0);
    assert_eq!(String::from_utf8(swap.stdout).unwrap().matches("other").count(), 9);
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(parsed["cells"].as_array().unwrap().len(), 9);
}
