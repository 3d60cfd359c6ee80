use std::path::PathBuf;
use std::process::Command;

use frachq::cli::run;

fn golden(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(p).unwrap()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("frachq").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

const GOLDEN_RUNS: &[(&str, &[&str])] = &[
    (
        "kernel_half.csv",
        &["kernel", "--alpha", "0.5", "--t", "1", "--s-start", "0", "--s-stop", "5", "--s-count", "11"],
    ),
    ("oscillator_half.csv", &["oscillator", "--alpha", "0.5", "--t-start", "0", "--t-stop", "5", "--t-count", "11"]),
    ("free_default.csv", &["free", "--x0", "0", "--p0", "1", "--t-start", "0", "--t-stop", "2", "--t-count", "5"]),
    (
        "qubit_observable.csv",
        &["matrix-evolve", "--preset", "qubit", "--alpha", "0.5", "--t-start", "0", "--t-stop", "2", "--t-count", "5"],
    ),
];

#[test]
fn golden_csv_is_reproduced_under_any_thread_count() {
    for (file, args) in GOLDEN_RUNS {
        let want = golden(file);
        for threads in ["1", "3"] {
            let mut a = args.to_vec();
            a.extend(["--threads", threads]);
            assert_eq!(ok(&a), want, "{file} with {threads} threads");
        }
    }
}

#[test]
fn kernel_examples() {
    let out = ok(&["kernel", "--alpha", "0.5", "--t", "1", "--s-start", "0", "--s-stop", "1", "--s-count", "2"]);
    assert_eq!(out, "s,f\n0.0,0.0\n1.0,0.219695645\n");
    let (code, out, err) = call(&["kernel", "--alpha", "1.5"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("0 < alpha <= 1"), "{err}");
}

#[test]
fn oscillator_row_at_unit_time() {
    let out = ok(&["oscillator", "--alpha", "0.5", "--t-start", "1", "--t-stop", "1", "--t-count", "1"]);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 0.3748529).abs() < 1e-6 && (row[2] - 0.3203156).abs() < 1e-6);
    assert!((row[6] - 0.121561).abs() < 1e-5);
}

#[test]
fn classical_oscillator_is_periodic() {
    let stop = format!("{}", 2.0 * std::f64::consts::PI);
    let out = ok(&["oscillator", "--alpha", "1", "--t-start", "0", "--t-stop", &stop, "--t-count", "3"]);
    let last: Vec<f64> = out.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 1.0).abs() < 1e-9);
}

#[test]
fn free_particle_modes() {
    let out = ok(&["free", "--mode", "paper-half", "--t-start", "2", "--t-stop", "2", "--t-count", "1"]);
    assert!(out.lines().nth(1).unwrap().starts_with("2.0,2.0,"));
    let out = ok(&["free", "--x0", "0", "--p0", "1", "--t-start", "1", "--t-stop", "1", "--t-count", "1"]);
    let cells: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(cells[2], "-0.5");
    let out = ok(&[
        "free",
        "--mode",
        "truncated-numeric",
        "--s-max",
        "1e6",
        "--t-start",
        "1",
        "--t-stop",
        "1",
        "--t-count",
        "1",
    ]);
    assert!(out.contains("divergent;s_max="), "{out}");
    let (code, _, _) = call(&["free", "--alpha", "0.3", "--mode", "paper-half"]);
    assert_eq!(code, 2);
}

#[test]
fn density_role_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let rho = dir.path().join("rho.json");
    let bad = dir.path().join("bad.json");
    std::fs::write(&h, r#"{"dim": 2, "re": [[0.5, 0.0], [0.0, -0.5]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    std::fs::write(&rho, r#"{"dim": 2, "re": [[0.7, 0.0], [0.0, 0.3]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    std::fs::write(&bad, r#"{"dim": 2, "re": [[0.0, 1.0], [0.0, 0.0]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let (h, rho, bad) = (h.to_str().unwrap(), rho.to_str().unwrap(), bad.to_str().unwrap());

    let out = ok(&["density-evolve", "--hamiltonian", h, "--density", rho, "--t-count", "3"]);
    for line in out.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!((v[1], v[3], v[7]), (0.7, 0.0, 0.3));
        assert_eq!(v[9], 1.0);
    }
    let (code, out, _) = call(&["matrix-evolve", "--hamiltonian", bad, "--observable", rho]);
    assert_eq!((code, out.as_str()), (2, ""));
    let (code, _, _) = call(&["density-evolve", "--hamiltonian", h, "--density", bad]);
    assert_eq!(code, 2);
}

#[test]
fn qubit_preset_matches_envelope_combination() {
    let out = ok(&[
        "matrix-evolve",
        "--preset",
        "qubit",
        "--t-start",
        "1",
        "--t-stop",
        "1",
        "--t-count",
        "1",
        "--method",
        "subordination",
    ]);
    let v: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // C σ_x - S σ_y has (0,1) entry C + iS.
    assert!((v[3] - 0.3748529).abs() < 1e-6 && (v[4] - 0.3203156).abs() < 1e-6);
    assert!((v[5] - 0.3748529).abs() < 1e-6 && (v[6] + 0.3203156).abs() < 1e-6);
}

#[test]
fn json_and_svg_outputs() {
    let json = ok(&["oscillator", "--t-count", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["rows"][0]["C"], 1.0);

    let svg = ok(&["oscillator", "--t-count", "6", "--format", "svg"]);
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 6);
    for col in ["C", "S", "mean_q", "mean_p", "D_Q", "D_P"] {
        assert!(svg.contains(&format!("data-column=\"{col}\"")));
    }

    let m = ok(&["matrix-evolve", "--preset", "qubit", "--t-count", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&m).unwrap();
    assert_eq!(v["steps"][0]["re"][0][1], 1.0);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# envelope run\nalpha = 0.3\nt_count = 2\nt-stop = 1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = ok(&["oscillator", "--config", cfg]);
    let explicit = ok(&["oscillator", "--alpha", "0.3", "--t-count", "2", "--t-stop", "1"]);
    assert_eq!(from_file, explicit);
    let flagged = ok(&["oscillator", "--config", cfg, "--alpha", "0.5"]);
    let half = ok(&["oscillator", "--alpha", "0.5", "--t-count", "2", "--t-stop", "1"]);
    assert_eq!(flagged, half);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "alpha = 0.3\ncolour = red\n").unwrap();
    let (code, out, err) = call(&["oscillator", "--config", bad.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (2, ""));
    assert!(err.contains("colour"));
}

#[test]
fn failed_run_leaves_output_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = out.to_str().unwrap();
    let (code, _, _) = call(&["oscillator", "--alpha", "2", "--out", o]);
    assert_eq!(code, 2);
    assert!(!out.exists());
    assert_eq!(call(&["oscillator", "--t-count", "2", "--out", o]).0, 0);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("t,C,S"));
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        &["oscillator", "--t-count", "0"][..],
        &["oscillator", "--omega", "-1"],
        &["oscillator", "--format", "xml"],
        &["oscillator", "--t-start", "3", "--t-stop", "1"],
        &["kernel", "--alpha", "1"],
        &["verify", "--level", "medium"],
        &["oscillator", "--bogus"],
    ] {
        let (code, out, err) = call(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty(), "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn binary_quick_verify() {
    let o = Command::new(env!("CARGO_BIN_EXE_frachq")).args(["verify", "--level", "quick"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_frachq")).args(["kernel", "--alpha", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}
