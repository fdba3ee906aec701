use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SAMPLE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../core/examples/molecule_toy.scn"
);

fn wignerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .args(args)
        .env_remove("WIGNERLAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn temp_scn(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".scn").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn molecule_contradiction_exits_two() {
    let o = wignerlab(&[
        "check",
        "molecule_toy",
        "--policies",
        "unitary_only,collapse_at:F",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 2);
    let r = json(&o);
    let c = &r["checks"][0];
    assert!((c["gap"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(c["verdict"], "CONTRADICTION");
    let preds = c["predictions"].as_array().unwrap();
    for p in preds {
        let want = if p["policy"] == "unitary_only" {
            1.0
        } else {
            0.5
        };
        assert!(
            (p["probability"].as_f64().unwrap() - want).abs() < 1e-9,
            "{p}"
        );
    }
    let fictional = &preds[0]["fictional"];
    assert_eq!(fictional["label"], "FICTIONAL");
    assert_eq!(fictional["cut"], "collapse_at:F");
    assert!((fictional["probability"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn single_policy_is_consistent() {
    let o = wignerlab(&[
        "check",
        "epr_bell",
        "--theta",
        "0",
        "--policies",
        "collapse_at:Alice,Bob",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn definability_mismatch_exits_two() {
    let o = wignerlab(&["check", "epr_bell", "--theta", "1", "--format", "json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["checks"][0]["verdict"], "DEFINABILITY_MISMATCH");
}

#[test]
fn missing_file_exits_one() {
    let o = wignerlab(&["check", "nosuch.scn"]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("nosuch.scn"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["check"][..],
        &["check", "molecule_toy", "--bogus"],
        &["check", "molecule_toy", "--tol", "0"],
        &["check", "molecule_toy", "-p", "collapse_at:Nobody"],
        &["check", "molecule_toy", "-p", "sometimes"],
        &["run", "molecule_toy", "--runs", "0"],
        &["check", "decoherence_demo", "--n-env", "11"],
        &["frobnicate"],
    ] {
        let o = wignerlab(args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(code(&wignerlab(&["--help"])), 0);
}

#[test]
fn tolerance_override() {
    let o = wignerlab(&["check", "molecule_toy", "--tol", "0.6", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"][0]["tol"], 0.6);
}

fn excited(r: &Value, policy: &str) -> (u64, f64) {
    let section = r["monte_carlo"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["policy"] == policy)
        .unwrap();
    let one = section["checks"][0]["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["outcome"] == "1");
    one.map_or((0, 0.0), |o| {
        (
            o["count"].as_u64().unwrap(),
            o["frequency"].as_f64().unwrap(),
        )
    })
}

#[test]
fn photon_every_run_without_collapse() {
    let o = wignerlab(&[
        "run",
        "molecule_toy",
        "--policy",
        "unitary_only",
        "--runs",
        "1000",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(excited(&json(&o), "unitary_only").0, 1000);
}

#[test]
fn photon_half_the_time_with_collapse() {
    let o = wignerlab(&[
        "run",
        "molecule_toy",
        "--policy",
        "collapse_at:F",
        "--runs",
        "10000",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let (_, f) = excited(&json(&o), "collapse_at:F");
    assert!((0.485..=0.515).contains(&f), "{f}");
}

#[test]
fn reports_are_byte_identical() {
    let args = [
        "run",
        "decoherence_demo",
        "-p",
        "unitary_only,collapse_at:F,W",
        "--runs",
        "500",
        "--seed",
        "99",
        "--format",
        "json",
    ];
    let a = wignerlab(&args);
    let b = wignerlab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = wignerlab(&[
        "run",
        "decoherence_demo",
        "-p",
        "unitary_only,collapse_at:F,W",
        "--runs",
        "500",
        "--seed",
        "100",
        "--format",
        "json",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_wignerlab"));
        cmd.args([
            "run",
            "molecule_toy",
            "-p",
            "collapse_at:F",
            "--runs",
            "50",
            "--format",
            "json",
        ])
        .args(extra);
        match env {
            Some(v) => cmd.env("WIGNERLAB_SEED", v),
            None => cmd.env_remove("WIGNERLAB_SEED"),
        };
        cmd.output().unwrap()
    };
    let from_env = json(&run(Some("123"), &[]));
    assert_eq!(from_env["seed"], 123);
    assert_eq!(from_env, json(&run(None, &["--seed", "123"])));
    assert_eq!(json(&run(Some("123"), &["--seed", "5"]))["seed"], 5);
    assert_eq!(json(&run(None, &[]))["seed"], 7);
}

#[test]
fn reports_match_schema() {
    let v = schema();
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "molecule_toy"],
        vec!["check", "wigners_friend"],
        vec![
            "check",
            "epr_bell",
            "--theta",
            "0.7",
            "-p",
            "unitary_only,collapse_at:Alice,collapse_at:Alice,Bob",
        ],
        vec!["check", "decoherence_demo", "--n-env", "2", "--runs", "20"],
        vec!["run", "molecule_toy", "--runs", "150"],
        vec![
            "run",
            "decoherence_demo",
            "--runs",
            "1",
            "-p",
            "collapse_at:W",
        ],
        vec!["check", SAMPLE],
    ];
    for mut args in cases {
        args.extend(["--format", "json"]);
        let o = wignerlab(&args);
        assert!(code(&o) == 0 || code(&o) == 2, "{args:?}: {}", stderr(&o));
        let r = json(&o);
        let errors: Vec<String> = v
            .iter_errors(&r)
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        assert!(errors.is_empty(), "{args:?}: {errors:#?}");
        let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
        assert!(keys.iter().all(
            |k| ["scenario", "policies", "seed", "checks", "monte_carlo"].contains(&k.as_str())
        ));
    }
    assert!(!v.is_valid(&serde_json::json!({"scenario": "x"})));
}

#[test]
fn json_field_order_is_fixed() {
    let o = wignerlab(&["check", "molecule_toy", "--format", "json"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(
        pos("scenario") < pos("policies")
            && pos("policies") < pos("seed")
            && pos("seed") < pos("checks")
    );
    assert!(text.contains("\"tol\": 1.0000000000000001e-09"));
}

#[test]
fn parse_prints_canonical_text() {
    let o = wignerlab(&["parse", SAMPLE]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        std::fs::read_to_string(SAMPLE).unwrap()
    );

    let messy = temp_scn("# comment\nSCENARIO  molecule_toy\nSYSTEM A dim=2\nSYSTEM B dim=2\nSYSTEM C dim=2\nAGENT F observes A,B,C\nAGENT W observes A B C\nSTATE A 0.70710678118654752|0> + 0.70710678118654752|1>\nSTATE B |0>\nSTATE C |0>\nEVENT unitary CORRELATE A B\nEVENT measure F targets=A,B record=mF basis=computational\nEVENT measure W basis=bell targets=A,B record=mW\nEVENT signal when mW==PhiPlus apply FLIP C\nCHECK outcome C==1 basis=computational agents=F,W tol=1e-9 # done\n");
    let o = wignerlab(&["parse", messy.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        std::fs::read_to_string(SAMPLE).unwrap()
    );
}

#[test]
fn parse_reports_every_bad_line() {
    let f = temp_scn("SCENARIO t\nSYSTEM A dim=2\nEVENT mesure F\nSTATE A |0>\nAGENT F watches A\nCHECK outcome A=0 agents=F\n");
    let path = f.path().to_str().unwrap();
    let o = wignerlab(&["parse", path]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    let diags: Vec<&str> = err
        .lines()
        .filter(|l| l.starts_with(&format!("{path}:")))
        .collect();
    assert!(diags.len() >= 3, "{err}");
    for line in [3, 5, 6] {
        assert!(
            diags
                .iter()
                .any(|d| d.starts_with(&format!("{path}:{line}:"))),
            "{err}"
        );
    }
    assert!(
        err.contains(&format!("{path}:3:7: unknown event kind `mesure`")),
        "{err}"
    );
}

#[test]
fn empty_file_lacks_header() {
    let f = temp_scn("");
    let o = wignerlab(&["parse", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing SCENARIO header"));
}

#[test]
fn scenario_files_drive_check() {
    let o = wignerlab(&["check", SAMPLE, "-p", "unitary_only,collapse_at:F"]);
    assert_eq!(code(&o), 2);
    let f = temp_scn("SCENARIO t\nSYSTEM A dim=2\nSTATE A |0> + |1>\n");
    let o = wignerlab(&["check", f.path().to_str().unwrap(), "-p", "unitary_only"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning:"));
}

#[test]
fn list_names_every_builtin() {
    let o = wignerlab(&["list", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        [
            "epr_bell",
            "wigners_friend",
            "molecule_toy",
            "decoherence_demo"
        ]
    );
    let text = wignerlab(&["list"]);
    assert_eq!(String::from_utf8(text.stdout).unwrap().lines().count(), 4);
}
