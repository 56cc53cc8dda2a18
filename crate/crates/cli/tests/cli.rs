use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use wml_cli::Report;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wml(args: &[&str]) -> Output {
    wml_env(args, &[])
}

fn wml_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wml"));
    cmd.args(args)
        .current_dir(root())
        .env_remove("WML_THREADS")
        .env_remove("SOURCE_DATE_EPOCH");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Report {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is a report")
}

fn schema() -> Value {
    let text = std::fs::read_to_string(root().join("docs/report.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["classify", "--manifold", "no/such/file.toml"],
        &["classify"],
        &[
            "classify",
            "--preset",
            "euclidean-3",
            "--manifold",
            "manifolds/hyperbolic2.toml",
        ],
        &["classify", "--preset", "klein-bottle"],
        &["spectrum", "--preset", "euclidean-3", "--ball", "-1"],
        &["spectrum", "--preset", "euclidean-3"],
        &["spectrum", "--preset", "euclidean-3", "--ess", "4,2"],
        &[
            "spectrum",
            "--preset",
            "euclidean-3",
            "--ball",
            "1",
            "--gnuplot",
            "x.gp",
        ],
        &["simulate", "--preset", "euclidean-3", "--paths", "10"],
        &["simulate", "--preset", "euclidean-3", "--dt", "0.01"],
        &["reproduce", "bogus"],
    ];
    for args in cases {
        let o = wml(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty(), "{args:?} printed no message");
        assert!(o.stdout.is_empty(), "{args:?} printed a report");
    }
    let o = wml_env(&["classify", "--preset", "euclidean-3"], &[("WML_THREADS", "zero")]);
    assert_eq!(code(&o), 2);
    let o = wml_env(
        &["classify", "--preset", "euclidean-3"],
        &[("SOURCE_DATE_EPOCH", "yesterday")],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_manifold_documents_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("dim.toml", "dimension = 1\ng = \"r\"\n"),
        ("parse.toml", "dimension = 2\ng = \"sinh(r\"\n"),
        ("origin.toml", "dimension = 2\ng = \"1+r\"\n"),
        ("key.toml", "dimension = 2\ng = \"r\"\ncolour = \"red\"\n"),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let o = wml(&["classify", "--manifold", path.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn classify_verdicts() {
    let r = report(&wml(&["classify", "--manifold", "manifolds/hyperbolic2.toml"]));
    assert_eq!(r.results["stochastic_completeness"]["verdict"], "yes");
    assert_eq!(r.results["feller"]["verdict"], "yes");
    assert_eq!(r.manifold.as_ref().unwrap().g, "sinh(r)");
    let r = report(&wml(&["classify", "--preset", "exp-alpha-2-3"]));
    assert_eq!(r.results["stochastic_completeness"]["verdict"], "yes");
    assert_eq!(r.results["feller"]["verdict"], "no");
    let r = report(&wml(&["classify", "--manifold", "manifolds/growth3.toml"]));
    assert_eq!(r.results["stochastic_completeness"]["verdict"], "no");
    assert!(r.results["stochastic_completeness"]["u_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn spectrum_values_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l1.csv");
    let gp = dir.path().join("l1.gp");
    let r = report(&wml(&[
        "spectrum",
        "--preset",
        "euclidean-3",
        "--ball",
        "1,2",
        "--csv",
        csv.to_str().unwrap(),
        "--gnuplot",
        gp.to_str().unwrap(),
    ]));
    let pi2 = std::f64::consts::PI.powi(2);
    let l1 = r.results["ball"][0]["eigen"]["lambda1"].as_f64().unwrap();
    let l2 = r.results["ball"][1]["eigen"]["lambda1"].as_f64().unwrap();
    assert!((l1 - pi2).abs() < 1e-6, "{l1}");
    assert!((l2 - pi2 / 4.0).abs() < 1e-6, "{l2}");
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "domain,radius,lambda1");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ball,1,9.8696"));
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(csv.to_str().unwrap()));

    let r = report(&wml(&["spectrum", "--preset", "hyperbolic-2", "--ess", "1,2,4,8"]));
    let bottom = &r.results["ess"]["ess"]["bottom_estimate"];
    assert_eq!(bottom["kind"], "finite");
    assert!((bottom["value"].as_f64().unwrap() - 0.25).abs() < 1e-3, "{bottom}");
}

#[test]
fn simulate_growth_model_explodes_deterministically() {
    let args = [
        "simulate",
        "--preset",
        "exp-growth-2",
        "--paths",
        "10000",
        "--t-max",
        "1",
        "--seed",
        "7",
    ];
    let a = report(&wml(&args));
    assert!(a.results["explosion_fraction"].as_f64().unwrap() > 0.1, "{}", a.results);
    assert!(a.results["ci95_halfwidth"].as_f64().unwrap() > 0.0);
    assert_eq!(a.seed, Some(7));
    let b = report(&wml_env(&args, &[("WML_THREADS", "3")]));
    assert_eq!(
        serde_json::to_string(&a.results).unwrap(),
        serde_json::to_string(&b.results).unwrap()
    );
}

#[test]
fn trace_file_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("paths.csv");
    let r = report(&wml(&[
        "simulate",
        "--preset",
        "euclidean-2",
        "--paths",
        "100",
        "--t-max",
        "0.01",
        "--trace",
        trace.to_str().unwrap(),
        "--trace-paths",
        "2",
    ]));
    assert_eq!(r.results["n_effective"], 100);
    let body = std::fs::read_to_string(&trace).unwrap();
    let mut rows = body.lines();
    assert_eq!(rows.next(), Some("path,t,r"));
    let paths: std::collections::BTreeSet<&str> = rows.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(paths.into_iter().collect::<Vec<_>>(), ["0", "1"]);
}

#[test]
fn timestamp_follows_source_date_epoch() {
    let o = wml_env(&["classify", "--preset", "euclidean-2"], &[("SOURCE_DATE_EPOCH", "0")]);
    assert_eq!(report(&o).timestamp, "1970-01-01T00:00:00Z");
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = wml(&["classify", "--preset", "euclidean-2", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.command, "classify");
}

#[test]
fn reports_validate_against_the_published_schema() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let outputs = [
        wml(&["classify", "--preset", "hyperbolic-3"]),
        wml(&["spectrum", "--preset", "euclidean-2", "--ball", "1", "--exterior", "1"]),
        wml(&[
            "simulate",
            "--preset",
            "euclidean-3",
            "--paths",
            "200",
            "--t-max",
            "0.2",
            "--hit",
            "1",
            "--r0",
            "2",
        ]),
        wml(&["reproduce", "soliton-audit"]),
    ];
    for o in &outputs {
        let value: Value = serde_json::from_slice(&o.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
        // serialize → validate → parse is lossless
        let parsed: Report = serde_json::from_value(value.clone()).unwrap();
        assert_eq!(serde_json::to_value(&parsed).unwrap(), value);
        assert_eq!(parsed.schema_version, wml_cli::SCHEMA_VERSION);
    }
    let mut broken: Value = serde_json::from_slice(&outputs[0].stdout).unwrap();
    broken["schema_version"] = "0.9".into();
    assert!(!validator.is_valid(&broken));
}

#[test]
fn reproduce_tables_pass() {
    let r = report(&wml(&["reproduce", "feller-alpha-table"]));
    let t = &r.results["tables"][0];
    assert_eq!(t["cells"].as_array().unwrap().len(), 12);
    assert_eq!(t["failed"], 0);
    assert_eq!(r.results["all_pass"], true);
    let r = report(&wml(&["reproduce", "soliton-audit"]));
    assert_eq!(r.results["tables"][0]["failed"], 0);
}

fn golden(name: &str, args: &[&str]) {
    let r = report(&wml(args));
    let got = serde_json::to_string_pretty(&r.results).unwrap() + "\n";
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(got, want, "{name} drifted; rerun with UPDATE_GOLDEN=1 if intended");
}

#[test]
fn golden_payloads() {
    golden(
        "classify_hyperbolic2.json",
        &["classify", "--manifold", "manifolds/hyperbolic2.toml"],
    );
    golden(
        "spectrum_euclidean3.json",
        &["spectrum", "--preset", "euclidean-3", "--ball", "1", "--exterior", "2"],
    );
    golden(
        "simulate_growth2.json",
        &[
            "simulate",
            "--preset",
            "exp-growth-2",
            "--paths",
            "500",
            "--t-max",
            "0.5",
            "--seed",
            "11",
        ],
    );
}
