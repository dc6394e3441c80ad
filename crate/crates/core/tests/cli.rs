//! End-to-end runs of the `ptt-ldp` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ptt-ldp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ptt-ldp-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_round_trip_through_file() {
    let dir = scratch("params");
    let file = dir.join("p.json");
    let o = run(&[
        "params",
        "--epsilon",
        "1",
        "--eta",
        "2",
        "--family",
        "type-ii",
        "--output",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let from_flags = stdout(&run(&[
        "perturb",
        "--epsilon",
        "1",
        "--eta",
        "2",
        "--family",
        "type-ii",
        "--seed",
        "4",
        "--input",
        "/dev/null",
    ]));
    assert_eq!(from_flags, "input,output\n");
    let values = "0.1\n-0.9\n1\n";
    let a = stdout(&run_stdin(
        &[
            "perturb",
            "--epsilon",
            "1",
            "--eta",
            "2",
            "--family",
            "type-ii",
            "--seed",
            "4",
        ],
        values,
    ));
    let b = stdout(&run_stdin(
        &[
            "perturb",
            "--params-file",
            file.to_str().unwrap(),
            "--seed",
            "4",
        ],
        values,
    ));
    assert_eq!(a, b);
    let va = stdout(&run(&[
        "variance",
        "--epsilon",
        "1",
        "--eta",
        "2",
        "--family",
        "type-ii",
        "--attr",
        "0.5",
    ]));
    let vb = stdout(&run(&[
        "variance",
        "--params-file",
        file.to_str().unwrap(),
        "--attr",
        "0.5",
    ]));
    assert_eq!(va, vb);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["params", "--epsilon", "1", "--eta", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["params", "--epsilon", "-1", "--eta", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "simulate",
            "--mechanism",
            "duchi",
            "--epsilon",
            "1",
            "--n",
            "10",
            "--beta",
            "1.5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&[
            "perturb",
            "--mechanism",
            "duchi",
            "--epsilon",
            "1",
            "--input",
            "/no/such/file"
        ])
        .status
        .code(),
        Some(3)
    );
    assert_eq!(
        run(&["constants", "--output", "/no/such/dir/out.json"])
            .status
            .code(),
        Some(3)
    );
    let o = run_stdin(
        &["perturb", "--mechanism", "duchi", "--epsilon", "1"],
        "0.5\n0.2x\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("0.2x"), "{err}");
}

#[test]
fn invalid_eta_fails_before_output() {
    let dir = scratch("validation");
    let out = dir.join("out.csv");
    let o = run_stdin(
        &[
            "perturb",
            "--epsilon",
            "0.1",
            "--eta",
            "3",
            "--output",
            out.to_str().unwrap(),
        ],
        "0.5\n",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_echo_on_stderr() {
    let o = run(&["optimize", "--epsilon", "1.0986122886681098"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("Optimize") && err.contains("attr: 1.0"),
        "{err}"
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["eta0"].as_f64().unwrap() - 3.3553).abs() < 1e-4);
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn sweeps_emit_curve_csv() {
    for args in [
        vec![
            "variance",
            "--sweep",
            "eta",
            "--epsilon",
            "1",
            "--q",
            "0.75",
        ],
        vec!["variance", "--sweep", "epsilon", "--eta", "1.9"],
        vec!["crossover", "--attr", "0,0.5,1"],
        vec!["lower-bound", "--eta", "2"],
        vec!["lower-bound", "--epsilon", "0.1"],
        vec!["lower-bound"],
        vec!["compare", "--kind", "s1", "--a", "2.34", "--eta", "1.9"],
        vec!["compare", "--kind", "f1"],
        vec!["compare", "--eta", "1.9", "--family", "type-i"],
    ] {
        let text = stdout(&run(&args));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,series"), "{args:?}");
        let rows: Vec<&str> = lines.collect();
        assert!(!rows.is_empty(), "{args:?}");
        for r in rows {
            let f: Vec<&str> = r.split(',').collect();
            assert_eq!(f.len(), 3, "{args:?}: {r}");
            assert!(
                f[0].parse::<f64>().unwrap().is_finite()
                    && f[1].parse::<f64>().unwrap().is_finite()
            );
        }
    }
}

#[test]
fn feasibility_scan() {
    let text = stdout(&run(&["feasibility", "--grid", "1.9", "10", "2"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta,f1,f2,f3,f4,sys29,sys30");
    assert!(lines[1].starts_with("1.8999999999999999,") || lines[1].starts_with("1.9,"));
    assert!(lines[1].ends_with("true,false"));
    assert!(lines[2].starts_with("10,") && lines[2].ends_with("false,false"));
    assert_eq!(stdout(&run(&["feasibility"])).lines().count(), 201);
    assert_eq!(
        run(&["feasibility", "--grid", "0.5", "2", "10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn audit_reports_tight_ratio() {
    for args in [
        vec!["audit", "--epsilon", "1", "--eta", "2"],
        vec![
            "audit",
            "--epsilon",
            "1",
            "--preset",
            "optimal",
            "--q",
            "0.75",
        ],
        vec!["audit", "--mechanism", "duchi", "--epsilon", "1"],
    ] {
        let v: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
        assert_eq!(v["within"], serde_json::Value::Bool(true), "{args:?}");
        assert!((v["max_ratio"].as_f64().unwrap() - 1f64.exp()).abs() < 1e-9);
    }
}

#[test]
fn analysis_only_params_cannot_sample() {
    let o = run_stdin(
        &[
            "perturb",
            "--epsilon",
            "1",
            "--preset",
            "optimal",
            "--q",
            "0.75",
        ],
        "0.5\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let p: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "params",
        "--epsilon",
        "1",
        "--preset",
        "optimal",
        "--q",
        "0.75",
    ])))
    .unwrap();
    assert_eq!(p["analysis_only"], serde_json::Value::Bool(true));
}

#[test]
fn simulate_writes_table_and_fit() {
    let dir = scratch("simulate");
    let table = dir.join("table.csv");
    let fit = dir.join("fit.json");
    let o = run(&[
        "simulate",
        "--mechanism",
        "laplace",
        "--epsilon",
        "1",
        "--n",
        "100,1000,10000",
        "--trials",
        "10",
        "--distribution",
        "two-point:0.5",
        "--output",
        table.to_str().unwrap(),
        "--fit",
        fit.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.starts_with(
        "n,d,epsilon,mechanism,mean_abs_err,max_err,quantile_err,beta,trials,m_bound\n"
    ));
    assert_eq!(text.lines().count(), 4);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fit).unwrap()).unwrap();
    assert!(v["slope"].as_f64().unwrap() < 0.0);
    let leftovers = fs::read_dir(&dir).unwrap().count();
    assert_eq!(leftovers, 2);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn rescaled_perturbation() {
    let text = stdout(&run_stdin(
        &[
            "perturb",
            "--mechanism",
            "duchi",
            "--epsilon",
            "1",
            "--bounds",
            "0",
            "10",
            "--rescale-output",
        ],
        "value\n0\n5\n10\n",
    ));
    let atom = (1f64.exp() + 1.0) / (1f64.exp() - 1.0);
    for line in text.lines().skip(1) {
        let y: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let unit = (y - 5.0) / 5.0;
        assert!((unit.abs() - atom).abs() < 1e-12, "{line}");
    }
    assert_eq!(
        run_stdin(
            &[
                "perturb",
                "--mechanism",
                "duchi",
                "--epsilon",
                "1",
                "--bounds",
                "0",
                "10"
            ],
            "11\n"
        )
        .status
        .code(),
        Some(2)
    );
}
