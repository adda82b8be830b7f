use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdspectral")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn catalog_lists_families() {
    let rows = csv_rows(&stdout(&["catalog"]));
    assert_eq!(rows.len(), 8);
    let rows = csv_rows(&stdout(&["catalog", "--family", "split-queues"]));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "lambda,mu,alpha,beta");
    let v: Value = serde_json::from_str(&stdout(&["catalog", "--format", "json"])).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
}

#[test]
fn transition_values() {
    let text = stdout(&["transition", "--family", "constant-bilateral", "--lambda", "1", "--mu", "1", "--i", "0", "--j", "0", "--t", "1"]);
    assert!(text.starts_with("i,j,t,p,err,method\n"));
    let rows = csv_rows(&text);
    assert!((num(&rows[0][3]) - 0.308508).abs() < 1e-6);

    let rows = csv_rows(&stdout(&[
        "transition", "--family", "symmetric-bilateral", "--lambda", "1", "--mu", "2", "--i", "2", "--j", "2", "--t", "0",
    ]));
    assert!((num(&rows[0][3]) - 1.0).abs() < 1e-7);

    let text = stdout(&[
        "transition", "--family", "split-queues", "--lambda", "1", "--mu", "2", "--alpha", "3", "--beta", "4", "--i", "0",
        "--row", "-3", "-1", "--t", "1/2,1", "--check-oracle",
    ]);
    assert!(text.starts_with("i,j,t,p,err,method,oracle,delta\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][1], "-3");
    assert!(rows.iter().all(|r| num(&r[7]) < 1e-6));
}

#[test]
fn figure_one_current_is_negative_first() {
    let rows = csv_rows(&stdout(&[
        "current", "--family", "mm1-absorbing", "--lambda", "1", "--mu", "2", "--j", "0", "--n-range", "0", "3", "--t", "0,3",
    ]));
    let at = |n: &str, t: f64| rows.iter().find(|r| r[0] == n && num(&r[1]) == t).map(|r| num(&r[2])).unwrap();
    assert!(at("1", 3.0) < 0.0);
    // t = 0: λ_{n-1}δ_{0,n-1} − μ_nδ_{0,n}
    assert!((at("0", 0.0) + 2.0).abs() < 1e-9);
    assert!((at("1", 0.0) - 1.0).abs() < 1e-9);
    assert!(at("2", 0.0).abs() < 1e-9);
}

fn atoms(args: &[&str]) -> Vec<f64> {
    let mut full = vec!["spectral", "--grid", "3"];
    full.extend_from_slice(args);
    let v: Value = serde_json::from_str(&stdout(&full)).unwrap();
    v["atoms"].as_array().unwrap().iter().map(|a| a["location"].as_f64().unwrap()).collect()
}

#[test]
fn spectral_atoms() {
    let a = atoms(&["--family", "defect-case2", "--lambda", "1", "--mu", "2", "--lambda0", "1", "--mu0", "5"]);
    assert_eq!(a.len(), 2);
    assert!(a.iter().any(|x| x.abs() < 1e-12) && a.iter().any(|x| (x - 8.4).abs() < 1e-12));
    let a = atoms(&["--family", "defect-case2", "--lambda", "2", "--mu", "1", "--lambda0", "5", "--mu0", "1"]);
    assert_eq!(a.len(), 1);
    assert!((a[0] - 7.5).abs() < 1e-12);
    let a = atoms(&["--family", "split-queues", "--lambda", "1", "--mu", "5/2", "--alpha", "1", "--beta", "2"]);
    assert!(a.iter().any(|x| (x - 20.0 / 3.0).abs() < 1e-12));
    let v: Value = serde_json::from_str(&stdout(&[
        "spectral", "--family", "mm1-absorbing", "--lambda", "1", "--mu", "2", "--grid", "5",
    ]))
    .unwrap();
    assert_eq!(v["kind"], "measure");
    assert_eq!(v["pieces"][0]["x"].as_array().unwrap().len(), 5);
}

#[test]
fn classify_and_invariant() {
    let rows = csv_rows(&stdout(&["classify", "--family", "constant-bilateral", "--lambda", "1", "--mu", "1"]));
    assert_eq!(rows[0][1], "null-recurrent");
    let rows = csv_rows(&stdout(&[
        "invariant", "--family", "symmetric-bilateral", "--lambda", "1", "--mu", "2", "--window", "-2", "2",
    ]));
    let got: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    let want = [0.125, 0.25, 0.25, 0.125, 0.0625];
    assert!(got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
    assert_eq!(stdout(&["invariant", "--family", "constant-bilateral", "--lambda", "1", "--mu", "1"]), "none\n");
}

#[test]
fn verify_exit_codes() {
    let out = run(&["verify", "--family", "split-queues", "--lambda", "1", "--mu", "2", "--alpha", "3", "--beta", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--family", "mm1-absorbing", "--lambda", "1", "--mu", "2", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_all() {
    let out = run(&["verify", "--all", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_and_numerical_errors() {
    for args in [
        vec!["transition", "--family", "mm1-absorbing", "--lambda", "1", "--i", "0", "--j", "0", "--t", "1"],
        vec!["transition", "--family", "mm1-absorbing", "--lambda", "1", "--mu", "0", "--i", "0", "--j", "0", "--t", "1"],
        vec!["transition", "--family", "nope", "--lambda", "1", "--mu", "1", "--i", "0", "--j", "0", "--t", "1"],
        vec!["classify", "--family", "split-queues", "--lambda", "1", "--mu", "1", "--alpha", "1", "--beta", "1"],
        vec!["classify", "--family", "mm1-absorbing", "--lambda", "1", "--mu", "1", "--alpha", "2"],
        vec!["transition", "--family", "mm1-absorbing", "--lambda", "1/0", "--mu", "1", "--i", "0", "--j", "0", "--t", "1"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let out = run(&[
        "transition", "--family", "split-queues", "--lambda", "1/2", "--mu", "1/3", "--alpha", "13/5", "--beta", "1/10",
        "--i", "0", "--row", "-20", "20", "--t", "0", "--nodes", "16",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn output_is_reproducible() {
    let args = [
        "current", "--family", "defect-case1", "--lambda", "1", "--mu", "2", "--lambda0", "1", "--mu0", "5", "--j", "0",
        "--n-range", "-10", "10", "--t", "3,6,9", "--format", "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(run(&seq).stdout, a.stdout);
}

#[test]
fn help_lists_figure_commands() {
    let help = stdout(&["--help"]);
    for fig in ["Fig. 1(a)", "Fig. 2(a)", "Fig. 3(b)", "Fig. 4(d)", "Fig. 6(b)", "Fig. 7(d)"] {
        assert!(help.contains(fig), "{fig}");
    }
}
