use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn pubgood(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pubgood"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn clique_price_for_ten() {
    let v = json(&pubgood(&[
        "price",
        "--setting",
        "clique",
        "--n",
        "10",
        "--dist",
        "uniform:0,1",
    ]));
    let p = v["price"].as_f64().unwrap();
    assert!((p - 0.9f64.powi(10)).abs() < 1e-12, "{p}");
    assert_eq!((p * 1e5).round(), 34868.0);
    assert_eq!(v["setting"]["kind"], "clique");
}

#[test]
fn missing_graph_is_a_parse_error() {
    let out = pubgood(&[
        "eq",
        "--graph",
        "does-not-exist.json",
        "--dist",
        "uniform:0,1",
        "--price",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[parse]:"));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(pubgood(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(pubgood(&["price", "--setting", "clique"]).status.code(), Some(1));
    assert_eq!(
        pubgood(&["price", "--setting", "clique", "--n", "5", "--dist", "weird:1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn pentagon_gap_table() {
    let out = pubgood(&["repro", "pentagon-gap", "--N", "100", "--p", "0.5"]);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let row = &v["rows"][0];
    let p: f64 = 0.5;
    assert!((row["revenue_cycle"].as_f64().unwrap() - 5.0 * p * (1.0 - p.cbrt())).abs() < 1e-12);
    assert!((row["revenue_copies"].as_f64().unwrap() - 102.0 * p * (1.0 - p)).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS pentagon-gap"));
}

#[test]
fn repro_is_deterministic_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = pubgood(&[
            "repro",
            "clique-worst",
            "--n",
            "6",
            "--trials",
            "50",
            "--seed",
            "3",
            "--format",
            "csv",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("n,price,samples,min_revenue,min_ratio\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn generate_solve_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (g, rep, csv) = (path("g.json"), path("rep.json"), path("trials.csv"));
    assert!(pubgood(&["gen", "--kind", "cycle", "--n", "7", "--out", &g])
        .status
        .success());
    assert!(pubgood(&["eq", "--graph", &g, "--price", "0.4", "--out", &rep])
        .status
        .success());
    let report: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["thresholds"]["status"], "verified");
    let closed = report["expected_revenue"].as_f64().unwrap();

    // The report itself is accepted as a threshold file and re-verifies.
    let again = json(&pubgood(&["eq", "--graph", &g, "--price", "0.4", "--thresholds", &rep]));
    assert_eq!(again["expected_revenue"].as_f64().unwrap(), closed);

    let sim = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_pubgood"))
            .env("PUBGOOD_WORKERS", workers)
            .args([
                "sim",
                "--graph",
                &g,
                "--thresholds",
                &rep,
                "--price",
                "0.4",
                "--trials",
                "20000",
                "--seed",
                "7",
            ])
            .args(["--csv", &csv, "--keep", "5"])
            .output()
            .unwrap();
        json(&out)
    };
    let one = sim("1");
    let four = sim("4");
    assert_eq!(one, four);
    let mean = one["mean_revenue"].as_f64().unwrap();
    assert!((mean - closed).abs() <= 4.0 * one["stderr"].as_f64().unwrap());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 6);
}

#[test]
fn rejected_profile_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let t = dir.path().join("t.json");
    assert!(
        pubgood(&["gen", "--kind", "clique", "--n", "3", "--out", g.to_str().unwrap()])
            .status
            .success()
    );
    fs::write(&t, "[0.9, 0.9, 0.9]").unwrap();
    let out = pubgood(&[
        "eq",
        "--graph",
        g.to_str().unwrap(),
        "--price",
        "0.5",
        "--thresholds",
        t.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[validation]:"));
    // 0.5^(1/3) on every node is the symmetric equilibrium.
    let c = 0.5f64.cbrt();
    fs::write(&t, format!("[{c}, {c}, {c}]")).unwrap();
    let ok = pubgood(&[
        "eq",
        "--graph",
        g.to_str().unwrap(),
        "--price",
        "0.5",
        "--thresholds",
        t.to_str().unwrap(),
    ]);
    let v = json(&ok);
    assert!(v["annotations"][0]["name"] == "myerson_bound");
}

#[test]
fn hardness_and_seq_clique() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    fs::write(&cnf, "c one clause\np cnf 1 1\n1 1 1 0\n").unwrap();
    let v = json(&pubgood(&["hardness", "--cnf", cnf.to_str().unwrap(), "--L", "1"]));
    assert_eq!(v["verdict"], "low");
    assert!((v["min_sum_x"].as_f64().unwrap() - 3.0).abs() < 1e-7);

    let s = json(&pubgood(&["seq-clique", "--n", "2"]));
    assert_eq!(s["prices"][0].as_f64().unwrap(), 0.375);
    assert_eq!(s["revenue"].as_f64().unwrap(), 9.0 / 32.0);
}
