use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn sqvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqvar"))
        .args(args)
        .env_remove("SQVAR_RANK_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit status")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn d(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn certify_first_and_second_order_pass() {
    let out = sqvar(&[
        "certify",
        "--formulation",
        "dss_sym",
        "--problem",
        &d("ex2_2.json"),
        "--point",
        &d("F_diag_1_m1.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["formulation"], "DSS_SYM");

    let out = sqvar(&[
        "certify",
        "--formulation",
        "dss_sym",
        "--problem",
        &d("exB_1.json"),
        "--point",
        &d("F_swap.json"),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn refuted_point_exits_three_with_witness() {
    let out = sqvar(&[
        "certify",
        "--formulation",
        "bc",
        "--problem",
        &d("ex2_2.json"),
        "--point",
        &d("X_identity.json"),
    ]);
    assert_eq!(code(&out), 3);
    let r = json(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(r["first_order"]["pass"], true);
    let w = num(&r["second_order"]["witness"]["value"]);
    assert!((w + 1.0).abs() < 1e-10, "witness value {w}");
}

#[test]
fn first_order_only_certification() {
    let out = sqvar(&[
        "certify",
        "--formulation",
        "bc",
        "--order",
        "1",
        "--problem",
        &d("ex2_2.json"),
        "--point",
        &d("X_identity.json"),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["second_order"]["status"], "not_requested");
}

#[test]
fn slack_formulations_certify() {
    let out = sqvar(&[
        "certify",
        "--formulation",
        "ssv_sym",
        "--problem",
        &d("ex3_1.json"),
        "--point",
        &d("ex3_1_triple.json"),
    ]);
    assert_eq!(code(&out), 0);
    let out = sqvar(&[
        "certify",
        "--formulation",
        "nsdp",
        "--problem",
        &d("ex3_1.json"),
        "--point",
        &d("ex3_1_minimizer.json"),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let broken = write(&tmp, "broken.json", "{\"X\": [[1, 2], [3");
    let cases: Vec<Vec<String>> = vec![
        // malformed JSON
        vec![
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            &broken,
        ],
        // missing file
        vec![
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            "/nonexistent/point.json",
        ],
        // point keys of another formulation
        vec![
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            &d("F_swap.json"),
        ],
        // unknown formulation
        vec![
            "certify",
            "--formulation",
            "xyz",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            &d("X_identity.json"),
        ],
        // nonpositive tolerance
        vec![
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            &d("X_identity.json"),
            "--tol-feas=-1",
        ],
        // second order is not defined for the nuclear-norm certificate
        vec![
            "certify",
            "--formulation",
            "nnm",
            "--problem",
            &d("sensing_8x6.json"),
            "--point",
            &d("X_identity.json"),
        ],
        // missing argument
        vec![
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
        ],
        vec!["reproduce", "ex9.9"],
        vec![
            "solve",
            "--method",
            "dss_sym",
            "--problem",
            &d("ex2_2.json"),
            "--width",
            "1",
        ],
        vec![
            "lift",
            "project",
            "--point",
            &d("X_identity.json"),
            "--d1",
            "0",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = sqvar(&refs);
        assert_eq!(
            code(&out),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty(), "{args:?} printed a report");
    }
}

#[test]
fn help_exits_zero() {
    let out = sqvar(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("certify"));
}

#[test]
fn budget_exhaustion_exits_five() {
    let out = sqvar(&[
        "solve",
        "--method",
        "dss",
        "--problem",
        &d("ex2_1_d4_k4.json"),
        "--max-iter",
        "1",
    ]);
    assert_eq!(code(&out), 5);
    assert_eq!(json(&out)["termination"], "MaxIter");
}

#[test]
fn solve_dss_writes_certifiable_point_and_trace() {
    let tmp = TempDir::new().unwrap();
    let point = tmp.path().join("point.json");
    let trace = tmp.path().join("trace.jsonl");
    let out = sqvar(&[
        "solve",
        "--method",
        "dss",
        "--problem",
        &d("ex2_1_d4_k4.json"),
        "--seed",
        "7",
        "--point-out",
        point.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["method"], "dss");
    assert_eq!(r["termination"], "SecondOrder");
    assert_eq!(r["certificate"]["pass"], true);
    assert!(num(&r["objective"]).abs() < 1e-10);

    let lines: Vec<Value> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    assert!(lines
        .iter()
        .all(|l| l["grad_norm"].is_number() && l["objective"].is_number()));

    let again = sqvar(&[
        "certify",
        "--formulation",
        "dss",
        "--problem",
        &d("ex2_1_d4_k4.json"),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), 0);
}

#[test]
fn solve_symmetric_factorization() {
    let out = sqvar(&[
        "solve",
        "--method",
        "dss_sym",
        "--problem",
        &d("exB_1.json"),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["certificate"]["pass"], true);
}

#[test]
fn solve_slack_problem_by_augmented_lagrangian() {
    let out = sqvar(&[
        "solve",
        "--method",
        "ssv_auglag",
        "--problem",
        &d("ex3_1.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let x = num(&r["point"]["x"][0]);
    assert!((x + 1.0).abs() <= 1e-6, "x = {x}");
    assert_eq!(r["certificate"]["pass"], true);

    let tmp = TempDir::new().unwrap();
    let partial = write(&tmp, "start.json", "{\"x\": [0.5]}");
    let out = sqvar(&[
        "solve",
        "--method",
        "ssv_auglag",
        "--problem",
        &d("ex3_1.json"),
        "--init",
        &partial,
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn nuclear_norm_solve_is_certified() {
    let tmp = TempDir::new().unwrap();
    let point = tmp.path().join("x.json");
    let out = sqvar(&[
        "solve",
        "--method",
        "nnm_dss",
        "--problem",
        &d("sensing_8x6.json"),
        "--point-out",
        point.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["method"], "nnm_dss");
    assert_eq!(r["certificate"]["pass"], true);

    let cert = sqvar(&[
        "certify",
        "--formulation",
        "nnm",
        "--order",
        "1",
        "--problem",
        &d("sensing_8x6.json"),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(code(&cert), 0);

    // the certified point lifts to a first-order point of the block problem
    let lifted = sqvar(&[
        "lift",
        "nnm",
        "--problem",
        &d("sensing_8x6.json"),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&lifted),
        0,
        "{}",
        String::from_utf8_lossy(&lifted.stderr)
    );
    let r = json(&lifted);
    assert_eq!(r["certificate"]["pass"], true);
    let xbar = write(
        &tmp,
        "xbar.json",
        &serde_json::json!({ "X": r["X"] }).to_string(),
    );

    let proj = sqvar(&["lift", "project", "--point", &xbar, "--d1", "8"]);
    assert_eq!(code(&proj), 0);
    let rows = json(&proj)["X"].clone();
    let orig: Value = serde_json::from_str(&fs::read_to_string(&point).unwrap()).unwrap();
    let worst = rows
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(num))
        .zip(
            orig["X"]
                .as_array()
                .unwrap()
                .iter()
                .flat_map(|r| r.as_array().unwrap().iter().map(num)),
        )
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "projection differs by {worst}");
}

#[test]
fn solver_output_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = tmp.path().join(format!("run{i}.json"));
            let out = sqvar(&[
                "solve",
                "--method",
                "dss",
                "--problem",
                &d("ex2_1_d6_k3.json"),
                "--seed",
                "11",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert!(out.stdout.is_empty());
            fs::read(&path).unwrap()
        })
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);

    let a = sqvar(&["nucnorm", "demo", "--config", &d("sensing_demo.json")]);
    let b = sqvar(&["nucnorm", "demo", "--config", &d("sensing_demo.json")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rank_tolerance_comes_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqvar"));
        cmd.args([
            "certify",
            "--formulation",
            "bc",
            "--problem",
            &d("ex2_2.json"),
            "--point",
            &d("X_identity.json"),
        ]);
        cmd.args(extra);
        cmd.env_remove("SQVAR_RANK_TOL");
        if let Some(v) = env {
            cmd.env("SQVAR_RANK_TOL", v);
        }
        let out = cmd.output().unwrap();
        num(&json(&out)["tolerances"]["rank"])
    };
    assert_eq!(run(None, &[]), 1e-9);
    assert_eq!(run(Some("1e-5"), &[]), 1e-5);
    // unparsable values fall back to the default
    assert_eq!(run(Some("tiny"), &[]), 1e-9);
    // the flag wins over the environment
    assert_eq!(run(Some("1e-5"), &["--tol-rank", "1e-7"]), 1e-7);
}

#[test]
fn lift_factor_reproduces_gram() {
    let out = sqvar(&[
        "lift",
        "factor",
        "--point",
        &d("X_identity.json"),
        "--width",
        "3",
        "--rotation-seed",
        "4",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!(num(&r["residual"]) < 1e-12);
    assert_eq!(r["F"].as_array().unwrap().len(), 2);
    assert_eq!(r["F"][0].as_array().unwrap().len(), 3);

    let tmp = TempDir::new().unwrap();
    let indefinite = write(&tmp, "x.json", "{\"X\": [[1, 0], [0, -1]]}");
    let out = sqvar(&["lift", "factor", "--point", &indefinite]);
    assert_eq!(code(&out), 4);
}

#[test]
fn lift_directions() {
    let tmp = TempDir::new().unwrap();
    let rank_one = write(&tmp, "f.json", "{\"F\": [[1, 0], [0, 0]]}");
    let inside = write(&tmp, "w_in.json", "{\"W\": [[2, 1], [1, 0]]}");
    let outside = write(&tmp, "w_out.json", "{\"W\": [[0, 0], [0, 1]]}");

    let out = sqvar(&[
        "lift",
        "delta",
        "--point",
        &rank_one,
        "--direction",
        &inside,
    ]);
    assert_eq!(code(&out), 0);
    assert!(num(&json(&out)["residual"]) < 1e-12);

    let out = sqvar(&[
        "lift",
        "delta",
        "--point",
        &rank_one,
        "--direction",
        &outside,
    ]);
    assert_eq!(code(&out), 4);

    let out = sqvar(&[
        "lift",
        "delta-sym",
        "--point",
        &d("F_swap.json"),
        "--direction",
        &inside,
    ]);
    assert_eq!(
        code(&out),
        4,
        "σ and −σ both occur, so the eigenvalue condition fails"
    );

    let identity = write(&tmp, "i.json", "{\"F\": [[1, 0], [0, 1]]}");
    let out = sqvar(&[
        "lift",
        "delta-sym",
        "--point",
        &identity,
        "--direction",
        &inside,
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!(num(&r["residual"]) < 1e-12);
    assert_eq!(r["Delta"][0][1], r["Delta"][1][0]);
}

#[test]
fn project_identity_block() {
    let out = sqvar(&[
        "lift",
        "project",
        "--point",
        &d("X_identity.json"),
        "--d1",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(num(&json(&out)["X"][0][0]), 0.0);
}

#[test]
fn reproduce_every_example() {
    for (name, extra) in [
        ("ex2.1", vec!["--d", "6", "--k", "3"]),
        ("ex2.2", vec![]),
        ("ex3.1", vec![]),
        ("exB.1", vec![]),
    ] {
        let mut args = vec!["reproduce", name];
        args.extend(extra);
        let out = sqvar(&args);
        assert_eq!(
            code(&out),
            0,
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert_eq!(json(&out)["pass"], true, "{name}");
    }
}

#[test]
fn nucnorm_demo_recovers_planted_matrix() {
    let out = sqvar(&["nucnorm", "demo", "--config", &d("sensing_demo.json")]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["certified_1p"], true);
    assert!(num(&r["recovery_error"]) <= 1e-3);
    assert_eq!(r["rank"], 2);

    let tmp = TempDir::new().unwrap();
    let extra = write(&tmp, "c.json", "{\"d1\": 4, \"d2\": 3, \"rank\": 1, \"m\": 40, \"seed\": 1, \"lambda\": 0.01, \"noise\": 0}");
    assert_eq!(code(&sqvar(&["nucnorm", "demo", "--config", &extra])), 2);
}
