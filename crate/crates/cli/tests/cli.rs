use std::fs;
use std::process::{Command, Output};

use fidmoments::io::ChannelFile;
use fidmoments::moments::BoundReport;
use fidmoments::oracle::EmpiricalMoments;
use fidmoments::{CptpReport, MomentReport};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fidmoments"));
    cmd.args(args).env_remove("FIDMOMENTS_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn close(v: &Value, target: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - target).abs() <= tol
}

fn channel_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn validate_fixtures_and_files() {
    let out = run(&["validate", "--fixture", "identity"]);
    assert_eq!(code(&out), 0);
    let rep: CptpReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rep.verdict);

    assert_eq!(
        code(&run(&[
            "validate",
            "--fixture",
            "random",
            "--dim",
            "3",
            "--rank",
            "4",
            "--seed",
            "7"
        ])),
        0
    );

    let dir = tempfile::tempdir().unwrap();
    let doubled = channel_file(
        &dir,
        "doubled.json",
        r#"{"dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]}"#,
    );
    let out = run(&["validate", "--file", &doubled]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], Value::Bool(false));

    let broken = channel_file(&dir, "broken.json", "{\"dim\": 2, \"kraus\": [");
    assert_eq!(code(&run(&["validate", "--file", &broken])), 2);
    assert_eq!(
        code(&run(&["validate", "--file", "/nonexistent/channel.json"])),
        2
    );
    assert_eq!(code(&run(&["validate"])), 2);
}

#[test]
fn analyze_examples() {
    let out = run(&["analyze", "--fixture", "dephasing", "--p", "0.5"]);
    assert_eq!(code(&out), 0);
    let rep: MomentReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!((rep.avg - 2.0 / 3.0).abs() < 1e-6);
    assert!((rep.variance - 1.0 / 45.0).abs() < 1e-6);
    assert!(rep.variance_qubit.is_some());
    assert!(rep.variance_path_difference < 1e-8);

    let v = json(&run(&["analyze", "--fixture", "identity", "--dim", "4"]));
    assert!(close(&v["avg"], 1.0, 1e-12) && close(&v["variance"], 0.0, 1e-12));
    assert!(v["variance_qubit"].is_null());

    let v = json(&run(&[
        "analyze",
        "--fixture",
        "depolarizing",
        "--dim",
        "2",
        "--p",
        "0.2",
    ]));
    assert!(close(&v["avg"], 0.9, 1e-12) && close(&v["variance"], 0.0, 1e-12));

    let v = json(&run(&["analyze", "--fixture", "pauli-x"]));
    assert!(close(&v["avg"], 1.0 / 3.0, 1e-12) && close(&v["variance"], 4.0 / 45.0, 1e-12));

    let v = json(&run(&[
        "analyze",
        "--fixture",
        "amplitude-damping",
        "--gamma",
        "0.3",
        "--moments",
        "3",
        "--direct-sum",
    ]));
    assert_eq!(v["higher_moments"].as_array().unwrap().len(), 3);
    assert!(v["second_moment_direct"].is_number());
    assert_eq!(v["flags"].as_array().unwrap().len(), 0);
}

#[test]
fn analyze_input_errors() {
    assert_eq!(code(&run(&["analyze", "--fixture", "dephasing"])), 2);
    assert_eq!(
        code(&run(&["analyze", "--fixture", "dephasing", "--p", "1.5"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "dephasing",
            "--p",
            "0.1",
            "--dim",
            "3"
        ])),
        2
    );
    assert_eq!(code(&run(&["analyze", "--fixture", "bogus"])), 2);
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "identity",
            "--format",
            "csv"
        ])),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let not_tp = channel_file(
        &dir,
        "scaled.json",
        r#"{"dim": 2, "kraus": [[[[2,0],[0,0]],[[0,0],[2,0]]]]}"#,
    );
    assert_eq!(code(&run(&["analyze", "--file", &not_tp])), 1);
}

#[test]
fn budget_guard_exits_three() {
    let args = [
        "analyze",
        "--fixture",
        "random",
        "--dim",
        "2",
        "--rank",
        "4",
        "--moments",
        "4",
    ];
    let out = run_env(&args, &[("FIDMOMENTS_BUDGET", "1000")]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&run_env(&args, &[("FIDMOMENTS_BUDGET", "lots")])), 2);
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "identity",
            "--moments",
            "6"
        ])),
        3
    );
}

#[test]
fn ideal_unitary_file() {
    let dir = tempfile::tempdir().unwrap();
    let x = "[[[0,0],[1,0]],[[1,0],[0,0]]]";
    let ideal = channel_file(&dir, "x.json", x);
    let v = json(&run(&[
        "analyze",
        "--fixture",
        "pauli-x",
        "--ideal",
        &ideal,
    ]));
    assert!(close(&v["avg"], 1.0, 1e-12) && close(&v["variance"], 0.0, 1e-12));

    let embedded = channel_file(
        &dir,
        "xx.json",
        &format!(r#"{{"dim": 2, "kraus": [{x}], "ideal_unitary": {x}}}"#),
    );
    let v = json(&run(&["analyze", "--file", &embedded]));
    assert!(close(&v["avg"], 1.0, 1e-12));

    let not_unitary = channel_file(&dir, "bad.json", "[[[1,0],[1,0]],[[0,0],[1,0]]]");
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "pauli-x",
            "--ideal",
            &not_unitary
        ])),
        2
    );
}

#[test]
fn channel_file_from_library_roundtrips_through_cli() {
    let ch = fidmoments::channels::random_cptp(3, 2, 99).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = channel_file(&dir, "rand.json", &ChannelFile::from_channel(&ch).to_json());
    let from_file = json(&run(&["analyze", "--file", &path]));
    let from_fixture = json(&run(&[
        "analyze",
        "--fixture",
        "random",
        "--dim",
        "3",
        "--rank",
        "2",
        "--channel-seed",
        "99",
    ]));
    assert_eq!(from_file, from_fixture);
}

#[test]
fn sample_examples() {
    let out = run(&["sample", "--fixture", "identity", "--samples", "1000"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let emp: EmpiricalMoments = serde_json::from_value(v["empirical"].clone()).unwrap();
    assert!(emp.moments[0].standard_error <= 1e-12);
    let _: MomentReport = serde_json::from_value(v["analytic"].clone()).unwrap();

    let out = run(&[
        "sample",
        "--fixture",
        "dephasing",
        "--p",
        "0.5",
        "--samples",
        "200000",
        "--seed",
        "42",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = run(&[
        "sample",
        "--fixture",
        "pauli-x",
        "--samples",
        "200000",
        "--seed",
        "5",
        "--shards",
        "8",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = json(&out);
    assert!(close(
        &v["empirical"]["moments"][0]["estimate"],
        1.0 / 3.0,
        5e-3
    ));
    assert!(close(&v["empirical"]["variance"], 4.0 / 45.0, 5e-3));

    assert_eq!(
        code(&run(&["sample", "--fixture", "identity", "--samples", "1"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "sample",
            "--fixture",
            "identity",
            "--samples",
            "4",
            "--shards",
            "5"
        ])),
        2
    );
}

#[test]
fn commands_are_deterministic() {
    let args = [
        "sample",
        "--fixture",
        "random",
        "--dim",
        "3",
        "--samples",
        "5000",
        "--seed",
        "3",
        "--shards",
        "4",
        "--moments",
        "3",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["sweep", "--dims", "2,3", "--trials", "4", "--seed", "8"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn sweep_examples() {
    let out = run(&[
        "sweep", "--dims", "2,4,8,16", "--rank", "2", "--trials", "20", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,mean_var,max_var,d_times_max_var"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(
        rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(),
        vec![2, 4, 8, 16]
    );
    for r in &rows {
        assert!(r[1] <= r[2] + 1e-15);
        assert!((r[3] - r[0] * r[2]).abs() <= 1e-12);
        assert!(r[3] <= 2.0 * rows[0][3]);
    }

    assert_eq!(code(&run(&["sweep", "--dims", "2"])), 0);

    let out = run(&[
        "sweep",
        "--fixture",
        "depolarizing",
        "--p",
        "0.5",
        "--dims",
        "2,3,5",
        "--trials",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    for line in stdout(&out).lines().skip(1) {
        for x in line.split(',').skip(1) {
            assert!(x.parse::<f64>().unwrap().abs() < 1e-12, "{line}");
        }
    }

    let v = json(&run(&[
        "sweep", "--dims", "2,3", "--trials", "3", "--format", "json",
    ]));
    assert_eq!(v["trend_ok"], Value::Bool(true));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(close(&v["rows"][1]["control_var"], 0.0, 1e-12));

    assert_eq!(code(&run(&["sweep", "--dims", "2", "--rank", "9"])), 2);
    assert_eq!(code(&run(&["sweep", "--fixture", "dephasing"])), 2);
}

#[test]
fn bounds_examples() {
    let out = run(&["bounds", "--fixture", "identity", "--dim", "3"]);
    assert_eq!(code(&out), 0);
    let rep: BoundReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rep.all_hold);
    let chi00 = rep.checks.iter().find(|c| c.name == "chi00").unwrap();
    assert!(chi00.slack.abs() < 1e-12);

    let v = json(&run(&["bounds", "--fixture", "depolarizing", "--p", "1"]));
    assert!(close(&v["checks"][0]["value"], 0.25, 1e-12));

    for seed in 0..100 {
        let s = seed.to_string();
        let out = run(&[
            "bounds",
            "--fixture",
            "random",
            "--dim",
            "3",
            "--rank",
            "3",
            "--seed",
            &s,
        ]);
        assert_eq!(code(&out), 0, "seed {seed}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "analyze",
        "--fixture",
        "identity",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let rep: MomentReport = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep.dim, 2);
}
