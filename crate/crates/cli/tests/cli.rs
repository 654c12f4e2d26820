//! End-to-end runs of the `malcev` binary on the files under `data/`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use malcev::{corpus, is_congruence_preserving, PartialFn, PolyFn, TermDag};
use malcev_tool::format::PartialFnDoc;
use malcev_tool::report::Report;
use serde_json::Value;

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malcev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--json", "-", "--no-timing"]);
    let out = run(&all);
    (
        serde_json::from_slice(&out.stdout).expect("JSON report"),
        out.status.code().expect("exit code"),
    )
}

fn path(file: &str) -> String {
    data(file).display().to_string()
}

#[test]
fn analyze_z4() {
    let out = run(&["analyze", &path("z4.json"), "--mode", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in [
        "SC1: false",
        "AB2: true",
        "s1ac: false (mode both)",
        "verified: yes",
        "sha256:",
        "timing:",
    ] {
        assert!(text.contains(line), "missing {line:?} in\n{text}");
    }
    let (report, code) = json(&["analyze", &path("z4.json"), "--mode", "both"]);
    assert_eq!(code, 0);
    assert_eq!(report["s1ac"]["verdict"], Value::Bool(false));
    assert_eq!(
        report["structure"]["sc1_failures"][0]["cover"]["classes"],
        serde_json::json!([[0, 2], [1, 3]])
    );
    assert!(report.get("timing").is_none());
}

#[test]
fn analyze_klein_and_semilattice() {
    let (report, _) = json(&["analyze", &path("z2xz2.json")]);
    assert_eq!(report["s1ac"]["verdict"], Value::Bool(true));
    assert_eq!(report["lattice"]["size"], 5);
    let out = run(&["analyze", &path("semilattice2.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no Mal'cev polynomial; analyses requiring one skipped"));
}

#[test]
fn searched_malcev_term_is_reported() {
    let (report, code) = json(&["analyze", &path("z3bare.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["malcev"]["source"], "search");
    assert_eq!(report["s1ac"]["verdict"], Value::Bool(false));
}

#[test]
fn interpolate_squaring_and_empty() {
    let out = run(&["interpolate", &path("z4.json"), &path("squaring.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("congruence-preserving: yes; interpolable: no"));
    let (report, _) = json(&[
        "interpolate",
        &path("z4.json"),
        &path("empty.json"),
        "--verify",
    ]);
    assert_eq!(report["interpolation"]["interpolant"], "0");
    assert_eq!(report["interpolation"]["verified"], Value::Bool(true));
}

#[test]
fn interpolants_on_klein_group_reverify() {
    let dir = tempfile::tempdir().unwrap();
    let k = corpus::klein4();
    let mut checked = 0;
    for mask in 1u32..16 {
        let domain: Vec<usize> = (0..4).filter(|&x| mask >> x & 1 == 1).collect();
        for code in 0..4usize.pow(domain.len() as u32) {
            let values: Vec<usize> = (0..domain.len())
                .map(|i| code / 4usize.pow(i as u32) % 4)
                .collect();
            let f = PartialFn::new(domain.clone(), values.clone(), 4).unwrap();
            if !is_congruence_preserving(&k, &f) {
                continue;
            }
            let file = dir.path().join(format!("f{mask}_{code}.json"));
            let doc = PartialFnDoc {
                domain: domain.clone(),
                values,
            };
            std::fs::write(&file, serde_json::to_string(&doc).unwrap()).unwrap();
            let (report, code) = json(&[
                "interpolate",
                &path("z2xz2.json"),
                file.to_str().unwrap(),
                "--verify",
            ]);
            assert_eq!(code, 0);
            let i = &report["interpolation"];
            assert_eq!(i["interpolable"], Value::Bool(true), "{doc:?}");
            assert_eq!(i["method"], "recursion");
            let term = TermDag::parse(i["interpolant"].as_str().unwrap(), &k, &["x"]).unwrap();
            assert!(f.agrees_with(&PolyFn::new(&k, term, 1).unwrap()), "{doc:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 104);
}

#[test]
fn witness_reloads_as_counterexample() {
    let (report, _) = json(&["analyze", &path("s3.json")]);
    let doc: PartialFnDoc =
        serde_json::from_value(report["s1ac"]["witness"]["function"].clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.json");
    std::fs::write(&file, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["interpolate", &path("s3.json"), file.to_str().unwrap()]);
    assert!(stdout(&out).contains("congruence-preserving: yes; interpolable: no"));
}

fn dot_nodes_and_edges(dot: &str) -> (usize, usize) {
    (dot.matches("label=").count(), dot.matches("->").count())
}

#[test]
fn lattice_dot_files() {
    let dir = tempfile::tempdir().unwrap();
    for (file, nodes, edges) in [("z2xz2.json", 5, 6), ("z4.json", 3, 2), ("z1.json", 1, 0)] {
        let out_path = dir.path().join(format!("{file}.dot"));
        let out = run(&["lattice", &path(file), "--dot", out_path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let dot = std::fs::read_to_string(&out_path).unwrap();
        assert_eq!(dot_nodes_and_edges(&dot), (nodes, edges), "{file}");
    }
    let out = run(&[
        "lattice",
        &path("z4.json"),
        "--dot",
        "/nonexistent/dir/x.dot",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn loops() {
    let out = run(&["loop", &path("z4loop.json"), "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("criterion=false with H={0,2}"));
    let (report, _) = json(&["loop", &path("z2loop.json"), "--verify"]);
    assert_eq!(report["loop"]["criterion"], Value::Bool(true));
    assert_eq!(report["loop"]["bruteforce"], Value::Bool(true));
    let (report, code) = json(&["loop", &path("loop5.json"), "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(report["loop"]["associative"], Value::Bool(false));
    let out = run(&["loop", &path("notaloop.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a loop"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("missing.json", None),
        ("garbage.json", Some("{not json")),
        ("schema.json", Some(r#"{"name":"x","size":2}"#)),
        (
            "range.json",
            Some(r#"{"name":"x","size":2,"operations":[{"name":"f","arity":1,"table":[0,2]}]}"#),
        ),
        (
            "length.json",
            Some(r#"{"name":"x","size":2,"operations":[{"name":"f","arity":2,"table":[0,1,1]}]}"#),
        ),
        (
            "term.json",
            Some(
                r#"{"name":"x","size":2,"operations":[{"name":"f","arity":1,"table":[1,0]}],"malcev_term":"(f x)"}"#,
            ),
        ),
    ];
    for (name, body) in cases {
        let file = dir.path().join(name);
        if let Some(body) = body {
            std::fs::write(&file, body).unwrap();
        }
        let out = run(&["analyze", file.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(!out.stderr.is_empty(), "{name}");
    }
    let file = dir.path().join("f.json");
    std::fs::write(&file, r#"{"domain":[0,7],"values":[0,0]}"#).unwrap();
    assert_eq!(
        run(&["interpolate", &path("z4.json"), file.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budget_exhaustion_exits_3_with_partial_report() {
    let (report, code) = json(&["analyze", &path("z8.json"), "--max-clone-size", "100"]);
    assert_eq!(code, 3);
    assert_eq!(report["s1ac"]["status"], "budget_exhausted");
    assert_eq!(report["lattice"]["size"], 4);
    assert_eq!(report["structure"]["sc1"], Value::Bool(false));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let files: Vec<String> = [
        "z4.json",
        "s3.json",
        "z2xz2.json",
        "bool4.json",
        "affine_point3.json",
    ]
    .iter()
    .map(|f| path(f))
    .collect();
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(String::as_str));
    args.extend(["--json", "-", "--no-timing"]);
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let reports: Vec<Report> = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(reports.len(), files.len());
    let again = malcev_tool::to_json(&reports);
    assert_eq!(again.as_bytes(), &one.stdout[..]);
}

#[test]
fn json_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run(&[
        "s1ac",
        &path("z5.json"),
        "--mode",
        "characterization",
        "--json",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("s1ac: false"));
    let report: Report = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(report.s1ac.unwrap().verdict, Some(false));
    assert!(report.timing.is_some());
}
