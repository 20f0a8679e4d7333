use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn circuits() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circuitum")).args(args).output().expect("binary runs")
}

fn circ(name: &str) -> String {
    circuits().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = run(&full);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).expect("stdout is json"))
}

#[test]
fn bell_amplitudes() {
    let o = run(&["simulate", &circ("bell.circ"), "--input", "|00>"]);
    assert!(o.status.success());
    let (_, v) = json(&["simulate", &circ("bell.circ"), "--input", "|00>"]);
    let fin = v["final"].as_array().unwrap();
    assert_eq!(fin.len(), 2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (amp, idx) in fin.iter().zip([0, 3]) {
        assert_eq!(amp["index"], idx);
        assert!((amp["re"].as_f64().unwrap() - h).abs() < 1e-12);
        assert!(amp["im"].as_f64().unwrap().abs() < 1e-12);
    }
    assert!(stdout(&o).starts_with("0 7.07106781186547"));
}

#[test]
fn swap_eval() {
    let o = run(&["eval", &circ("swap.circ"), "--input", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "01\n");
}

#[test]
fn eager_schedule_of_two_gate_example() {
    let o = run(&["schedule", &circ("example.circ"), "--strategy", "eager"]);
    assert_eq!(stdout(&o), "G1 | G2\n");
    let (code, v) = json(&["schedule", &circ("example.circ"), "--strategy", "lazy"]);
    assert_eq!(code, 0);
    assert_eq!(v["blocks"], serde_json::json!([["G1"], ["G2"]]));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["equiv-orders", "circuits/ghz.circ", "--trials", "7", "--seed", "11"],
        vec!["simulate", "circuits/ghz.circ", "--trace"],
        vec!["info", "circuits/adder.circ"],
    ] {
        let args: Vec<String> = args.iter().map(|a| a.strip_prefix("circuits/").map_or(a.to_string(), circ)).collect();
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run(&refs);
        let b = run(&refs);
        assert_eq!(a.stdout, b.stdout);
        assert!(a.status.success());
    }
}

#[test]
fn equiv_orders_agree() {
    for f in ["ghz.circ", "bell.circ", "adder.circ"] {
        let (code, v) = json(&["equiv-orders", &circ(f), "--trials", "15", "--seed", "3"]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(v["agree"], true);
        assert!(v["max_deviation"].as_f64().unwrap() <= 1e-9);
        assert_eq!(v["schedules"], 18);
    }
}

#[test]
fn validate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.circ");
    std::fs::write(&bad, "kind quantum\nwidth 2\ngate G lines 1,3\n  op CNOT\n").unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("SYNTAX"));
    let (code, v) = json(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["line"], 3);

    let (code, v) = json(&["validate", &circ("adder.circ")]);
    assert_eq!(code, 0);
    assert_eq!(v["kind"], "boolean");
}

#[test]
fn info_fields() {
    let (code, v) = json(&["info", &circ("adder.circ")]);
    assert_eq!(code, 0);
    assert_eq!(v["width"], 4);
    assert_eq!(v["depth"], 5);
    assert_eq!(v["gates"], 5);
    assert_eq!(v["balanced"], true);
    assert_eq!(v["timeline_table"][0], serde_json::json!({"gate": "T1", "lines": [1, 2, 4]}));
}

#[test]
fn slice_and_decompose() {
    let o = run(&["slice", &circ("example.circ"), "--gates", "G2"]);
    assert_eq!(stdout(&o), "kind syntactic\nwidth 3\ngate G2 lines 1,3\n");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("parts");
    let o =
        run(&["decompose", &circ("adder.circ"), "--partition", "T1,C1|T2|C2,C3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["adder.part1.circ", "adder.part2.circ", "adder.part3.circ"]);
    let p1 = out.join("adder.part1.circ");
    assert!(run(&["validate", p1.to_str().unwrap()]).status.success());

    let o = run(&["decompose", &circ("adder.circ"), "--partition", "C1|T1|T2,C2,C3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_COHERENT"));
}

#[test]
fn isomorphic_exit_codes() {
    let (code, v) = json(&["isomorphic", &circ("example.circ"), &circ("example.circ")]);
    assert_eq!(code, 0);
    assert_eq!(v["isomorphic"], true);
    let o = run(&["isomorphic", &circ("example.circ"), &circ("bell.circ")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_ISOMORPHIC"));
}

#[test]
fn eval_trace_and_schedule() {
    let (code, v) = json(&["eval", &circ("adder.circ"), "--input", "1100", "--schedule", "linear", "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(v["steps"].as_array().unwrap().len(), 5);
    assert_eq!(v["valuation"].as_object().unwrap().len(), 16);
    let o = run(&["eval", &circ("adder.circ"), "--input", "11x0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("BAD_WORD"));
}

#[test]
fn reversibility_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("and.circ");
    std::fs::write(&f, "kind boolean\nwidth 2\ngate G lines 1,2\n  op AND-EMBED\n").unwrap();
    for m in ["gates", "table", "cross"] {
        let o = run(&["check-reversible", f.to_str().unwrap(), "--method", m]);
        assert_eq!(stdout(&o), "irreversible\n");
        let o = run(&["check-reversible", &circ("adder.circ"), "--method", m]);
        assert_eq!(stdout(&o), "reversible\n");
    }
    let o = run(&["check-reversible", &circ("bell.circ")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("WRONG_KIND"));
}

#[test]
fn simulate_state_file_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("psi.txt");
    std::fs::write(&f, "0 2 0\n").unwrap();
    let o = run(&["simulate", &circ("bell.circ"), "--input", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(stdout(&o).starts_with("0 1.41421356237309"));

    let o = Command::new(env!("CARGO_BIN_EXE_circuitum"))
        .args(["simulate", &circ("ghz.circ")])
        .env("CIRCUITUM_WIDTH_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("WIDTH_TOO_LARGE"));

    let o = run(&["simulate", &circ("example.circ")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn transpose_path_output() {
    let (code, v) = json(&["transpose-path", "--poset", &circ("chain.poset"), "--from", "a,b,c,d", "--to", "b,d,a,c"]);
    assert_eq!(code, 0);
    assert_eq!(v["distance"], 3);
    assert_eq!(v["swaps"].as_array().unwrap().len(), 3);
    assert_eq!(v["orders"].as_array().unwrap().last().unwrap(), &serde_json::json!(["b", "d", "a", "c"]));

    let o = run(&["transpose-path", "--poset", &circ("chain.poset"), "--from", "a,b,c,d", "--to", "c,a,b,d"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["schedule"]).status.code(), Some(2));
    assert_eq!(run(&["check-reversible", &circ("adder.circ"), "--method", "psychic"]).status.code(), Some(2));
    let o = run(&["slice", &circ("adder.circ"), "--gates", "C1,,T2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 2);
}

#[test]
fn json_errors_are_objects() {
    let (code, v) = json(&["schedule", &circ("example.circ"), "--strategy", "G2|G1"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "NOT_COHERENT");
}
