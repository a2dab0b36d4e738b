use std::path::PathBuf;
use std::process::{Command, Output};

use il_decide::{certify, parse, VeltmanModel};

fn il(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_il"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("il-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sat_answers() {
    let o = il(&["sat", "p |> q"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "SAT\n");

    let o = il(&["sat", "false"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "UNSAT\n");
}

#[test]
fn valid_answers() {
    let o = il(&["valid", "box(p->q) -> (p |> q)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "VALID\n");

    let o = il(&["valid", "box p -> p"]);
    assert_eq!(stdout(&o), "INVALID\n");
}

#[test]
fn parse_error_exits_1() {
    let o = il(&["sat", "p |>"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing an operand"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(il(&["sat"]).status.code(), Some(1));
    assert_eq!(il(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(il(&["--help"]).status.code(), Some(0));
}

#[test]
fn witness_file_is_a_certified_countermodel() {
    let path = scratch("countermodel.json");
    let o = il(&["valid", "p |> q -> q |> p", "--witness", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), "INVALID\n");
    let model = VeltmanModel::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let negated = parse("~(p |> q -> q |> p)").unwrap();
    assert_eq!(certify(&model, &negated), Ok(()));

    let o = il(&["certify", path.to_str().unwrap(), "~(p |> q -> q |> p)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK\n");

    let o = il(&["certify", path.to_str().unwrap(), "p |> q -> q |> p"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn certify_rejects_non_veltman_frames() {
    let path = scratch("reflexive.json");
    std::fs::write(
        &path,
        r#"{"worlds":["w"],"root":"w","R":[["w","w"]],"S":{"w":[]},"valuation":{"w":[]}}"#,
    )
    .unwrap();
    let o = il(&["certify", path.to_str().unwrap(), "true"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn closure_dump() {
    let o = il(&["closure", "p |> q"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["gamma_rhd"], serde_json::json!(["p", "q"]));
    assert_eq!(
        v["gamma_rhd_i"],
        serde_json::json!(["p |> false", "p |> q", "q |> false"])
    );
    assert_eq!(v["depth_budget"], 5);
}

#[test]
fn oracle_finds_model_or_reports_bound() {
    let o = il(&["oracle", "~(p |> q)"]);
    let model = VeltmanModel::from_json(stdout(&o).trim()).unwrap();
    assert_eq!(certify(&model, &parse("~(p |> q)").unwrap()), Ok(()));

    let o = il(&["oracle", "box false & dia true", "--max-worlds", "2"]);
    assert_eq!(stdout(&o), "NOT_FOUND(2)\n");

    let o = il(&["oracle", "p", "--max-worlds", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn file_input_skips_comments() {
    let path = scratch("formulas.txt");
    std::fs::write(&path, "# schema instances\nbox (box p -> p) -> box p\n\nbox p -> p # not valid\n")
        .unwrap();
    let o = il(&["valid", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "VALID\tbox (box p -> p) -> box p\nINVALID\tbox p -> p\n"
    );

    std::fs::write(&path, "p\n(q\n").unwrap();
    let o = il(&["sat", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_decision_output() {
    let o = il(&["sat", "~(p |> q)", "--json", "--memoize"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["answer"], "SAT");
    assert!(v[0]["max_depth"].as_u64().unwrap() <= v[0]["depth_budget"].as_u64().unwrap());
    assert!(v[0]["model"]["worlds"].is_array());
}

#[test]
fn corpus_is_clean_and_deterministic() {
    let args = ["corpus", "--random", "60", "--seed", "11", "--json"];
    let a = il(&args);
    let b = il(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["spec_version"], "1.0");
    assert_eq!(v["summary"]["disagreements"], 0);
}

#[test]
fn bench_runs() {
    let o = il(&["bench", "--max-size", "6", "--per-size", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}
