use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nodal-abel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, body: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_owned()
    }
}

#[test]
fn check_stability_exit_codes_and_witness() {
    let f = Files::new();
    let good = f.put(
        "good.json",
        r#"{"components":2,"nodes":[[1,2]],"marked":1,"polarization":["0","0"],"multidegree":[0,0]}"#,
    );
    let bad = f.put(
        "bad.json",
        r#"{"components":2,"nodes":[[1,2]],"marked":1,"polarization":["0","0"],"multidegree":[1,-1]}"#,
    );
    let missing = f.put("missing.json", r#"{"components":2,"nodes":[[1,2]],"marked":1}"#);
    let garbage = f.put("garbage.json", "{not json");

    let o = run(&["check-stability", &good]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "quasistable");

    let o = run(&["check-stability", &bad]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("Y={1}"));
    let j = json(&run(&["check-stability", &bad, "--json"]));
    assert_eq!(j["quasistable"], false);
    assert_eq!(j["witness"]["subcurve"], serde_json::json!([1]));
    assert_eq!(j["witness"]["excess"], "1");

    assert_eq!(code(&run(&["check-stability", &missing])), 2);
    assert_eq!(code(&run(&["check-stability", &garbage])), 2);
    assert_eq!(code(&run(&["check-stability", "/nonexistent/x.json"])), 2);
}

#[test]
fn twist_search_reports_canonical_twist() {
    let f = Files::new();
    let c = f.put(
        "c.json",
        r#"{"components":2,"nodes":[[1,2],[1,2]],"marked":1,"polarization":["0","0"],"multidegree":[3,-3]}"#,
    );
    let o = run(&["oracle", "twist-search", &c, "--json"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!(j["twist"], serde_json::json!([0, 1]));
    assert_eq!(j["twisted"], serde_json::json!([1, -1]));
}

#[test]
fn semistabilize_reports_twister() {
    let f = Files::new();
    let c = f.put(
        "ch.json",
        r#"{"base":{"components":2,"nodes":[[1,2]],"marked":1},"d":3,"base_degs":[0,0],"chain_degs":{"0":[0,1,0]}}"#,
    );
    let o = run(&["semistabilize", &c, "--json"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!(j["twister"], serde_json::json!([[1, 2, 1]]));
    assert_eq!(j["chain_degs"]["0"], serde_json::json!([0, -1, 0]));
    assert_eq!(j["base_degs"], serde_json::json!([1, 1]));

    let na = f.put(
        "na.json",
        r#"{"base":{"components":2,"nodes":[[1,2]],"marked":1},"d":2,"base_degs":[0,0],"chain_degs":{"0":[2,0]}}"#,
    );
    assert_eq!(code(&run(&["semistabilize", &na])), 1);
}

#[test]
fn collection_order_smooth_and_not() {
    let f = Files::new();
    let ok = f.put("ok.json", r#"{"d_plus_1":3,"sets":[[1],[2]]}"#);
    let o = run(&["collection", "order", &ok, "--json"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!(j["order"], serde_json::json!([1, 2, 3]));
    assert_eq!(j["oracle_agrees"], true);

    let bad = f.put("bad.json", r#"{"d_plus_1":3,"sets":[[1]]}"#);
    assert_eq!(code(&run(&["collection", "order", &bad])), 1);
}

#[test]
fn enumerate_counts_and_validation() {
    let o = run(&["enumerate", "--d", "2", "--q", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = run(&["enumerate", "--d", "1", "--q", "3", "--json"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 3);
    let o = run(&["enumerate", "--d", "3", "--q", "2", "--count-only"]);
    assert_eq!(stdout(&o).trim(), "48");
    assert_eq!(code(&run(&["enumerate", "--d", "0", "--q", "2"])), 2);
}

#[test]
fn verify_standard_order_passes() {
    let o = run(&["verify", "--d", "3", "--q", "2", "--L", "1,-1", "--pol", "1/2,-1/2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: pass"));
}

#[test]
fn verify_custom_order_fails_with_witness() {
    let f = Files::new();
    let s = f.put("s.json", r#"{"schedule":["products-lex","diagonals-descending"]}"#);
    let args = ["verify", "--d", "3", "--q", "2", "--L", "0,0", "--pol", "0,0", "--order", &s];
    let text = run(&args);
    assert_eq!(code(&text), 1);
    let mut jargs = args.to_vec();
    jargs.push("--json");
    let j = json(&run(&jargs));
    let failures = j["failures"].as_array().unwrap();
    assert!(!failures.is_empty());

    // text and JSON carry the same failures, in the same order
    let text_out = stdout(&text);
    let fail_lines: Vec<&str> = text_out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fail_lines.len(), failures.len());
    for (line, f) in fail_lines.iter().zip(failures) {
        assert!(line.contains(&shown_point(&f["point"])), "{line} vs {f}");
        assert!(line.contains(&format!("condition {}", f["condition"])));
    }
}

fn shown_point(p: &Value) -> String {
    let ells: Vec<String> = p["ells"].as_array().unwrap().iter().map(Value::to_string).collect();
    let labels: Vec<String> = p["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| format!("[{}]", l.as_str().unwrap()))
        .collect();
    format!("{{({}),{}}}", ells.join(","), labels.join(","))
}

#[test]
fn verify_errors_exit_two() {
    let f = Files::new();
    assert_eq!(code(&run(&["verify", "--d", "0", "--q", "2", "--L", "0,0", "--pol", "0,0"])), 2);
    assert_eq!(code(&run(&["verify", "--d", "2", "--q", "2", "--L", "0,0", "--pol", "1/0,0"])), 2);
    assert_eq!(code(&run(&["verify", "--d", "2", "--q", "2", "--L", "0", "--pol", "0,0"])), 2);
    let diag_only = f.put("d.json", r#"{"schedule":["diagonals-descending"]}"#);
    let o = run(&["verify", "--d", "3", "--q", "2", "--L", "0,0", "--pol", "0,0", "--order", &diag_only]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid order"));
}

#[test]
fn verify_json_is_shard_independent() {
    let base = ["verify", "--d", "3", "--q", "3", "--L", "2,-3", "--pol", "1/3,-4/3", "--json"];
    let outputs: Vec<Vec<u8>> = ["1", "2", "5"]
        .iter()
        .map(|n| {
            let mut a = base.to_vec();
            a.extend(["--shards", n]);
            run(&a).stdout
        })
        .collect();
    assert!(!outputs[0].is_empty());
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}
