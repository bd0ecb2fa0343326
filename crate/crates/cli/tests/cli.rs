use std::process::{Command, Output};

fn ontotamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontotamp")).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tag_and_query() {
    let o = ontotamp(&["tag", "Put banana, apple and bowl in plate"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "put/[banana, apple, bowl]/plate\n");
    let o = ontotamp(&["query", "--label", "BANANA"]);
    assert_eq!(stdout(&o), "BANANA: FoodItem\n");
    let o = ontotamp(&["query", "--action", "put", "--type", "Crockery"]);
    assert!(stdout(&o).starts_with("put/Crockery: priority 1: "));
}

#[test]
fn tag_json_round_trips() {
    let o = ontotamp(&["tag", "--json", "Stack plate1 and cup on the table"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["clauses"][0]["task"], "stack");
    assert_eq!(v["clauses"][0]["destination"], "table");
}

#[test]
fn run_is_deterministic_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let args = [
        "run",
        "--scene",
        "scene_a",
        "--command",
        "Put banana, apple and bowl in plate",
        "--inject-failure",
        "first-place",
        "--trace",
        trace.to_str().unwrap(),
    ];
    let a = ontotamp(&args);
    let b = ontotamp(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let out = stdout(&a);
    assert!(out.starts_with("outcome: Success\nllm calls: 2\n"), "{out}");
    assert!(out.contains("FAILURE: Place bowl: motion planning failed: iteration limit reached"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(v["llm_calls"], 2);
}

#[test]
fn scene_from_file_and_custom_kb() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("s.json");
    std::fs::write(
        &scene,
        r#"{"name": "t", "surfaces": [{"name": "table", "bbox": [0, 0, 1, 1], "height": 0.7}],
            "objects": [{"name": "mug", "position": [0.5, 0.5, 0.7], "bbox": [0.45, 0.45, 0.55, 0.55], "height": 0.1}],
            "goal": []}"#,
    )
    .unwrap();
    let o = ontotamp(&["describe", "--scene", scene.to_str().unwrap()]);
    assert!(stdout(&o).contains("mug is a Crockery located at position [0.500, 0.500, 0.700]"));
    let kb = dir.path().join("kb.nt");
    std::fs::write(&kb, "<ex:mug> <rdfs:label> \"mug\" .\n<ex:mug> <rdf:type> <ex:Tool> .\n").unwrap();
    let o = ontotamp(&["--kb", kb.to_str().unwrap(), "query", "--label", "mug"]);
    assert_eq!(stdout(&o), "mug: Tool\n");
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, md) = (dir.path().join("r.csv"), dir.path().join("r.md"));
    let o = ontotamp(&[
        "bench",
        "--trials",
        "1",
        "--csv",
        csv.to_str().unwrap(),
        "--report",
        md.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.contains("\n2,onto,mock-guided,1.000,1.000,1.00,"));
    assert!(csv.contains("\n2,baseline,mock-naive,0.000,0.000,10.00,"));
    assert!(std::fs::read_to_string(md).unwrap().contains("gold parses reproduced: 10/10"));
}

#[test]
fn errors_exit_nonzero() {
    let o = ontotamp(&["tag", "the bowl and the plate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NoTaskFound"));
    let o = ontotamp(&["describe", "--scene", "/nonexistent/scene.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ontotamp(&["bench", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn credentials_only_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_ontotamp"))
        .args([
            "plan", "--scene", "scene_a", "--command", "Put bowl in plate", "--backend", "http", "--endpoint",
            "http://127.0.0.1:9/v1", "--model", "m", "--cred-env", "ONTOTAMP_TEST_UNSET_VAR",
        ])
        .env_remove("ONTOTAMP_TEST_UNSET_VAR")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ONTOTAMP_TEST_UNSET_VAR"));
    let o = ontotamp(&["plan", "--api-key", "x", "--scene", "scene_a", "--command", "Put bowl in plate"]);
    assert_eq!(o.status.code(), Some(2));
}
