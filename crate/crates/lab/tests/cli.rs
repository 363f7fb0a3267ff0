use std::path::Path;
use std::process::{Command, Output};

use broomlab::io::{self, Format};
use broomlab_core::generators;

fn broomlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_broomlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn petersen_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [("p.txt", "edgelist"), ("p.col", "dimacs")] {
        let out = broomlab(dir.path(), &["gen", "--family", "kneser", "--n", "5", "--k", "2", "--format", format, "--out", name]);
        assert!(out.status.success());
        let path = dir.path().join(name);
        let first = std::fs::read_to_string(&path).unwrap();
        let g = io::read_graph(&path, None).unwrap();
        assert_eq!(g, generators::kneser(5, 2).unwrap());
        assert_eq!(io::write_graph(&g, Format::from_path(&path)), first);
    }
}

#[test]
fn analyze_petersen_and_triangle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("k3.col"), "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
    let v = json(&broomlab(dir.path(), &["analyze", "--graph", "k3.col"]));
    assert_eq!(v["instance"]["m"], 3);
    assert_eq!(v["result"]["chi"]["value"], 3);

    let v = json(&broomlab(dir.path(), &["analyze", "--fixture", "petersen@1"]));
    let r = &v["result"];
    assert_eq!((r["omega"]["value"].as_u64(), r["chi"]["value"].as_u64()), (Some(2), Some(3)));
    assert_eq!(r["t_delta_free"]["value"], true);
    assert_eq!(r["chi"]["provenance"], "exact");
    assert!(v.get("timings").is_none());
}

#[test]
fn constants_example() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&broomlab(dir.path(), &["constants", "--delta", "1", "--tau", "1", "--beta", "2", "--zeta", "3"]));
    let get = |key: &str| {
        v["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["key"] == key)
            .map(|e| e["value"].as_str().unwrap().to_string())
    };
    assert_eq!(get("gamma").as_deref(), Some("9"));
    assert_eq!(get("epsilon").as_deref(), Some("27"));
    assert_eq!(get("strong_h.s").as_deref(), Some("498"));
}

#[test]
fn lemma_check_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&broomlab(dir.path(), &["lemma-check", "digraph", "--trials", "300", "--seed", "7"]));
    assert_eq!((v["passed"].as_u64(), v["trials"].as_u64()), (Some(300), Some(300)));
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "4\n0 1\n1 x\n").unwrap();
    let out = broomlab(dir.path(), &["analyze", "--graph", "bad.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");
    assert!(err["message"].as_str().unwrap().contains("line 3"));

    let out = broomlab(dir.path(), &["pipeline", "--fixture", "grotzsch@1", "--solver-limit", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = broomlab(dir.path(), &["lemma-check", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn survey_rows_match_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("m.json"),
        r#"{"instances": [
            {"id": "c7", "graph": {"family": "cycle", "n": 7}},
            {"id": "big", "graph": {"family": "erdos_renyi", "n": 80, "p": 0.5, "seed": 1}},
            {"id": "g", "graph": {"family": "fixture", "id": "nope@1"}}
        ]}"#,
    )
    .unwrap();
    let out = broomlab(dir.path(), &["survey", "--manifest", "m.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1], "c7,cycle,7,2,3,false,ok");
    assert!(rows[2].starts_with("big,erdos_renyi,80,") && rows[2].contains("refused"));
    assert!(rows[3].starts_with("g,fixture,,") && rows[3].contains("error"));
}
