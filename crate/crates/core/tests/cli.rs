use std::fs;
use std::path::Path;

use serde_json::Value;
use walkforge::cli::run;

fn walkforge(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("walkforge").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.lines().next().unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn triangle_distance_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "tri.txt", "# directed triangle\n3 3\n0 1\n1 2\n2 0\n");
    let index = dir.path().join("tri.wfix");
    let index = index.to_str().unwrap();
    let (code, out, _) = walkforge(&["preprocess", &graph, "-o", index, "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["block_degrees"], serde_json::json!([3]));

    let (code, out, _) = walkforge(&["distance", index, "-u", "0", "-v", "2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["dist"], 2);
    assert_eq!(v["p"], 998_244_353u64);
    assert_eq!(v["exactness"], "mod_p");

    let (_, out, _) = walkforge(&["query", index, "-u", "0", "-v", "0", "--all"]);
    assert_eq!(json(&out)["counts"], serde_json::json!([0, 0, 1]));
    let (_, out, _) = walkforge(&["query", index, "-u", "0", "-v", "0", "--upto", "3"]);
    assert_eq!(json(&out)["count"], 1);

    let (code, _, err) = walkforge(&["query", index, "-u", "0", "-v", "0", "--k", "6"]);
    assert_eq!(code, 2, "{err}");
    let (code, out, _) = walkforge(&["query", index, "-u", "0", "-v", "0", "--k", "6", "--fallback"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["count"], 1);

    let (code, _, _) = walkforge(&["distance", index, "-u", "0", "-v", "9"]);
    assert_eq!(code, 2);
}

#[test]
fn ansc_and_cycle_sets_accept_graphs_and_indexes() {
    let dir = tempfile::tempdir().unwrap();
    let dag = write(dir.path(), "dag.txt", "4 4\n0 1\n1 2\n0 3\n3 2\n");
    let (code, out, _) = walkforge(&["ansc", &dag]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["shortest"], serde_json::json!([null, null, null, null]));

    let g = write(dir.path(), "mixed.txt", "3 3\n0 0\n1 2\n2 1\n");
    let idx = dir.path().join("mixed.wfix");
    assert_eq!(walkforge(&["preprocess", &g, "-o", idx.to_str().unwrap()]).0, 0);
    let from_graph = json(&walkforge(&["cycle-sets", &g]).1);
    let from_index = json(&walkforge(&["cycle-sets", idx.to_str().unwrap()]).1);
    assert_eq!(from_graph["sets"], from_index["sets"]);
    assert_eq!(from_graph["sets"][0], serde_json::json!([0]));
    assert_eq!(from_graph["sets"][1], serde_json::json!([0, 1, 2]));
}

#[test]
fn apaw_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tri.txt", "3 3\n0 1\n1 2\n2 0\n");
    let (code, out, _) = walkforge(&["apaw", &g]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[0]["mu"], 3);
    assert_eq!(lines[1]["counts"], serde_json::json!([0, 0, 1]));

    let per_k = dir.path().join("perk");
    assert_eq!(walkforge(&["apaw", &g, "-o", per_k.to_str().unwrap()]).0, 0);
    assert_eq!(fs::read_to_string(per_k.join("k1.txt")).unwrap(), "0 1 0\n0 0 1\n1 0 0\n");
    assert_eq!(fs::read_to_string(per_k.join("k3.txt")).unwrap(), "1 0 0\n0 1 0\n0 0 1\n");

    let jl = dir.path().join("jl");
    assert_eq!(walkforge(&["apaw", &g, "-o", jl.to_str().unwrap(), "--format", "jsonl"]).0, 0);
    assert_eq!(fs::read_to_string(jl.join("apaw.jsonl")).unwrap().lines().count(), 9);
}

#[test]
fn parse_errors_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.txt", "3 2\n0 1\n0 1\n");
    let (code, _, err) = walkforge(&["ansc", &dup]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
    let (code, _, _) = walkforge(&["ansc", "/nonexistent/graph"]);
    assert_eq!(code, 1);
    let (code, _, _) = walkforge(&["frobnicate"]);
    assert_eq!(code, 1);
    let (code, out, _) = walkforge(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("preprocess"));
}

#[test]
fn corrupted_index_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c5.txt", "5 5\n0 1\n1 2\n2 3\n3 4\n4 0\n");
    let idx = dir.path().join("c5.wfix");
    assert_eq!(walkforge(&["preprocess", &g, "-o", idx.to_str().unwrap()]).0, 0);
    let mut bytes = fs::read(&idx).unwrap();
    bytes[40] ^= 0xff;
    fs::write(&idx, bytes).unwrap();
    let (code, _, err) = walkforge(&["distance", idx.to_str().unwrap(), "-u", "0", "-v", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("checksum"), "{err}");
}

#[test]
fn verify_random_graphs_and_io_determinism() {
    let (code, out, _) = walkforge(&["verify", "--trials", "100", "--max-n", "20", "--threads", "2"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["graphs"], 100);

    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "6 8\n0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3\n1 1\n");
    let a = dir.path().join("a.wfix");
    let b = dir.path().join("b.wfix");
    for p in [&a, &b] {
        assert_eq!(walkforge(&["preprocess", &g, "-o", p.to_str().unwrap(), "--random-prime", "--seed", "11"]).0, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(walkforge(&["verify", &g, "--random-prime", "--seed", "11"]).0, 0);
}

#[test]
fn bench_small_sizes() {
    let (code, out, _) = walkforge(&["bench", "--sizes", "16,24", "--baseline"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["apaw_checksum"], r["naive_checksum"]);
    }
}
