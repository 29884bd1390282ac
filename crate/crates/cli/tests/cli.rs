use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tim_cli::commands;
use tim_core::fixtures::*;
use tim_core::{enumerate_specs, serialize_topology, TopologyMatrix};

fn tim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn put_matrix(dir: &TempDir, name: &str, t: &TopologyMatrix) -> String {
    put(dir, name, &serialize_topology(t)).to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Expands a plain 1-based spec document by hand: receiver m hears every
/// member of the alliance named as its interferer.
fn expand_plain(k: usize, alliances: &[Vec<(usize, Vec<usize>)>]) -> Vec<String> {
    let members: Vec<Vec<usize>> = alliances
        .iter()
        .map(|subs| subs.iter().flat_map(|(_, ms)| ms.clone()).collect())
        .collect();
    let mut grid = vec![vec!['0'; k]; k];
    for (i, row) in grid.iter_mut().enumerate() {
        row[i] = '1';
    }
    for subs in alliances {
        for (partner, ms) in subs {
            for &m in ms {
                for &j in &members[partner - 1] {
                    grid[m - 1][j - 1] = '1';
                }
            }
        }
    }
    grid.into_iter().map(|r| r.into_iter().collect()).collect()
}

#[test]
fn analyze_reports_maximal_pair() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &paired4_matrix());
    let o = tim(&["analyze", &p]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("maximal, DoF 1/2"));
    assert!(stdout(&o).contains("10|11"));
}

#[test]
fn analyze_identity_suggests_link() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "id.txt", "1000\n0100\n0010\n0001\n");
    let o = tim(&["analyze", s(&p)]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("not maximal"));
    assert!(out.contains("suggestion: add the link from transmitter 2 to receiver 1"));
}

#[test]
fn analyze_names_internal_conflict() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &conflict6());
    let o = tim(&["analyze", &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("receiver 5 hears transmitter 4"));
}

#[test]
fn analyze_third_lists_underfilled_receivers() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &sparse7_matrix());
    let o = tim(&["analyze", &p, "--dof", "1/3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("under-filled receivers (fewer than 2 interference blocks): {W2, W4, W6, W7}"));

    let p = put_matrix(&dir, "u.txt", &thirds7_matrix());
    let o = tim(&["analyze", &p, "--dof", "1/3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("maximal, DoF 1/3"));
}

#[test]
fn analyze_writes_dot() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &paired4_matrix());
    let dot = dir.path().join("g.dot");
    let o = tim(&["--quiet", "analyze", &p, "--dot", s(&dot)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(dot).unwrap();
    assert!(text.contains("W1 -> W2 [dir=none];"));
    assert!(text.contains("W1 -> W3 [style=dashed, color=red];"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("ragged", "10\n1\n"), ("binary", "12\n01\n"), ("diag", "01\n01\n"), ("empty", "")] {
        let p = put(&dir, name, text);
        let o = tim(&["analyze", s(&p)]);
        assert_eq!(code(&o), 2, "{name}");
        assert!(stderr(&o).starts_with("error:"), "{name}");
    }
    assert_eq!(code(&tim(&["analyze", "/nonexistent/t.txt"])), 2);
    assert_eq!(code(&tim(&["frobnicate"])), 2);
    let p = put_matrix(&dir, "t.txt", &paired4_matrix());
    assert_eq!(code(&tim(&["analyze", &p, "--dof", "1/1"])), 2);
    assert_eq!(code(&tim(&["transform", &p, "--strategy", "sideways"])), 2);
}

#[test]
fn construct_six_user_ring() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"k":6,"alliances":[
        {"suballiances":[{"messages":[1],"interferers":[2]},{"messages":[2],"interferers":[3]}]},
        {"suballiances":[{"messages":[3],"interferers":[1]},{"messages":[4],"interferers":[3]}]},
        {"suballiances":[{"messages":[5],"interferers":[1]},{"messages":[6],"interferers":[2]}]}]}"#;
    let p = put(&dir, "ring.json", spec);
    let out = dir.path().join("ring.txt");
    let o = tim(&["construct", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let expected = expand_plain(
        6,
        &[
            vec![(2, vec![1]), (3, vec![2])],
            vec![(1, vec![3]), (3, vec![4])],
            vec![(1, vec![5]), (2, vec![6])],
        ],
    );
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written.lines().collect::<Vec<_>>(), expected);
    assert_eq!(code(&tim(&["analyze", s(&out)])), 0);
}

#[test]
fn construct_rejects_uncovered_pair() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"k":4,"alliances":[
        {"suballiances":[{"messages":[1,2],"interferers":[2]}]},
        {"suballiances":[{"messages":[3,4],"interferers":[3]}]},
        {"suballiances":[]}]}"#;
    let p = put(&dir, "bad.json", spec);
    let o = tim(&["construct", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pair-uncovered (A1, A3)"), "{}", stderr(&o));
}

#[test]
fn construct_single_user_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "one.json", r#"{"k":1,"alliances":[{"suballiances":[{"messages":[1]}]}]}"#);
    let o = tim(&["--json", "construct", s(&p)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["degenerate"], true);
    assert_eq!(v["matrix"], serde_json::json!(["1"]));
}

#[test]
fn construct_generalized_and_strict_mode() {
    let dir = TempDir::new().unwrap();
    let p = put(&dir, "g.json", &thirds7_spec().to_document().to_json());
    let o = tim(&["--json", "construct", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["e_max"], 2);
    assert_eq!(v["dof"], "1/3");
    let rows: Vec<String> = thirds7_matrix().to_string().lines().map(str::to_owned).collect();
    assert_eq!(v["matrix"], serde_json::json!(rows));

    // The ring's lifted interferer sets {A2} and {A3} are disjoint siblings.
    let p = put(&dir, "ring.json", &ring6_spec().to_document().to_json());
    assert_eq!(code(&tim(&["construct", s(&p)])), 0);
    let o = tim(&["construct", s(&p), "--strict"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("disjoint-interferers"));
}

#[test]
fn transform_strategies() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &unlinked8());
    for (strategy, expected) in [("merge", unlinked8_merged()), ("add-links", unlinked8_linked())] {
        let out = dir.path().join(format!("{strategy}.txt"));
        let o = tim(&["transform", &p, "--strategy", strategy, "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), serialize_topology(&expected));
        assert!(stdout(&o).contains("added links (receiver, transmitter): ("));
    }
    let o = tim(&["transform", &p, "--strategy", "add-links"]);
    assert!(stdout(&o).contains("(4, 5), (4, 6), (8, 7)"));
}

#[test]
fn transform_keeps_maximal_input() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &ring6_matrix());
    let o = tim(&["transform", &p]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("added links: none"));
    assert!(stdout(&o).ends_with(&serialize_topology(&ring6_matrix())));
}

#[test]
fn transform_refuses_internal_conflict() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &conflict6());
    let o = tim(&["transform", &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("W4 and W5"));
}

#[test]
fn verify_theorems_three_users() {
    let o = tim(&["verify-theorems", "--k", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("5 maximal / 64 total, all iff checks pass"));
    let o = tim(&["verify-theorems", "--k", "6", "--samples", "300"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("(sampled)"));
}

#[test]
fn bound_is_tight_on_pair() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &paired4_matrix());
    let o = tim(&["bound", &p]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("achievable 1/2, upper 1/2, tight"));
    let q = put(&dir, "s.json", &thirds7_spec().to_document().to_json());
    let p = put_matrix(&dir, "u.txt", &thirds7_matrix());
    let o = tim(&["bound", &p, "--spec", s(&q)]);
    assert!(stdout(&o).starts_with("achievable 1/3, upper 1/3, tight"));
    // A spec that does not derive the matrix is an input error.
    let o = tim(&["bound", &put_matrix(&dir, "v.txt", &sparse7_matrix()), "--spec", s(&q)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_dof_names_failing_receiver() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &conflict6());
    let o = tim(&["verify-dof", &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("receiver 5 not separable"));

    let p = put_matrix(&dir, "u.txt", &thirds7_matrix());
    let q = put(&dir, "s.json", &thirds7_spec().to_document().to_json());
    let o = tim(&["--seed", "7", "verify-dof", &p, "--spec", s(&q)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("DoF 1/3 achieved"));
    let o = tim(&["verify-dof", &p, "--spec", s(&q), "--slots", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn enumerate_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("k3.csv");
    let o = tim(&["enumerate", "--k", "3", "--canonical", "--csv", s(&csv_path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["matrix", "dof_optimal", "maximal", "alliance_count", "canonical"]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 64);
    let maximal: Vec<&csv::StringRecord> = records.iter().filter(|r| &r[2] == "true").collect();
    assert_eq!(maximal.len(), 5);
    assert!(maximal.iter().all(|r| !r[3].is_empty() && r[4].len() == 9));
    assert!(records.iter().all(|r| r[0].len() == 9));
}

#[test]
fn enumerate_sampled_and_spec_counts() {
    let o = tim(&["enumerate", "--k", "6"]);
    assert_eq!(code(&o), 2);
    let o = tim(&["--json", "enumerate", "--k", "6", "--samples", "50", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["total"], 50);
    let o = tim(&["--json", "enumerate", "--k", "4", "--specs"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 43);
}

#[test]
fn export_dot_to_stdout() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &conflict6());
    let o = tim(&["export-dot", &p]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("digraph messages {"));
    assert!(out.contains("W5 -> W4 [style=dashed, color=red];"));
    assert!(out.contains("W4 -> W5 [dir=none];"));
}

#[test]
fn json_payloads_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = put_matrix(&dir, "t.txt", &thirds7_matrix());
    let q = put(&dir, "s.json", &thirds7_spec().to_document().to_json());
    for args in [
        vec!["--json", "analyze", p.as_str()],
        vec!["--json", "--seed", "11", "verify-dof", p.as_str(), "--spec", s(&q)],
        vec!["--json", "bound", p.as_str()],
        vec!["--json", "enumerate", "--k", "7", "--samples", "20", "--seed", "5"],
    ] {
        let a = tim(&args);
        let b = tim(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        serde_json::from_slice::<serde_json::Value>(&a.stdout).expect("one JSON document");
    }
}

#[test]
fn construct_then_analyze_always_passes() {
    let dir = TempDir::new().unwrap();
    for k in 2..=4 {
        for n in 2..=tim_core::max_alliances(k) {
            for spec in enumerate_specs(k, n) {
                let p = put(&dir, "s.json", &spec.to_document().to_json());
                let out = dir.path().join("t.txt");
                let built = commands::construct(&p, Some(&out), false).unwrap();
                assert_eq!(built.exit_code, 0);
                let verdict = commands::analyze(&out, None, None).unwrap();
                assert_eq!(verdict.exit_code, 0, "{spec}");
            }
        }
    }
}
