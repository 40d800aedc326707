use std::path::PathBuf;
use std::process::{Command, Output};

use topiso::decompose::DecompositionNode;
use topiso::format::serialize_graph;
use topiso::generate::{generate, random_permutation, Family};
use topiso::report::RunReport;
use topiso::ColoredGraph;

fn scratch(name: &str, g: &ColoredGraph) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("topiso-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, serialize_graph(g)).unwrap();
    path
}

fn topiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topiso")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn c6() -> ColoredGraph {
    generate(&Family::Cycle { n: 6 }, 0).unwrap()
}

#[test]
fn refine_counts_classes_of_a_path() {
    let p3 = scratch("p3.grf", &ColoredGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
    let o = topiso(&["refine", "--k", "1", path(&p3)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 classes"));
    let o = topiso(&["refine", "--k", "2", "--full", path(&p3)]);
    assert!(stdout(&o).contains("tuple 0 2"));
    let o = topiso(&["oracle", "refine", "--k", "1", path(&p3)]);
    assert!(stdout(&o).contains("2 classes"));
}

#[test]
fn iso_exit_codes() {
    let g = generate(&Family::RandomMaxDegree { n: 14, d: 3 }, 4).unwrap();
    let h = g.apply_permutation(&random_permutation(14, 9)).unwrap();
    let (a, b) = (scratch("iso-a.grf", &g), scratch("iso-b.grf", &h));
    let o = topiso(&["iso", path(&a), path(&b), "--h", "5", "--witness", "--aut"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("witness:") && text.contains("aut order:"));

    let other = scratch("iso-c.grf", &generate(&Family::Tree { n: 14 }, 1).unwrap());
    let o = topiso(&["iso", path(&a), path(&other), "--h", "5"]);
    assert_eq!(o.status.code(), Some(1));

    let (x, y) = (scratch("c6.grf", &c6()), scratch("c6b.grf", &c6()));
    let o = topiso(&["iso", path(&x), path(&y), "--h", "4", "--t", "1", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_reports_round_trip() {
    let (x, y) = (scratch("j1.grf", &c6()), scratch("j2.grf", &c6()));
    let o = topiso(&["iso", path(&x), path(&y), "--h", "4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report = RunReport::from_json(stdout(&o).trim()).unwrap();
    assert_eq!(report.command, "iso");
    assert_eq!(report.outcome, "isomorphic");
    assert_eq!(report.params.h, Some(4));
    assert_eq!(RunReport::from_json(&report.to_json()).unwrap(), report);
}

#[test]
fn usage_and_io_errors() {
    let o = topiso(&["iso", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = topiso(&["aut", "/definitely/missing.grf", "--h", "4"]);
    assert_eq!(o.status.code(), Some(66));
    let bad = std::env::temp_dir().join(format!("topiso-bad-{}.grf", std::process::id()));
    std::fs::write(&bad, "n 2\ne 0 0\n").unwrap();
    let o = topiso(&["refine", path(&bad)]);
    assert_eq!(o.status.code(), Some(65));
}

#[test]
fn aut_closure_and_initial_set() {
    let x = scratch("aut.grf", &c6());
    let o = topiso(&["aut", path(&x), "--h", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order: 12"));
    let o = topiso(&["closure", path(&x), "--t", "1", "--individualize", "0,1"]);
    assert!(stdout(&o).contains("closure (6 vertices): 0,1,2,3,4,5"));
    let o = topiso(&["closure", path(&x), "--t", "1"]);
    assert!(stdout(&o).contains("closure (0 vertices)"));
    let o = topiso(&["initial-set", path(&x), "--h", "4", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("|X| 6"));
}

#[test]
fn decompose_formats() {
    let t = scratch("tree.grf", &generate(&Family::Tree { n: 12 }, 3).unwrap());
    let o = topiso(&["decompose", path(&t), "--h", "3", "--t", "1", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("graph decomposition {"));
    let o = topiso(&["decompose", path(&t), "--h", "3", "--format", "json"]);
    let root: DecompositionNode = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(root.nodes().iter().map(|n| n.bag.len()).max(), Some(12));
}

#[test]
fn oracle_commands() {
    let (x, y) = (scratch("o1.grf", &c6()), scratch("o2.grf", &c6()));
    let o = topiso(&["oracle", "iso", path(&x), path(&y)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("isomorphisms: 12"));
    let o = topiso(&["oracle", "topo", path(&x), "--h", "3"]);
    assert!(stdout(&o).contains("present"));
    let o = topiso(&["oracle", "topo", path(&x), "--h", "4"]);
    assert!(stdout(&o).contains("absent"));
}

#[test]
fn bench_is_deterministic_and_never_detects_on_degree_three() {
    let args = [
        "bench",
        "--family",
        "random_max_degree(10,3)",
        "--family",
        "random_max_degree(20,3)",
        "--family",
        "random_max_degree(30,3)",
        "--count",
        "2",
        "--h",
        "5",
        "--seed",
        "11",
        "--json",
    ];
    let parse = |o: &Output| -> Vec<RunReport> {
        stdout(o).lines().map(|l| RunReport::from_json(l).unwrap().without_timings()).collect()
    };
    let first = topiso(&args);
    assert_eq!(first.status.code(), Some(0));
    let a = parse(&first);
    assert_eq!(a.len(), 6);
    assert!(a.iter().all(|r| r.outcome == "isomorphic"), "{a:?}");
    assert_eq!(a, parse(&topiso(&args)));
    let table = topiso(&["bench", "--family", "tree(8)", "--h", "3"]);
    assert!(stdout(&table).contains("tree(8)"));
}
