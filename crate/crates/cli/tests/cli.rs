use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use intergenic::harness::generator::{generate_instance_weighted, InstanceSpec};
use intergenic::harness::write_pair_file;
use intergenic::{apply_sequence, Deletion, Gene, Insertion, RearrangementOp, Reversal, Transposition, WeightScheme};

const FIGURE_ONE: &str = "\
>source
genes: X a -h d b -g -i e
intergenic: 1 2 2 0 1 2 2 3 2
>target
genes: a b c d e f g h i
intergenic: 3 0 1 1 3 0 2 1 3 1
";

const FIGURE_TWO: &str = "\
>source
genes: X a ~c -b
intergenic: 1 2 2 4 2
>target
genes: a b c
intergenic: 2 1 2 3
";

fn temp_file(text: &str) -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("intergenic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{}.pair", NEXT.fetch_add(1, Ordering::Relaxed)));
    std::fs::write(&path, text).unwrap();
    path
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intergenic")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(line: &str, key: &str) -> u64 {
    let start = line.find(&format!("{key}=")).unwrap() + key.len() + 1;
    line[start..].split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap()
}

fn list(line: &str, key: &str) -> Vec<String> {
    let start = line.find(&format!("{key}=[")).unwrap() + key.len() + 2;
    let end = start + line[start..].find(']').unwrap();
    line[start..end].split_whitespace().map(str::to_string).collect()
}

/// Reads the numbered operation lines of `dist` back into operations.
fn parse_ops(text: &str) -> Vec<RearrangementOp> {
    let mut ops = Vec::new();
    for line in text.lines() {
        let t = line.trim_start();
        let Some((_, rest)) = t.split_once(". ") else { continue };
        if !t.chars().next().unwrap().is_ascii_digit() {
            continue;
        }
        let op: RearrangementOp = if rest.starts_with("reversal(") {
            Reversal { i: field(rest, "i") as usize, j: field(rest, "j") as usize, x: field(rest, "x"), y: field(rest, "y") }
                .into()
        } else if rest.starts_with("transposition(") {
            Transposition {
                i: field(rest, "i") as usize,
                j: field(rest, "j") as usize,
                k: field(rest, "k") as usize,
                x: field(rest, "x"),
                y: field(rest, "y"),
                z: field(rest, "z"),
            }
            .into()
        } else if rest.starts_with("deletion(") {
            Deletion { i: field(rest, "i") as usize, j: field(rest, "j") as usize, x: field(rest, "x"), y: field(rest, "y") }
                .into()
        } else if rest.starts_with("insertion(") {
            let genes = list(rest, "genes").iter().map(|g| Gene::Id(g.parse().unwrap())).collect();
            let regions = list(rest, "regions").iter().map(|r| r.parse().unwrap()).collect();
            let x_at = rest.rfind("x=").unwrap();
            Insertion { i: field(rest, "i") as usize, genes, regions, x: field(&rest[x_at..], "x") }.into()
        } else {
            panic!("unexpected line {line}");
        };
        ops.push(op);
    }
    ops
}

#[test]
fn factors_prints_published_value() {
    let o = cli(&["factors", "--weights", "2,3,2", "--p", "4,1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("10/3 (3.333)"), "{}", stdout(&o));
    let o = cli(&["factors", "--weights", "2,4,1"]);
    assert!(stdout(&o).starts_with("2 (2.000)"));
    let o = cli(&["factors", "--weights", "3/2,2.5,1", "--p", "1,1"]);
    assert!(o.status.success());
}

#[test]
fn dist_on_figure_two() {
    let path = temp_file(FIGURE_TWO);
    let o = cli(&["dist", path.to_str().unwrap(), "--weights", "2,3,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("weight: 6 "), "{text}");
    assert!(text.contains("replay: target reached"));
    let ops = parse_ops(&text);
    assert_eq!(ops.len(), 3);
    assert_eq!(ops.iter().filter(|op| matches!(op, RearrangementOp::Reversal(_))).count(), 1);
}

#[test]
fn dist_output_replays() {
    for (n, w) in WeightScheme::published_schemes().into_iter().enumerate() {
        for seed in 0..15 {
            let spec = InstanceSpec { m: 7, k: 6, max_region: 3, exclusive_counts: (1 + n % 2, 1), seed };
            let pair = generate_instance_weighted(&spec, &w);
            let path = temp_file(&write_pair_file(&pair));
            let weights = format!("{},{},{}", w.w_rev(), w.w_trans(), w.w_indel());
            let p = format!("{},{}", w.p1(), w.p2());
            let o = cli(&["dist", path.to_str().unwrap(), "--weights", &weights, "--p", &p]);
            assert!(o.status.success(), "{}", stderr(&o));
            let ops = parse_ops(&stdout(&o));
            assert_eq!(apply_sequence(&pair.source, &ops).unwrap(), pair.target, "seed {seed}");
        }
    }
}

#[test]
fn trace_lists_steps() {
    let path = temp_file(FIGURE_ONE);
    let o = cli(&["trace", path.to_str().unwrap(), "--weights", "2,3,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("#1 step I:"), "{text}");
    assert!(text.contains("step III"));
}

#[test]
fn graph_dot_on_figure_one() {
    let path = temp_file(FIGURE_ONE);
    let o = cli(&["graph", path.to_str().unwrap(), "--dot"]);
    assert!(o.status.success());
    let dot = stdout(&o);
    assert!(dot.starts_with("graph "));
    let vertices = dot.lines().filter(|l| l.trim_start().starts_with('v') && l.contains("[label=")).count();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains(" -- ")).collect();
    let colors: BTreeSet<&str> = edges
        .iter()
        .map(|l| l.split("color=").nth(1).unwrap().split(',').next().unwrap())
        .collect();
    assert_eq!((vertices, edges.len(), colors.len()), (16, 16, 4));

    let o = cli(&["graph", path.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("|pi| = 7, c = 4, c_g = 1"));
}

#[test]
fn exact_on_figure_two() {
    let path = temp_file(FIGURE_TWO);
    let o = cli(&["exact", path.to_str().unwrap(), "--weights", "2,3,2", "--max-nucleotides", "19"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("exact weight: 6 "));
    let o = cli(&["exact", path.to_str().unwrap(), "--weights", "2,3,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("limit is 12"));
}

#[test]
fn bench_csv_is_deterministic() {
    let args = ["bench", "--spec", "m=4,k=3,r=1,xs=1,seeds=0..9; m=8,k=5,seeds=3..6", "--oracle"];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,scheme,alg_weight,lower_bound,oracle_weight,ratio"));
    assert_eq!(lines.count(), 14 * 4);
    assert!(stderr(&a).contains("violations 0"));

    let o = cli(&["bench", "--spec", "m=3,seeds=0..1", "--schemes", "1,1,1,1,1;2,3,2,4,1"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2);
}

#[test]
fn bench_with_no_specs() {
    let o = cli(&["bench", "--spec", ""]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "instance,scheme,alg_weight,lower_bound,oracle_weight,ratio\n");
}

#[test]
fn input_errors_exit_with_one() {
    let bad = temp_file(">source\ngenes: a\nintergenic: 0 -1\n>target\ngenes: a\nintergenic: 0 0\n");
    let o = cli(&["dist", bad.to_str().unwrap(), "--weights", "2,3,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let cases: [&[&str]; 6] = [
        &["dist", "/nonexistent/file.pair", "--weights", "2,3,2"],
        &["dist"],
        &["factors", "--weights", "1,1,1"],
        &["factors", "--weights", "0,1,1", "--p", "1,1"],
        &["bench", "--spec", "m=0"],
        &["nonsense"],
    ];
    for args in cases {
        assert_eq!(cli(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}
