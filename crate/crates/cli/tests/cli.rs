use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).to_string_lossy().into_owned()
}

fn emo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emo")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn out(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn err(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const FIB_SUGGESTION: &str = "\
method fibo_prime
emo 1
span 1 13
members 1-13
params -
returns b
score 1/3 0.3333
variant nested 6-12
end
";

#[test]
fn translate_writes_ir_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = emo(&["translate", &fixture("fibo_prime.c"), "--out", d]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    let ir = fs::read_to_string(dir.path().join("fibo_prime.ir")).unwrap();
    assert_eq!(ir.lines().count(), 23);
    assert_eq!(ir, fs::read_to_string(fixture("fibo_prime.ir")).unwrap());
    let map = fs::read_to_string(dir.path().join("fibo_prime.map")).unwrap();
    assert!(map.starts_with("0 3 3\n1 4 4\n"));
}

#[test]
fn translate_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = put(dir.path(), "empty.c", "");
    let o = emo(&["translate", &empty]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(dir.path().join("empty.ir")).unwrap(), "");

    let bad = put(dir.path(), "bad.c", "x = f(y);\n");
    let o = emo(&["translate", &bad]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("line 1"), "{}", err(&o));

    let o = emo(&["translate", &dir.path().join("missing.c").to_string_lossy()]);
    assert_eq!(code(&o), 2);

    let o = emo(&["translate", &fixture("fibo_prime.c"), "--reduced-loop", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(dir.path().join("fibo_prime.ir")).unwrap().lines().count(), 21);
}

#[test]
fn validate_reports_problems() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&emo(&["validate", &fixture("fibo_prime.ir")])), 0);
    let bad = put(dir.path(), "bad.ir", "if x 4\nassign a\n");
    let o = emo(&["validate", &bad]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("statement 0"), "{}", err(&o));
}

#[test]
fn sdg_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = emo(&["sdg", &fixture("fibo_prime.ir"), "--dot"]);
    assert_eq!(code(&o), 0);
    let dot = out(&o);
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"") && !l.contains("->")).count(), 23);
    assert!(dot.contains("  1 -> 3 [label=\"D\"];"));
    assert!(dot.contains("  3 -> 4 [label=\"C\", style=dashed];"));
    assert_eq!(dot, out(&emo(&["sdg", &fixture("fibo_prime.ir"), "--dot"])));

    let one = put(dir.path(), "one.ir", "input a\n");
    let o = emo(&["sdg", &one, "--dot"]);
    assert_eq!(out(&o), "digraph sdg {\n  node [shape=box];\n  0 [label=\"0\"];\n}\n");

    let bad = put(dir.path(), "bad.ir", "loop a 3\n");
    assert_eq!(code(&emo(&["sdg", &bad])), 2);

    let file = dir.path().join("fib.dot");
    let o = emo(&["sdg", &fixture("fibo_prime.ir"), "--dot", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(file).unwrap(), dot);
}

#[test]
fn segment_outputs() {
    let o = emo(&["segment", &fixture("fibo_prime.ir")]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert_eq!(out(&o), FIB_SUGGESTION);

    let dir = tempfile::tempdir().unwrap();
    let flat = put(dir.path(), "flat.ir", "input a\nassign b a\noutput b\n");
    let o = emo(&["segment", &flat]);
    assert_eq!((code(&o), out(&o)), (0, String::new()));

    // several inputs, one file each
    let d = dir.path().join("out");
    let o = emo(&["segment", &fixture("fibo_prime.ir"), &fixture("census.ir"), "--out", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(d.join("fibo_prime.emo")).unwrap(), FIB_SUGGESTION);
    assert!(fs::read_to_string(d.join("census.emo")).unwrap().contains("members 4, 9-16\n"));

    let o = emo(&["segment", &fixture("fibo_prime.c"), "--method", "FiboPrime"]);
    assert!(out(&o).starts_with("method FiboPrime\n"));
    assert!(out(&o).contains("lines 4 16\n"));
}

#[test]
fn segment_flags() {
    let o = emo(&["segment", &fixture("fibo_prime.ir"), "--locs", "0.6"]);
    assert!(out(&o).contains("members 14-18\n"), "{}", out(&o));
    assert_eq!(code(&emo(&["segment", &fixture("fibo_prime.ir"), "--locs", "0"])), 2);
    assert_eq!(code(&emo(&["segment", &fixture("fibo_prime.ir"), "--pa", "1.2"])), 2);
    assert_eq!(code(&emo(&["segment", &fixture("fibo_prime.ir"), "--locs", "abc"])), 2);
    let o = emo(&["segment", &fixture("fibo_prime.ir"), "--no-relay-extract"]);
    assert_eq!(code(&o), 0);
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.into_iter().map(|p| (p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap())).collect()
}

#[test]
fn trace_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = emo(&["segment", &fixture("fibo_prime.ir"), "--trace", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let ta = tree(&a.path().join("fibo_prime-trace"));
    assert_eq!(ta, tree(&b.path().join("fibo_prime-trace")));
    let names: Vec<String> = ta.iter().map(|(p, _)| p.to_string_lossy().into_owned()).collect();
    assert_eq!(names[0], "step-000-initial.dot");
    assert_eq!(names[1], "step-001-ccb-19.dot");
    assert_eq!(names.last().unwrap(), "trace.log");
    let last = String::from_utf8(ta[ta.len() - 2].1.clone()).unwrap();
    assert!(last.contains("[label=\"3 (1-13)\"]"), "{last}");
}

#[test]
fn metrics_command() {
    let o = emo(&["metrics", &fixture("census.ir"), "--block", "9"]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    assert!(text.contains("locs 1/5 0.2000"), "{text}");
    assert!(text.contains("relays             {13} 1"), "{text}");
    assert_eq!(code(&emo(&["metrics", &fixture("census.ir"), "--block", "4"])), 2);
    let all = out(&emo(&["metrics", &fixture("fibo_prime.ir")]));
    assert_eq!(all.matches("block ").count(), 5);
}

#[test]
fn eval_command() {
    let dir = tempfile::tempdir().unwrap();
    let sugg = put(dir.path(), "fib.emo", FIB_SUGGESTION);
    let gt = put(dir.path(), "gt.txt", "# marked\nfibo_prime 1 13\n");
    let o = emo(&["eval", &sugg, &gt, "--tolerance", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o), "tp 1\nfp 0\nfn 0\nprecision 1.0000\nrecall 1.0000\nf-measure 1.0000\n");

    let none = put(dir.path(), "none.emo", "");
    let o = emo(&["eval", &none, &gt]);
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o), "tp 0\nfp 0\nfn 1\nprecision -\nrecall 0.0000\nf-measure -\n");

    let bad = put(dir.path(), "bad.txt", "fibo_prime 13\n");
    assert_eq!(code(&emo(&["eval", &sugg, &bad])), 2);
    let junk = put(dir.path(), "junk.emo", "emo 1\n");
    assert_eq!(code(&emo(&["eval", &junk, &gt])), 2);
}

#[test]
fn fuzzed_sources_segment_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let s = emo_testkit::random_source(&mut emo_testkit::rng(seed), 25);
        let src = put(dir.path(), &format!("s{seed}.c"), &s.text);
        let o = emo(&["segment", &src]);
        assert_eq!(code(&o), 0, "{}\n{}", s.text, err(&o));
        emo_core::suggestions::parse(&out(&o)).unwrap();
    }
}
