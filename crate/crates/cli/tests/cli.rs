use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use revprob::fixtures::{fix_15, fix_l2, fix_l2_mixed_dollar};
use revprob::Automaton;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_revprob"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("revprob-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn save(s: &Scratch, name: &str, a: Automaton) -> String {
    s.write(name, &a.to_json())
}

#[test]
fn ln_pipeline_prints_interval() {
    let s = Scratch::new("ln");
    let file = s.path("l2.json");
    let o = run(&["construct", "ln", "--n", "2", "--out", &file]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let o = run(&["interval", &file, "--regex", "a*b*", "--max-len", "6"]);
    assert_eq!(stdout(&o), "(3/4, 1)\n");
    let o = run(&["interval", &file, "--regex", "a*b*", "--max-len", "6", "--float"]);
    assert_eq!(stdout(&o), "(3/4, 1)\n(0.750000, 1.000000)\n");
}

#[test]
fn classify_reports_type_and_witness() {
    let o = run(&["classify", "--regex", "(a,b)*a"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("type (*) via (*″); witness x=a y=b"), "{}", stdout(&o));
    let o = run(&["classify", "--regex", "a(a,b)*", "--oracle"]);
    assert!(stdout(&o).starts_with("type (*) via (*′); witness x=a y=b"), "{}", stdout(&o));
    assert!(stderr(&o).contains("monoid oracle agrees"));
    let o = run(&["classify", "--regex", "a*b*"]);
    assert_eq!(stdout(&o), "not type (*)\n");
}

#[test]
fn classify_reads_dfa_json() {
    let s = Scratch::new("dfa");
    let d = revprob::regclass::dfa_from_regex("(a|b)*a", None).unwrap();
    let file = s.write("d.json", &d.to_json());
    let o = run(&["classify", "--dfa", &file]);
    assert!(stdout(&o).starts_with("type (*) via (*″)"), "{}", stdout(&o));
}

#[test]
fn validate_bad_column_sum_exits_one() {
    let s = Scratch::new("bad");
    let file = s.write(
        "bad.json",
        r#"{"type":"prac","states":["p","q"],"alphabet":["a"],"initial":"p","accepting":["q"],
            "endmarkers":"none","transitions":{"a":{"n":2,"entries":[["1/2","1"],["1","0"]]}}}"#,
    );
    let o = run(&["validate", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("symbol 'a': column 0 sums to 3/2"), "{}", stdout(&o));
    let o = run(&["construct", "complement", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("column 0"));
}

#[test]
fn validate_accepts_bare_matrices() {
    let s = Scratch::new("matrix");
    let good = s.write("m.json", r#"{"n":2,"entries":[["1/3","2/3"],["2/3","1/3"]]}"#);
    let bad = s.write("b.json", r#"{"n":2,"entries":[["1/3","1/3"],["2/3","1/3"]]}"#);
    assert_eq!(stdout(&run(&["validate", &good])), "valid\n");
    let o = run(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("column 1 sums to 2/3"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["bogus"][..], &["interval"], &["construct", "ln", "--n", "0"], &["accept", "--nope"]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("construct"));
}

#[test]
fn simulate15_requires_seed() {
    let s = Scratch::new("seedless");
    let file = save(&s, "f15.json", Automaton::OneAndHalf(fix_15()));
    let o = run(&["simulate15", &file, "ab", "--trials", "10", "--max-steps", "50"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seeded_simulation_is_byte_reproducible() {
    let s = Scratch::new("seeded");
    let file = save(&s, "f15.json", Automaton::OneAndHalf(fix_15()));
    let args = ["simulate15", &file, "abba", "--trials", "500", "--max-steps", "100", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let stats: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    // "abba" ends in a: no halting run rejects
    assert_eq!(stats["rejected"], 0);
    assert!(stats["accepted"].as_u64().unwrap() > 0);
    assert_eq!(stats["trials"], 500);
}

#[test]
fn every_construction_validates() {
    let s = Scratch::new("construct");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let mixed = save(&s, "mixed.json", Automaton::C(fix_l2_mixed_dollar()));
    let map = s.write("h.json", r#"{"x":"ab","y":"ε","z":"ba"}"#);
    let n = s.path("normalized.json");
    assert!(run(&["construct", "normalize", &l2, "--p1", "3/4", "--p2", "1", "--out", &n]).status.success());
    let hashed = s.path("hashed.json");
    assert!(run(&["construct", "strip-dollar", &n, "--m", "1", "--out", &hashed]).status.success());

    let cases: Vec<Vec<&str>> = vec![
        vec!["ln", "--n", "3"],
        vec!["boost", &l2, "--copies", "2", "--p1", "3/4", "--p2", "1"],
        vec!["normalize", &l2, "--p1", "3/4", "--p2", "1"],
        vec!["union", &l2, &mixed],
        vec!["intersect", &l2, &l2],
        vec!["complement", &l2],
        vec!["invhom", &l2, "--map", &map],
        vec!["quotient", &l2, "--word", "ab"],
        vec!["strip-dollar", &mixed, "--m", "5"],
        vec!["strip-hash", &hashed, "--eps", "1/10", "--copies", "7", "--p1", "3/7", "--p2", "4/7"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let out = s.path(&format!("c{i}.json"));
        let mut args = vec!["construct"];
        args.extend(case.iter().copied());
        args.extend(["--out", &out]);
        let o = run(&args);
        assert!(o.status.success(), "{case:?}: {}", stderr(&o));
        let v = run(&["validate", &out]);
        assert_eq!(stdout(&v), "valid\n", "{case:?}");
    }
}

#[test]
fn union_warns_about_unchecked_assumption() {
    let s = Scratch::new("union");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let o = run(&["construct", "union", &l2, &l2]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("2/3"));
}

#[test]
fn construction_errors_exit_one() {
    let s = Scratch::new("errors");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let o = run(&["construct", "boost", &l2, "--copies", "8", "--p1", "3/4", "--p2", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    let o = run(&["construct", "strip-hash", &l2, "--eps", "1/10", "--copies", "1", "--p1", "3/4", "--p2", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["accept", &l2, "abc"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown symbol"));
}

#[test]
fn accept_handles_c_and_dh() {
    let s = Scratch::new("accept");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    assert_eq!(stdout(&run(&["accept", &l2, "ba"])), "3/4\n");
    assert_eq!(stdout(&run(&["accept", &l2, "ε"])), "1\n");
    let dh = save(&s, "dh.json", Automaton::Dh(revprob::fixtures::fix_adh()));
    assert_eq!(stdout(&run(&["accept", &dh, "ab"])), "accept 1\nreject 0\nnonhalt 0\n");
}

#[test]
fn probe_writes_csv() {
    let s = Scratch::new("probe");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let o = run(&["probe", &l2, "--x", "a", "--y", "b", "--m-max", "3"]);
    assert_eq!(stdout(&o), "m,gap\n1,1/4\n2,1/16\n3,1/64\n");
}

#[test]
fn markov_reports_json() {
    let s = Scratch::new("markov");
    let m = s.write("m.json", r#"{"n":2,"entries":[["0","1"],["1","0"]]}"#);
    let o = run(&["markov", &m]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["irreducible"], true);
    assert_eq!(v["report"]["periods"], serde_json::json!([2, 2]));
    assert_eq!(v["stationary"]["outcome"], "refused");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let v: serde_json::Value = serde_json::from_slice(&run(&["markov", &l2]).stdout).unwrap();
    assert_eq!(v["a"]["report"]["transient"], serde_json::json!([]));
}

#[test]
fn prototype_verdicts() {
    let s = Scratch::new("proto");
    let counter = s.write("c.json", r#"{"n":3,"entries":[["1/2","1/2","0"],["1/2","0","1/2"],["0","1/2","1/2"]]}"#);
    assert_eq!(stdout(&run(&["prototype", &counter])), "no\n");
    let half = s.write("h.json", r#"{"n":2,"entries":[["1/2","1/2"],["1/2","1/2"]]}"#);
    let o = run(&["prototype", &half]);
    let text = stdout(&o);
    let json = text.strip_prefix("yes\n").expect("found");
    let u = revprob::prototype::ComplexMatrix::from_json(json).unwrap();
    assert!(u.unitarity_defect() < 1e-8);
}

#[test]
fn out_flag_writes_file_instead_of_stdout() {
    let s = Scratch::new("out");
    let target = s.path("p.csv");
    let l2 = save(&s, "l2.json", Automaton::C(fix_l2()));
    let o = run(&["probe", &l2, "--x", "a", "--y", "b", "--m-max", "2", "--out", &target]);
    assert!(o.stdout.is_empty());
    assert!(Path::new(&target).exists());
    assert!(fs::read_to_string(&target).unwrap().starts_with("m,gap\n"));
}
