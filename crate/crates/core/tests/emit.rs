mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;

use corec_core::analysis::{analyze, Analysis};
use corec_core::ast::Program;
use corec_core::emit::{emit, emit_program, emit_report};
use corec_core::syntax::parse_program;
use serde_json::Value as Json;

const KEYWORDS: [&str; 8] = ["Definition", "Fixpoint", "CoFixpoint", "Inductive", "CoInductive", "Lemma", "Theorem", "Parameter"];

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> (Program, Analysis) {
    let src = std::fs::read_to_string(dir().join("corpus").join(format!("{name}.corec"))).unwrap();
    let prog = parse_program(&src).unwrap();
    let analysis = analyze(&prog);
    (prog, analysis)
}

/// Declared names with the byte offset of their declaration, in order.
/// Constructors are lines of the form `| name :`.
fn declarations(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let mut words = line.split_whitespace();
        let first = words.next().unwrap_or("");
        let second = words.next().unwrap_or("");
        let ctor = first == "|" && line.starts_with('|') && words.next() == Some(":");
        if KEYWORDS.contains(&first) || ctor {
            out.push((second.to_string(), offset));
        }
        offset += line.len();
    }
    out
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Byte offset of the first whole-word occurrence of `name`.
fn first_use(text: &str, name: &str) -> Option<usize> {
    text.match_indices(name).map(|(i, _)| i).find(|&i| {
        let before = text[..i].chars().next_back().is_none_or(|c| !is_ident(c) && c != '.');
        let after = text[i + name.len()..].chars().next().is_none_or(|c| !is_ident(c));
        before && after
    })
}

/// `text` with every comment blanked out, offsets preserved.
fn without_comments(text: &str) -> String {
    let mut bytes = text.as_bytes().to_vec();
    let mut i = 0;
    while let Some(s) = text[i..].find("(*") {
        let e = text[i + s..].find("*)").map_or(text.len(), |e| i + s + e + 2);
        bytes[i + s..e].fill(b' ');
        i = e;
    }
    String::from_utf8(bytes).unwrap()
}

fn assert_declared_before_use(text: &str) {
    let text = &without_comments(text);
    // The preamble's tactic may mention tactic names that programs reuse.
    let body = text.find("congruence ].\n").unwrap();
    for (name, at) in declarations(text) {
        let used = body + first_use(&text[body..], &name).unwrap();
        assert!(used >= at, "`{name}` used at byte {used} before its declaration at {at}");
    }
}

fn section<'t>(text: &'t str, header: &str) -> &'t str {
    let start = text.find(header).unwrap_or_else(|| panic!("missing {header}"));
    let rest = &text[start..];
    let end = rest.find("\n\n").unwrap_or(rest.len());
    &rest[..end]
}

#[test]
fn golden_files_match() {
    for name in ["dyn", "filter", "e_filter"] {
        let (prog, analysis) = load(name);
        let text = emit_program(&prog, &analysis);
        let path = dir().join("tests/golden").join(format!("{name}.v"));
        if std::env::var_os("COREC_BLESS").is_some() {
            std::fs::write(&path, &text).unwrap();
        }
        let golden = std::fs::read_to_string(&path).unwrap();
        assert!(text == golden, "{name}.v differs from the emitted text; rerun with COREC_BLESS=1 after review");
    }
}

#[test]
fn constructor_counts_follow_the_clauses() {
    for (name, ev) in [("dyn", 2), ("filter", 2), ("e_filter", 4)] {
        let (prog, analysis) = load(name);
        let text = emit_program(&prog, &analysis);
        let ev_block = section(&text, &format!("Inductive eventually_{name} "));
        assert_eq!(ev_block.lines().filter(|l| l.starts_with(&format!("| ev_{name}"))).count(), ev, "{name}");
        let inf_block = section(&text, &format!("CoInductive infinite_{name} "));
        assert_eq!(inf_block.lines().filter(|l| l.starts_with("| ")).count(), 1, "{name}");
        assert!(inf_block.contains(&format!("| inf_{name} :")));
    }
}

#[test]
fn sections_appear_in_dependency_order() {
    for name in ["dyn", "filter", "e_filter"] {
        let (prog, analysis) = load(name);
        let text = emit_program(&prog, &analysis);
        let art = analysis.artifacts(name).unwrap();
        let mut last = 0;
        for n in art.names().iter().filter(|n| !n.starts_with("ev_") && !n.starts_with("inf_")) {
            let at = declarations(&text).into_iter().find(|(d, _)| d == n).unwrap_or_else(|| panic!("{n} not declared")).1;
            assert!(at > last, "{n} out of order");
            last = at;
        }
    }
}

#[test]
fn every_artifact_is_declared_exactly_once() {
    for name in ["showcase", "dyn", "filter", "e_filter"] {
        let (prog, analysis) = load(name);
        let text = emit_program(&prog, &analysis);
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (d, _) in declarations(&text) {
            *seen.entry(d).or_default() += 1;
        }
        assert!(seen.values().all(|&n| n == 1), "{name}: {seen:?}");
        for art in analysis.artifacts.values().flatten() {
            if art.verdict != corec_core::guard::Verdict::TransformableUnguarded {
                continue;
            }
            for n in art.names() {
                assert_eq!(seen.get(&n), Some(&1), "{name}: {n}");
            }
        }
        assert_declared_before_use(&text);
    }
}

#[test]
fn random_programs_declare_before_use() {
    for seed in 0..80 {
        let g = common::generate(seed);
        let prog = parse_program(&g.src).unwrap();
        let analysis = analyze(&prog);
        let text = emit_program(&prog, &analysis);
        assert_declared_before_use(&text);
        for n in analysis.artifacts(&g.fun).unwrap().names() {
            assert!(declarations(&text).iter().any(|(d, _)| *d == n), "seed {seed}: {n}");
        }
        assert!(!text.contains("(*") || text.matches("(*").count() == text.matches("*)").count());
    }
}

#[test]
fn lemmas_are_stated_and_left_open() {
    let (prog, analysis) = load("e_filter");
    let text = emit_program(&prog, &analysis);
    let stated = text.lines().filter(|l| l.starts_with("Lemma ") || l.starts_with("Theorem ")).count();
    assert_eq!(stated, 2 + 2 + 2 + 4 + 1);
    assert_eq!(text.matches("\nAdmitted.").count(), stated);
    assert_eq!(text.matches("\nProof.").count(), stated);
}

#[test]
fn emission_is_deterministic() {
    let (prog, analysis) = load("showcase");
    assert_eq!(emit_program(&prog, &analysis), emit_program(&prog, &analysis));
    let again = analyze(&prog);
    assert_eq!(emit_program(&prog, &analysis), emit_program(&prog, &again));
}

#[test]
fn single_function_rendering() {
    let (prog, analysis) = load("e_filter");
    let art = analysis.artifacts("e_filter").unwrap();
    let text = emit(&prog, art);
    assert!(text.starts_with("(* e_filter: not guarded"));
    assert!(text.contains("\nInductive eventually_e_filter : ETree -> Prop"));
    assert!(text.contains("CoInductive infinite_e_filter : ETree -> Prop"));
    assert!(!text.contains("CoInductive ETree"));
    assert!(emit_program(&prog, &analysis).contains(&text));
}

#[test]
fn guarded_definitions_are_plain_cofixpoints() {
    let prog = parse_program("codata Stream = SCons(nat, #)\ncofun repeat(a: nat): Stream = SCons(a, repeat(a))\n").unwrap();
    let text = emit_program(&prog, &analyze(&prog));
    assert!(text.contains("CoFixpoint repeat (a : nat) : Stream :=\n  SCons a (repeat a).\n"), "{text}");
    assert!(!text.contains("eventually"));
    assert!(!text.contains("Lemma"));
}

#[test]
fn rejected_definitions_become_comments() {
    let (prog, analysis) = load("showcase");
    let text = emit_program(&prog, &analysis);
    assert!(!declarations(&text).iter().any(|(d, _)| d == "nats"));
    assert!(text.contains("RejectedStarStar"));
    assert!(text.contains("Fixpoint div2 (n : nat) {struct n} : nat"));
    assert!(text.contains("Parameter log : nat -> nat."));
}

fn report(prog: &Program, analysis: &Analysis) -> Json {
    serde_json::from_str(&emit_report(prog, analysis)).unwrap()
}

#[test]
fn report_lists_every_definition() {
    let (prog, analysis) = load("showcase");
    let r = report(&prog, &analysis);
    let defs = r["definitions"].as_array().unwrap();
    let got: Vec<(&str, &str, &str)> =
        defs.iter().map(|d| (d["name"].as_str().unwrap(), d["kind"].as_str().unwrap(), d["verdict"].as_str().unwrap())).collect();
    assert_eq!(
        got,
        [
            ("repeat", "cofun", "Guarded"),
            ("from", "cofun", "Guarded"),
            ("mapinc", "cofun", "Guarded"),
            ("ctree", "cofun", "Guarded"),
            ("h3", "cofun", "Guarded"),
            ("filter", "fun", "TransformableUnguarded"),
            ("dyn", "fun", "TransformableUnguarded"),
            ("e_filter", "fun", "TransformableUnguarded"),
            ("f", "fun", "TransformableUnguarded"),
            ("nats", "fun", "RejectedStarStar"),
            ("div2", "rec", "Accepted"),
            ("log", "rec", "Rejected"),
        ]
    );
    for d in defs {
        let keys: Vec<&str> = d.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["artifact_names", "calls", "counts", "kind", "name", "verdict"]);
        let transformable = d["verdict"] == "TransformableUnguarded";
        assert_eq!(d["counts"].is_object(), transformable, "{}", d["name"]);
        assert_eq!(d["artifact_names"].as_array().unwrap().is_empty(), !transformable);
    }
    let e = defs.iter().find(|d| d["name"] == "e_filter").unwrap();
    assert_eq!(e["counts"]["eventually_ctors"], 4);
    assert_eq!(e["counts"]["inversions"], 2);
    assert_eq!(e["counts"]["step_lemmas"], 4);
    let tags: Vec<&str> = e["calls"].as_array().unwrap().iter().map(|c| c["tag"].as_str().unwrap()).collect();
    assert_eq!(tags, ["GuardedCall", "UnguardedStar", "GuardedCall", "UnguardedStar"]);
    let nats = defs.iter().find(|d| d["name"] == "nats").unwrap();
    assert_eq!(nats["calls"][0]["tag"], "UnguardedStarStar");
}

#[test]
fn report_of_an_empty_program() {
    let prog = parse_program("").unwrap();
    assert_eq!(emit_report(&prog, &analyze(&prog)), "{\n  \"definitions\": []\n}");
}
