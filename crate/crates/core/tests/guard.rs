use std::rc::Rc;

use corec_core::analysis::analyze;
use corec_core::guard::{classify_function, CallTag, StructuralVerdict, Verdict};
use corec_core::syntax::parse_program;

const SHOWCASE: &str = include_str!("../corpus/showcase.corec");

#[test]
fn corpus_verdicts() {
    let prog = parse_program(SHOWCASE).unwrap();
    let a = analyze(&prog);
    let expect = [
        ("repeat", Verdict::Guarded),
        ("from", Verdict::Guarded),
        ("mapinc", Verdict::Guarded),
        ("ctree", Verdict::Guarded),
        ("h3", Verdict::Guarded),
        ("filter", Verdict::TransformableUnguarded),
        ("dyn", Verdict::TransformableUnguarded),
        ("e_filter", Verdict::TransformableUnguarded),
        ("f", Verdict::TransformableUnguarded),
        ("nats", Verdict::RejectedStarStar),
    ];
    for (f, v) in expect {
        assert_eq!(a.verdict(f), Some(v), "{f}");
    }
    assert!(matches!(a.structural["div2"], StructuralVerdict::Accepted { param: Some(0) }));
    assert!(matches!(a.structural["log"], StructuralVerdict::Rejected { .. }));
}

#[test]
fn diagnostics_name_positions_and_conditions() {
    let prog = parse_program(SHOWCASE).unwrap();
    let a = analyze(&prog);
    let nats = &a.classifications["nats"];
    assert_eq!(nats.diagnostics.len(), 1);
    assert!(nats.diagnostics[0].contains("condition **"), "{}", nats.diagnostics[0]);
    assert!(nats.diagnostics[0].contains("`mapinc`"));
    let filter = &a.classifications["filter"];
    assert!(filter.diagnostics.iter().any(|d| d.contains("clause 2") && d.contains("condition *")));
    let StructuralVerdict::Rejected { reason, .. } = &a.structural["log"] else { unreachable!() };
    assert!(!reason.is_empty());
}

/// Bodies over one stream: the parameter, a recursive call, a constructor,
/// a unary guarded function and a binary one. Subterms are shared.
#[derive(Debug)]
enum T {
    S,
    Rec(Rc<T>),
    Cons(Rc<T>),
    Map(Rc<T>),
    Zip(Rc<T>, Rc<T>),
}

impl T {
    fn render(&self) -> String {
        match self {
            T::S => "tl".into(),
            T::Rec(a) => format!("f({})", a.render()),
            T::Cons(a) => format!("SCons(x, {})", a.render()),
            T::Map(a) => format!("mapinc({})", a.render()),
            T::Zip(a, b) => format!("zip({}, {})", a.render(), b.render()),
        }
    }

    fn children(&self) -> Vec<(usize, &T)> {
        match self {
            T::S => vec![],
            T::Rec(a) | T::Map(a) => vec![(0, &**a)],
            T::Cons(a) => vec![(1, &**a)],
            T::Zip(a, b) => vec![(0, &**a), (1, &**b)],
        }
    }
}

/// Every recursive call with its path, tagged from the list of enclosing
/// nodes: any enclosing function call is `**`, any enclosing recursive call
/// is nesting, a non-empty chain of constructors guards.
fn oracle_calls(t: &T, ancestors: &mut Vec<&'static str>, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, CallTag)>) {
    if let T::Rec(_) = t {
        let tag = if ancestors.contains(&"app") {
            CallTag::UnguardedStarStar
        } else if ancestors.contains(&"rec") {
            CallTag::UnsupportedNested
        } else if !ancestors.is_empty() {
            CallTag::GuardedCall
        } else {
            CallTag::UnguardedStar
        };
        out.push((path.clone(), tag));
    }
    let kind = match t {
        T::Rec(_) => "rec",
        T::Cons(_) => "ctor",
        _ => "app",
    };
    for (i, c) in t.children() {
        ancestors.push(kind);
        path.push(i);
        oracle_calls(c, ancestors, path, out);
        path.pop();
        ancestors.pop();
    }
}

fn oracle_verdict(bodies: &[&T]) -> (Verdict, Vec<(usize, Vec<usize>, CallTag)>) {
    let mut calls = Vec::new();
    for (ci, b) in bodies.iter().enumerate() {
        let mut found = Vec::new();
        oracle_calls(b, &mut Vec::new(), &mut Vec::new(), &mut found);
        calls.extend(found.into_iter().map(|(p, t)| (ci, p, t)));
    }
    let has = |t| calls.iter().any(|c| c.2 == t);
    let v = if has(CallTag::UnguardedStarStar) {
        Verdict::RejectedStarStar
    } else if has(CallTag::UnsupportedNested) {
        Verdict::RejectedUnsupported
    } else if !has(CallTag::UnguardedStar) {
        Verdict::Guarded
    } else if bodies.iter().all(|b| matches!(b, T::Rec(_) | T::Cons(_))) {
        Verdict::TransformableUnguarded
    } else {
        Verdict::RejectedUnsupported
    };
    (v, calls)
}

/// All bodies with exactly `n` syntax nodes; `SCons(x, t)` counts the
/// constructor and `x`.
fn terms_of_size(n: usize, memo: &mut Vec<Vec<Rc<T>>>) -> &[Rc<T>] {
    while memo.len() <= n {
        let k = memo.len();
        let mut ts = Vec::new();
        if k == 1 {
            ts.push(Rc::new(T::S));
        }
        if k >= 2 {
            for a in &memo[k - 1] {
                ts.push(Rc::new(T::Rec(a.clone())));
                ts.push(Rc::new(T::Map(a.clone())));
            }
        }
        if k >= 3 {
            ts.extend(memo[k - 2].iter().map(|a| Rc::new(T::Cons(a.clone()))));
        }
        for i in 1..k.saturating_sub(1) {
            for a in &memo[i] {
                for b in &memo[k - 1 - i] {
                    ts.push(Rc::new(T::Zip(a.clone(), b.clone())));
                }
            }
        }
        memo.push(ts);
    }
    &memo[n]
}

const SIG: &str = "\
codata Stream = SCons(nat, #)
cofun mapinc(s: Stream): Stream
  | SCons(x, tl) => SCons(x + 1, mapinc(tl))
cofun zip(a: Stream, b: Stream): Stream
  | SCons(x, ta), SCons(y, tb) => SCons(x, zip(tb, ta))
";

fn check(bodies: &[&T]) {
    let clauses = match bodies {
        [b] => format!("  | SCons(x, tl) => {}\n", b.render()),
        [b1, b2] => format!("  | SCons(x, tl) when x > 3 => {}\n  | SCons(x, tl) => {}\n", b1.render(), b2.render()),
        _ => unreachable!(),
    };
    let src = format!("{SIG}fun f(s: Stream): Stream\n{clauses}");
    let prog = parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let cls = classify_function(prog.fun("f").unwrap());
    let (v, calls) = oracle_verdict(bodies);
    assert_eq!(cls.verdict, v, "{src}");
    let got: Vec<_> = cls.calls.iter().map(|c| (c.clause, c.path.clone(), c.tag)).collect();
    assert_eq!(got, calls, "{src}");
}

/// Every single-clause body of up to 12 nodes, and every pair of bodies of
/// up to 5 nodes each.
#[test]
fn classifier_agrees_with_brute_force_oracle() {
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let checked: usize = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut memo = vec![Vec::new()];
                    let mut i = 0;
                    for n in 1..=12 {
                        for t in terms_of_size(n, &mut memo) {
                            if i % workers == w {
                                check(&[t]);
                            }
                            i += 1;
                        }
                    }
                    i
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).max().unwrap()
    });
    assert_eq!(checked, 594_611);
    let mut memo = vec![Vec::new()];
    let small: Vec<Rc<T>> = (1..=5).flat_map(|n| terms_of_size(n, &mut memo).to_vec()).collect();
    assert_eq!(small.len(), 85);
    for a in &small {
        for b in &small {
            check(&[a, b]);
        }
    }
}
