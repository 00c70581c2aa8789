mod common;

use corec_core::eval::{eval_base, Value};
use corec_core::pretty;
use corec_core::syntax::parse_program;
use proptest::prelude::*;

#[test]
fn corpus_round_trips() {
    for name in ["showcase", "dyn", "filter", "e_filter"] {
        let src = std::fs::read_to_string(format!("{}/corpus/{name}.corec", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let p = parse_program(&src).unwrap();
        let printed = pretty::program(&p);
        let q = parse_program(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(p, q, "{name}");
        assert_eq!(printed, pretty::program(&q));
    }
}

#[derive(Clone, Debug)]
enum N {
    Lit(u64),
    X,
    Y,
    Op(&'static str, Box<N>, Box<N>),
    If(Box<B>, Box<N>, Box<N>),
    Succ(Box<N>),
}

#[derive(Clone, Debug)]
enum B {
    Lit(bool),
    Not(Box<B>),
    And(Box<B>, Box<B>),
    Or(Box<B>, Box<B>),
    Cmp(&'static str, Box<N>, Box<N>),
    Even(Box<N>),
}

impl N {
    fn text(&self) -> String {
        match self {
            N::Lit(n) => n.to_string(),
            N::X => "x".into(),
            N::Y => "y".into(),
            N::Op(o, a, b) => format!("({} {o} {})", a.text(), b.text()),
            N::If(c, t, e) => format!("(if {} then {} else {})", c.text(), t.text(), e.text()),
            N::Succ(a) => format!("g({})", a.text()),
        }
    }

    fn eval(&self, x: u64, y: u64) -> u64 {
        match self {
            N::Lit(n) => *n,
            N::X => x,
            N::Y => y,
            N::Op(o, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match *o {
                    "+" => a.saturating_add(b),
                    "-" => a.saturating_sub(b),
                    "*" => a.saturating_mul(b),
                    // Division and remainder by zero yield 0.
                    "/" => a.checked_div(b).unwrap_or(0),
                    _ => a.checked_rem(b).unwrap_or(0),
                }
            }
            N::If(c, t, e) => {
                if c.eval(x, y) {
                    t.eval(x, y)
                } else {
                    e.eval(x, y)
                }
            }
            N::Succ(a) => a.eval(x, y).saturating_add(1),
        }
    }
}

impl B {
    fn text(&self) -> String {
        match self {
            B::Lit(b) => b.to_string(),
            B::Not(a) => format!("!({})", a.text()),
            B::And(a, b) => format!("({} && {})", a.text(), b.text()),
            B::Or(a, b) => format!("({} || {})", a.text(), b.text()),
            B::Cmp(o, a, b) => format!("({} {o} {})", a.text(), b.text()),
            B::Even(a) => format!("even({})", a.text()),
        }
    }

    fn eval(&self, x: u64, y: u64) -> bool {
        match self {
            B::Lit(b) => *b,
            B::Not(a) => !a.eval(x, y),
            B::And(a, b) => a.eval(x, y) && b.eval(x, y),
            B::Or(a, b) => a.eval(x, y) || b.eval(x, y),
            B::Cmp(o, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match *o {
                    "==" => a == b,
                    "!=" => a != b,
                    "<" => a < b,
                    "<=" => a <= b,
                    ">" => a > b,
                    _ => a >= b,
                }
            }
            B::Even(a) => a.eval(x, y) % 2 == 0,
        }
    }
}

fn nat_tree() -> BoxedStrategy<N> {
    let leaf = prop_oneof![(0u64..20).prop_map(N::Lit), Just(N::X), Just(N::Y)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["+", "-", "*", "/", "mod"]), inner.clone(), inner.clone()).prop_map(|(o, a, b)| N::Op(
                o,
                Box::new(a),
                Box::new(b)
            )),
            inner.clone().prop_map(|a| N::Succ(Box::new(a))),
            (bool_over(inner.clone()), inner.clone(), inner).prop_map(|(c, t, e)| N::If(Box::new(c), Box::new(t), Box::new(e))),
        ]
    })
    .boxed()
}

fn bool_over(n: impl Strategy<Value = N> + Clone + 'static) -> impl Strategy<Value = B> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(B::Lit),
        (prop::sample::select(vec!["==", "!=", "<", "<=", ">", ">="]), n.clone(), n.clone()).prop_map(|(o, a, b)| B::Cmp(
            o,
            Box::new(a),
            Box::new(b)
        )),
        n.prop_map(|a| B::Even(Box::new(a))),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| B::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| B::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| B::Or(Box::new(a), Box::new(b))),
        ]
    })
}

const HELPERS: &str = "def g(x) = x + 1\ndef even(x) = x mod 2 == 0\n";

fn body(src: &str) -> corec_core::ast::BaseExpr {
    let p = parse_program(&format!("{HELPERS}def t(x, y) = {src}")).unwrap_or_else(|e| panic!("{e}\n{src}"));
    p.helper("t").unwrap().body.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    /// Printing keeps only the parentheses precedence needs; the result
    /// parses back to the same tree and means what the fully bracketed
    /// source meant.
    #[test]
    fn nat_expressions_round_trip(t in nat_tree(), x in 0u64..50, y in 0u64..50) {
        let prog = parse_program(HELPERS).unwrap();
        let e = body(&t.text());
        let printed = pretty::base(&e);
        let again = body(&printed);
        prop_assert_eq!(&e, &again);
        prop_assert_eq!(&printed, &pretty::base(&again));
        let env = [("x", Value::Nat(x)), ("y", Value::Nat(y))];
        prop_assert_eq!(eval_base(&prog, &again, &env).unwrap().as_nat().unwrap(), t.eval(x, y));
    }

    #[test]
    fn bool_expressions_round_trip(t in bool_over(nat_tree()), x in 0u64..50, y in 0u64..50) {
        let prog = parse_program(HELPERS).unwrap();
        let e = body(&t.text());
        let printed = pretty::base(&e);
        let again = body(&printed);
        prop_assert_eq!(&e, &again);
        let env = [("x", Value::Nat(x)), ("y", Value::Nat(y))];
        prop_assert_eq!(eval_base(&prog, &again, &env).unwrap().as_bool().unwrap(), t.eval(x, y));
    }

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let g = common::generate(seed);
        let p = parse_program(&g.src).unwrap();
        let printed = pretty::program(&p);
        let q = parse_program(&printed).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(printed, pretty::program(&q));
    }
}
