//! Seeded generator of transformable programs.
//!
//! Every generated function has at least one clause whose body is a bare
//! recursive call and every other clause is headed by a constructor, so the
//! classifier must answer `TransformableUnguarded`.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PRELUDE: &str = "\
codata Stream = SCons(nat, #)
codata Tree = Leaf(nat, #) | Node(nat, #, #)

def even(x) = x mod 2 == 0
def bump(x, y) = x + y mod 3

cofun from(n: nat): Stream = SCons(n, from(n + 1))
cofun repeat(a: nat): Stream = SCons(a, repeat(a))
cofun zig(n: nat): Stream = SCons(n mod 7, zig(n + 3))
cofun spine(n: nat): Tree = Leaf(n, spine(n + 2))
";

#[derive(Clone, Debug)]
pub struct Generated {
    pub seed: u64,
    pub src: String,
    pub fun: String,
    /// Closed argument lists, each in `parse_args` syntax.
    pub args: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Nat,
    NatPair,
    Numeral,
    Stream,
    AccStream,
    Window,
    TreeOut,
}

pub fn generate(seed: u64) -> Generated {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed) };
    let shape = *[Shape::Nat, Shape::NatPair, Shape::Numeral, Shape::Stream, Shape::AccStream, Shape::Window, Shape::TreeOut]
        .choose(&mut g.rng)
        .unwrap();
    let (decl, args) = match shape {
        Shape::Nat => g.nat_fun(),
        Shape::NatPair => g.nat_pair_fun(),
        Shape::Numeral => g.numeral_fun(),
        Shape::Stream => g.stream_fun(false),
        Shape::AccStream => g.stream_fun(true),
        Shape::Window => g.window_fun(),
        Shape::TreeOut => g.tree_fun(),
    };
    Generated { seed, src: format!("{PRELUDE}\n{decl}"), fun: "f".into(), args }
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn nat(&mut self, vars: &[&str]) -> String {
        let v = self.pick(vars);
        match self.rng.gen_range(0..8) {
            0 => self.rng.gen_range(0..10).to_string(),
            1 => format!("{v} + {}", self.rng.gen_range(1..5)),
            2 => format!("{v} * {}", self.rng.gen_range(2..4)),
            3 => format!("{v} mod {}", self.rng.gen_range(2..9)),
            4 => format!("{v} - 1"),
            5 => format!("bump({v}, {})", self.rng.gen_range(0..5)),
            6 if vars.len() > 1 => format!("{} + {}", vars[0], vars[1]),
            _ => v.to_string(),
        }
    }

    /// An argument for a recursive call over a nat: mostly increasing.
    fn step(&mut self, v: &str) -> String {
        match self.rng.gen_range(0..10) {
            0 => format!("{v} - 1"),
            1 => format!("{v} * 2"),
            2 => format!("bump({v}, 1)"),
            _ => format!("{v} + {}", self.rng.gen_range(1..4)),
        }
    }

    fn pred(&mut self, vars: &[&str]) -> String {
        let v = self.pick(vars);
        let m = self.rng.gen_range(2..6);
        let atom = match self.rng.gen_range(0..6) {
            0 => format!("{v} mod {m} != {}", self.rng.gen_range(0..m)),
            1 => format!("even({v})"),
            2 => format!("{v} > {}", self.rng.gen_range(0..12)),
            3 => format!("!({v} < {})", self.rng.gen_range(0..6)),
            _ => format!("{v} mod {m} == {}", self.rng.gen_range(0..m)),
        };
        match self.rng.gen_range(0..8) {
            0 => format!("{atom} || {v} == {}", self.rng.gen_range(0..20)),
            1 => format!("{atom} && {v} <= {}", self.rng.gen_range(20..60)),
            _ => atom,
        }
    }

    fn guard(&mut self, vars: &[&str], p: f64) -> String {
        if self.chance(p) {
            format!(" when {}", self.pred(vars))
        } else {
            String::new()
        }
    }

    /// A stream-producing body around the recursive call `rec`.
    fn stream_head(&mut self, vars: &[&str], rec: &str, plain: Option<&str>) -> String {
        match self.rng.gen_range(0..6) {
            0 => format!("SCons({}, SCons({}, {rec}))", self.nat(vars), self.nat(vars)),
            1 if plain.is_some() => format!("SCons({}, {})", self.nat(vars), plain.unwrap()),
            _ => format!("SCons({}, {rec})", self.nat(vars)),
        }
    }

    fn nat_args(&mut self, n: usize) -> Vec<String> {
        (0..4).map(|_| (0..n).map(|_| self.rng.gen_range(0..30).to_string()).collect::<Vec<_>>().join(", ")).collect()
    }

    fn stream_arg(&mut self) -> String {
        let k = self.rng.gen_range(0..20);
        match self.rng.gen_range(0..4) {
            0 => format!("repeat({})", k % 4),
            1 => format!("zig({k})"),
            _ => format!("from({k})"),
        }
    }

    fn nat_fun(&mut self) -> (String, Vec<String>) {
        let mut clauses = Vec::new();
        for _ in 0..self.rng.gen_range(1..4) {
            if self.chance(0.6) {
                let g = format!(" when {}", self.pred(&["x"]));
                let rec = format!("f({})", self.step("x"));
                clauses.push(format!("  | x{g} => {}", self.stream_head(&["x"], &rec, None)));
            } else {
                let g = format!(" when {}", self.pred(&["x"]));
                clauses.push(format!("  | x{g} => f({})", self.step("x")));
            }
        }
        if !clauses.iter().any(|c| c.contains("=> SCons")) {
            let rec = format!("f({})", self.step("x"));
            clauses.insert(0, format!("  | x when {} => SCons(x, {rec})", self.pred(&["x"])));
        }
        clauses.push(format!("  | x => f({})", self.step("x")));
        (format!("fun f(x: nat): Stream\n{}\n", clauses.join("\n")), self.nat_args(1))
    }

    fn nat_pair_fun(&mut self) -> (String, Vec<String>) {
        let vars = ["x", "k"];
        let prod = format!("f({}, {})", self.step("x"), self.nat(&vars));
        let head = self.stream_head(&vars, &prod, None);
        let mut clauses = vec![format!("  | x, k when {} => {head}", self.pred(&vars))];
        if self.chance(0.5) {
            let g = self.pred(&vars);
            clauses.push(format!("  | x, k when {g} => f({}, {})", self.step("x"), self.step("k")));
        }
        clauses.push(format!("  | x, k => f({}, k)", self.step("x")));
        clauses.shuffle(&mut self.rng);
        if !clauses.last().unwrap().starts_with("  | x, k =>") {
            clauses.push(format!("  | x, k => f({}, k)", self.step("x")));
        }
        (format!("fun f(x: nat, k: nat): Stream\n{}\n", clauses.join("\n")), self.nat_args(2))
    }

    fn numeral_fun(&mut self) -> (String, Vec<String>) {
        let c = self.rng.gen_range(0..5);
        let zero = if self.chance(0.5) {
            format!("  | 0 => SCons({c}, f({}))", self.rng.gen_range(1..8))
        } else {
            format!("  | 0 => f({})", self.rng.gen_range(1..8))
        };
        let g = self.guard(&["n"], 0.7);
        let rec = format!("f({})", self.step("n"));
        let succ = format!("  | S(n){g} => {}", self.stream_head(&["n"], &rec, None));
        let rest = format!("  | y => f({})", self.step("y"));
        (format!("fun f(x: nat): Stream\n{zero}\n{succ}\n{rest}\n"), self.nat_args(1))
    }

    fn stream_fun(&mut self, acc: bool) -> (String, Vec<String>) {
        let (params, lhs, vars): (&str, &str, &[&str]) =
            if acc { ("n: nat, s: Stream", "n, SCons(x, tl)", &["x", "n"]) } else { ("s: Stream", "SCons(x, tl)", &["x"]) };
        let call = |g: &mut Gen, tail: &str| {
            if acc {
                format!("f({}, {tail})", g.nat(&["n", "x"]))
            } else {
                format!("f({tail})")
            }
        };
        let mut clauses = Vec::new();
        let rec = call(self, "tl");
        let head = self.stream_head(vars, &rec, Some("tl"));
        clauses.push(format!("  | {lhs} when {} => {head}", self.pred(vars)));
        if self.chance(0.5) {
            let tail = format!("SCons({}, tl)", self.nat(vars));
            let rec = call(self, &tail);
            clauses.push(format!("  | {lhs} when {} => {rec}", self.pred(vars)));
        }
        if self.chance(0.4) {
            let rec = call(self, "tl");
            let head = self.stream_head(vars, &rec, None);
            clauses.push(format!("  | {lhs} when {} => {head}", self.pred(vars)));
        }
        clauses.shuffle(&mut self.rng);
        let last = call(self, "tl");
        clauses.push(format!("  | {lhs} => {last}"));
        let args = (0..4)
            .map(|_| {
                let s = self.stream_arg();
                if acc {
                    format!("{}, {s}", self.rng.gen_range(0..10))
                } else {
                    s
                }
            })
            .collect();
        (format!("fun f({params}): Stream\n{}\n", clauses.join("\n")), args)
    }

    fn window_fun(&mut self) -> (String, Vec<String>) {
        let op = self.pick(&["<=", "<", "!=", ">"]);
        let head = self.stream_head(&["x", "y"], "f(SCons(y, tl))", None);
        let shrink = self.pick(&["x - 1", "x + 1", "y", "x + y"]);
        let decl = format!(
            "fun f(s: Stream): Stream\n  | SCons(x, SCons(y, tl)) when x {op} y => {head}\n  | SCons(x, SCons(y, tl)) => f(SCons({shrink}, SCons(y, tl)))\n"
        );
        let args = (0..4).map(|_| self.stream_arg()).collect();
        (decl, args)
    }

    fn tree_fun(&mut self) -> (String, Vec<String>) {
        let mut clauses = Vec::new();
        let leaf_rec = format!("f({})", self.step("x"));
        clauses.push(format!("  | x when {} => Leaf({}, {leaf_rec})", self.pred(&["x"]), self.nat(&["x"])));
        if self.chance(0.6) {
            let other = if self.chance(0.15) { format!("f({})", self.step("x")) } else { format!("spine({})", self.nat(&["x"])) };
            let rec = format!("f({})", self.step("x"));
            let (l, r) = if self.chance(0.5) { (rec, other) } else { (other, rec) };
            clauses.push(format!("  | x when {} => Node({}, {l}, {r})", self.pred(&["x"]), self.nat(&["x"])));
        }
        if self.chance(0.4) {
            clauses.push(format!("  | x when {} => f({})", self.pred(&["x"]), self.step("x")));
        }
        clauses.shuffle(&mut self.rng);
        clauses.push(format!("  | x => f({})", self.step("x")));
        (format!("fun f(x: nat): Tree\n{}\n", clauses.join("\n")), self.nat_args(1))
    }
}
