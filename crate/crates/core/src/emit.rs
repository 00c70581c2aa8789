//! Rendering as a proof-assistant script and as a JSON report.
//!
//! Every transformable definition becomes, in order: its `eventually`
//! predicate, the inversion lemmas, the inductive component `pre_f`, the
//! `infinite` copredicate with its two lemmas, the guarded cofixpoint and
//! the irrelevance, step and equation statements. Guarded definitions are
//! rendered directly as cofixpoints. Lemma statements end in `Admitted`.
//!
//! The inductive component returns a pair (head payloads, next arguments)
//! when every producing clause builds the same head with one corecursive
//! call; otherwise it returns a generated inductive with one constructor
//! per producing clause.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use crate::analysis::Analysis;
use crate::ast::*;
use crate::guard::{CallInfo, StructuralVerdict, Verdict};
use crate::transform::{overlaps, pattern_binders, Counts, Exclusion, HeadArg, HeadNode, HeadSpec, Hole, PreBranch, TransformArtifacts};

const PREAMBLE: &str = "\
Require Import Arith Bool.

Definition nmod (a b : nat) : nat :=
  match b with
  | 0 => 0
  | _ => Nat.modulo a b
  end.

Ltac corec_side :=
  solve [ assumption | reflexivity | congruence
        | let H := fresh \"H\" in
          intro H;
          repeat match goal with
                 | X : ex _ |- _ => destruct X
                 | X : _ /\\ _ |- _ => destruct X
                 end;
          congruence ].
";

/// Renders the whole program: preamble, then every declaration in source
/// order, transformable definitions expanded into their components.
pub fn emit_program(prog: &Program, analysis: &Analysis) -> String {
    let mut out = String::from(PREAMBLE);
    for d in &prog.decls {
        out.push('\n');
        match d {
            Decl::Codata(c) => out.push_str(&codata(c)),
            Decl::Def(h) => out.push_str(&helper(prog, h)),
            Decl::Rec(r) => out.push_str(&rec(prog, r, analysis.structural.get(&r.name))),
            Decl::Fun(f) => match analysis.classifications.get(&f.name) {
                Some(c) if c.verdict == Verdict::TransformableUnguarded => match analysis.artifacts(&f.name) {
                    Some(art) => out.push_str(&emit(prog, art)),
                    None => out.push_str(&rejected(f, c.verdict, &["no head constructor in some clause".into()])),
                },
                Some(c) if c.verdict.is_rejected() => out.push_str(&rejected(f, c.verdict, &c.diagnostics)),
                _ => out.push_str(&cofixpoint(prog, f)),
            },
        }
    }
    out
}

/// Renders the components of one transformed definition.
pub fn emit(prog: &Program, art: &TransformArtifacts) -> String {
    let fun = prog.fun(&art.fun).expect("artifacts belong to a definition of the program");
    Split::new(prog, fun, art).render()
}

fn comment(s: &str) -> String {
    format!("(* {} *)", s.replace("(*", "( *").replace("*)", "* )"))
}

fn coq_type(t: &Type) -> String {
    t.to_string()
}

fn right_tuple(items: &[String]) -> String {
    match items {
        [] => "tt".into(),
        [x] => x.clone(),
        [x, rest @ ..] => format!("({x}, {})", right_tuple(rest)),
    }
}

fn right_tuple_type(items: &[String]) -> String {
    match items {
        [] => "unit".into(),
        [x] => x.clone(),
        [x, rest @ ..] => {
            let tail = right_tuple_type(rest);
            if rest.len() > 1 {
                format!("{x} * ({tail})")
            } else {
                format!("{x} * {tail}")
            }
        }
    }
}

/// The `k`-th of `n` components of a right-nested tuple `v` (atomic).
fn tuple_proj(v: &str, k: usize, n: usize) -> String {
    if n == 1 {
        return v.to_string();
    }
    let mut e = v.to_string();
    for _ in 0..k {
        e = format!("(snd {e})");
    }
    if k + 1 < n {
        e = format!("(fst {e})");
    }
    e
}

/// The `k`-th of `n` conjuncts of a right-nested conjunction proof.
fn conj_proj(v: &str, k: usize, n: usize) -> String {
    if n <= 1 {
        return v.to_string();
    }
    let mut e = v.to_string();
    for _ in 0..k {
        e = format!("(proj2 {e})");
    }
    if k + 1 < n {
        e = format!("(proj1 {e})");
    }
    e
}

fn conj(items: &[String]) -> String {
    if items.is_empty() {
        "True".into()
    } else {
        items.join(" /\\ ")
    }
}

fn fresh(base: &str, used: &BTreeSet<String>) -> String {
    let mut s = base.to_string();
    while used.contains(&s) {
        s.push('\'');
    }
    s
}

fn codata(c: &CodataDef) -> String {
    let mut s = format!("CoInductive {} : Set :=\n", c.name);
    for k in &c.ctors {
        let mut ty: Vec<String> = k
            .fields
            .iter()
            .map(|f| match f {
                FieldKind::Payload(b) => b.to_string(),
                FieldKind::Slot => c.name.clone(),
            })
            .collect();
        ty.push(c.name.clone());
        let _ = writeln!(s, "| {} : {}", k.name, ty.join(" -> "));
    }
    s.pop();
    s.push_str(".\n\n");
    let _ = writeln!(s, "CoInductive bisimilar_{0} : {0} -> {0} -> Prop :=", c.name);
    for k in &c.ctors {
        let mut binders = Vec::new();
        let mut premises = Vec::new();
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for (i, f) in k.fields.iter().enumerate() {
            match f {
                FieldKind::Payload(b) => {
                    binders.push(format!("(x{i} : {b})"));
                    l.push(format!("x{i}"));
                    r.push(format!("x{i}"));
                }
                FieldKind::Slot => {
                    binders.push(format!("(t{i} t{i}' : {})", c.name));
                    premises.push(format!("bisimilar_{} t{i} t{i}'", c.name));
                    l.push(format!("t{i}"));
                    r.push(format!("t{i}'"));
                }
            }
        }
        let app = |args: &[String]| if args.is_empty() { k.name.clone() } else { format!("({} {})", k.name, args.join(" ")) };
        let forall = if binders.is_empty() { String::new() } else { format!(" forall {},", binders.join(" ")) };
        premises.push(format!("bisimilar_{} {} {}", c.name, app(&l), app(&r)));
        let _ = writeln!(s, "| bisim_{} :{forall}\n    {}", k.name, premises.join(" -> "));
    }
    s.pop();
    s.push_str(".\n");
    s
}

fn helper(prog: &Program, h: &HelperDef) -> String {
    let scope = Scope::typed(h.params.iter().map(|(n, t)| (n.clone(), Type::Base(*t))));
    let params: Vec<String> = h.params.iter().map(|(n, t)| format!("({n} : {t})")).collect();
    format!("Definition {} {} : {} :=\n  {}.\n", h.name, params.join(" "), h.ret, Render { prog }.base_top(&h.body, &scope))
}

fn rec(prog: &Program, r: &RecFunDef, verdict: Option<&StructuralVerdict>) -> String {
    let r_ = Render { prog };
    let scope = Scope::typed(r.params.iter().map(|n| (n.clone(), Type::Base(BaseType::Nat))));
    let params: Vec<String> = r.params.iter().map(|n| format!("({n} : nat)")).collect();
    let arms: String = r
        .clauses
        .iter()
        .map(|c| {
            let mut sc = scope.clone();
            let mut bs = Vec::new();
            c.pats.iter().for_each(|p| p.binders(&mut bs));
            for b in bs {
                sc.types.insert(b, Type::Base(BaseType::Nat));
            }
            let pats: Vec<String> = c.pats.iter().map(|p| coq_pattern(p, false)).collect();
            format!("  | {} => {}\n", pats.join(", "), r_.base_top(&c.body, &sc))
        })
        .collect();
    let body = format!("  match {} with\n{arms}  end", r.params.join(", "));
    match verdict {
        Some(StructuralVerdict::Accepted { param: Some(i) }) => {
            format!("Fixpoint {} {} {{struct {}}} : nat :=\n{body}.\n", r.name, params.join(" "), r.params[*i])
        }
        Some(StructuralVerdict::Accepted { param: None }) => format!("Definition {} {} : nat :=\n{body}.\n", r.name, params.join(" ")),
        Some(StructuralVerdict::Rejected { reason, .. }) => {
            let ty = vec!["nat"; r.params.len() + 1].join(" -> ");
            format!("{}\nParameter {} : {ty}.\n", comment(&format!("{}: not structurally recursive: {reason}", r.name)), r.name)
        }
        None => String::new(),
    }
}

fn rejected(f: &FunDef, verdict: Verdict, diagnostics: &[String]) -> String {
    let mut s = comment(&format!("{}: {verdict}; not definable by guarded corecursion", f.name));
    s.push('\n');
    for d in diagnostics {
        s.push_str(&comment(d));
        s.push('\n');
    }
    s
}

fn cofixpoint(prog: &Program, f: &FunDef) -> String {
    let clauses: Vec<NClause> = (0..f.clauses.len()).map(|i| NClause::new(prog, f, i)).collect();
    let r = Render { prog };
    let used = identifiers(prog, f);
    let compiler = Compiler { prog, fun: f, mode: Mode::Plain, counter: Cell::new(0), used: &used };
    let name = f.name.clone();
    let body = compiler.compile(&Compiler::rows(&clauses), 2, &|c: &NClause, _| {
        r.co_top(&c.body, &c.scope, &|args, sc| format!("({name} {})", r.args(args, sc).join(" ")))
    });
    format!("CoFixpoint {} {} : {} :=\n  {body}.\n", f.name, param_binders(&f.params), f.ret)
}

fn param_binders(params: &[Param]) -> String {
    params.iter().map(|p| format!("({} : {})", p.name, coq_type(&p.ty))).collect::<Vec<_>>().join(" ")
}

fn param_names(params: &[Param]) -> Vec<String> {
    params.iter().map(|p| p.name.clone()).collect()
}

/// Every identifier a generated local name could capture.
fn identifiers(prog: &Program, f: &FunDef) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for d in &prog.decls {
        s.insert(d.name().to_string());
        if let Decl::Codata(c) = d {
            s.extend(c.ctors.iter().map(|k| k.name.clone()));
        }
    }
    s.extend(f.params.iter().map(|p| p.name.clone()));
    for c in &f.clauses {
        let mut bs = Vec::new();
        c.pats.iter().for_each(|p| p.binders(&mut bs));
        s.extend(bs);
    }
    s
}

/// Renders a pattern; `wrap` parenthesizes applications.
fn coq_pattern(p: &Pattern, wrap: bool) -> String {
    if let Some(n) = p.as_numeral() {
        return n.to_string();
    }
    let s = match p {
        Pattern::Var(v) => return v.clone(),
        Pattern::Wild => return "_".into(),
        Pattern::Bool(b) => return b.to_string(),
        Pattern::Zero => return "0".into(),
        Pattern::Succ(q) => format!("S {}", coq_pattern(q, true)),
        Pattern::Ctor(n, ps) if ps.is_empty() => return n.clone(),
        Pattern::Ctor(n, ps) => format!("{n} {}", ps.iter().map(|q| coq_pattern(q, true)).collect::<Vec<_>>().join(" ")),
    };
    if wrap {
        format!("({s})")
    } else {
        s
    }
}

/// Variable renaming and typing for rendering expressions.
#[derive(Clone, Default)]
struct Scope {
    names: BTreeMap<String, String>,
    types: BTreeMap<String, Type>,
}

impl Scope {
    fn typed(it: impl IntoIterator<Item = (String, Type)>) -> Scope {
        Scope { names: BTreeMap::new(), types: it.into_iter().collect() }
    }

    fn name(&self, v: &str) -> String {
        self.names.get(v).cloned().unwrap_or_else(|| v.to_string())
    }
}

struct Render<'a> {
    prog: &'a Program,
}

impl Render<'_> {
    fn ty(&self, e: &BaseExpr, sc: &Scope) -> BaseType {
        match e {
            BaseExpr::Nat(_) => BaseType::Nat,
            BaseExpr::Bool(_) | BaseExpr::Not(_) => BaseType::Bool,
            BaseExpr::Var(v) => match sc.types.get(v) {
                Some(Type::Base(b)) => *b,
                _ => BaseType::Nat,
            },
            BaseExpr::Bin(op, _, _) if op.is_arithmetic() => BaseType::Nat,
            BaseExpr::Bin(..) => BaseType::Bool,
            BaseExpr::If(_, t, _) => self.ty(t, sc),
            BaseExpr::Call(f, _) => self.prog.helper(f).map(|h| h.ret).unwrap_or(BaseType::Nat),
        }
    }

    /// Renders without outer parentheses.
    fn base_top(&self, e: &BaseExpr, sc: &Scope) -> String {
        let a = |x: &BaseExpr| self.base(x, sc);
        match e {
            BaseExpr::Nat(n) => n.to_string(),
            BaseExpr::Bool(b) => b.to_string(),
            BaseExpr::Var(v) => sc.name(v),
            BaseExpr::Not(x) => format!("negb {}", a(x)),
            BaseExpr::If(c, t, f) => format!("if {} then {} else {}", self.base_top(c, sc), self.base_top(t, sc), self.base_top(f, sc)),
            BaseExpr::Call(f, args) if args.is_empty() => f.clone(),
            BaseExpr::Call(f, args) => format!("{f} {}", args.iter().map(a).collect::<Vec<_>>().join(" ")),
            BaseExpr::Bin(op, l, r) => {
                let (x, y) = (a(l), a(r));
                let infix = |e: &BaseExpr| match e {
                    BaseExpr::Call(..) => self.base_top(e, sc),
                    _ => a(e),
                };
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => format!("{} {} {}", infix(l), op.symbol(), infix(r)),
                    BinOp::Div => format!("Nat.div {x} {y}"),
                    BinOp::Mod => format!("nmod {x} {y}"),
                    BinOp::Eq | BinOp::Ne => {
                        let eqb = match self.ty(l, sc) {
                            BaseType::Nat => "Nat.eqb",
                            BaseType::Bool => "Bool.eqb",
                        };
                        if *op == BinOp::Eq {
                            format!("{eqb} {x} {y}")
                        } else {
                            format!("negb ({eqb} {x} {y})")
                        }
                    }
                    BinOp::Lt => format!("Nat.ltb {x} {y}"),
                    BinOp::Le => format!("Nat.leb {x} {y}"),
                    BinOp::Gt => format!("Nat.ltb {y} {x}"),
                    BinOp::Ge => format!("Nat.leb {y} {x}"),
                    BinOp::And => format!("andb {x} {y}"),
                    BinOp::Or => format!("orb {x} {y}"),
                }
            }
        }
    }

    fn base(&self, e: &BaseExpr, sc: &Scope) -> String {
        match e {
            BaseExpr::Nat(_) | BaseExpr::Bool(_) | BaseExpr::Var(_) => self.base_top(e, sc),
            BaseExpr::Call(_, args) if args.is_empty() => self.base_top(e, sc),
            _ => format!("({})", self.base_top(e, sc)),
        }
    }

    fn args(&self, args: &[Arg], sc: &Scope) -> Vec<String> {
        args.iter()
            .map(|a| match a {
                Arg::Base(b) => self.base(b, sc),
                Arg::Co(c) => self.co(c, sc, &|_, _| "_".into()),
            })
            .collect()
    }

    /// Renders arguments for a comma-separated position.
    fn args_top(&self, args: &[Arg], sc: &Scope) -> Vec<String> {
        args.iter()
            .map(|a| match a {
                Arg::Base(b) => self.base_top(b, sc),
                Arg::Co(c) => self.co_top(c, sc, &|_, _| "_".into()),
            })
            .collect()
    }

    fn args_with(&self, args: &[Arg], sc: &Scope, rec: &dyn Fn(&[Arg], &Scope) -> String) -> Vec<String> {
        args.iter()
            .map(|a| match a {
                Arg::Base(b) => self.base(b, sc),
                Arg::Co(c) => self.co(c, sc, rec),
            })
            .collect()
    }

    /// Renders a co-expression; `rec` renders self-calls (atomic).
    fn co(&self, e: &CoExpr, sc: &Scope, rec: &dyn Fn(&[Arg], &Scope) -> String) -> String {
        match e {
            CoExpr::Var(v) => sc.name(v),
            CoExpr::Rec { args, .. } => rec(args, sc),
            CoExpr::Ctor { name, args } | CoExpr::App { name, args, .. } if args.is_empty() => name.clone(),
            _ => format!("({})", self.co_top(e, sc, rec)),
        }
    }

    fn co_top(&self, e: &CoExpr, sc: &Scope, rec: &dyn Fn(&[Arg], &Scope) -> String) -> String {
        match e {
            CoExpr::Ctor { name, args } | CoExpr::App { name, args, .. } if !args.is_empty() => {
                format!("{name} {}", self.args_with(args, sc, rec).join(" "))
            }
            _ => {
                let s = self.co(e, sc, rec);
                s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).map(str::to_string).unwrap_or(s)
            }
        }
    }
}

/// A clause with every wildcard named, top-level variables renamed to the
/// parameters they bind, and other binders kept apart from parameter names.
struct NClause {
    index: usize,
    pats: Vec<Pattern>,
    guard: Option<BaseExpr>,
    body: CoExpr,
    /// Binders other than the parameters, with types.
    binders: Vec<(String, Type)>,
    scope: Scope,
    rename: BTreeMap<String, String>,
}

fn name_wilds(p: &Pattern, base: &str, used: &mut BTreeSet<String>) -> Pattern {
    match p {
        Pattern::Wild => {
            let n = fresh(base, used);
            used.insert(n.clone());
            Pattern::Var(n)
        }
        Pattern::Succ(q) => Pattern::Succ(Box::new(name_wilds(q, &format!("{base}_0"), used))),
        Pattern::Ctor(n, ps) => {
            Pattern::Ctor(n.clone(), ps.iter().enumerate().map(|(i, q)| name_wilds(q, &format!("{base}_{i}"), used)).collect())
        }
        other => other.clone(),
    }
}

impl NClause {
    fn new(prog: &Program, f: &FunDef, index: usize) -> NClause {
        let c = &f.clauses[index];
        let params: BTreeSet<String> = f.params.iter().map(|p| p.name.clone()).collect();
        let mut used: BTreeSet<String> = params.clone();
        let mut bs = Vec::new();
        c.pats.iter().for_each(|p| p.binders(&mut bs));
        used.extend(bs.iter().cloned());
        let mut rename: BTreeMap<String, String> = BTreeMap::new();
        // Top-level variables alias their parameter.
        for (p, q) in c.pats.iter().zip(&f.params) {
            if let Pattern::Var(v) = p {
                rename.insert(v.clone(), q.name.clone());
            }
        }
        // Nested binders must not capture a parameter.
        for b in &bs {
            if params.contains(b) && !rename.contains_key(b) {
                let n = fresh(&format!("{b}'"), &used);
                used.insert(n.clone());
                rename.insert(b.clone(), n);
            }
        }
        let pats: Vec<Pattern> = c
            .pats
            .iter()
            .zip(&f.params)
            .enumerate()
            .map(|(k, (p, q))| match p {
                Pattern::Var(_) | Pattern::Wild => Pattern::Var(q.name.clone()),
                _ => name_wilds(&p.rename(&|v| rename.get(v).cloned()), &format!("w{k}"), &mut used),
            })
            .collect();
        let base_map = |v: &str| rename.get(v).map(|n| BaseExpr::var(n.clone()));
        let co_map = |v: &str| rename.get(v).map(|n| CoExpr::Var(n.clone()));
        let guard = c.guard.as_ref().map(|g| g.subst(&base_map));
        let body = c.body.subst(&base_map, &co_map);
        let mut typed = Vec::new();
        for (p, q) in pats.iter().zip(&f.params) {
            pattern_binders(prog, p, &q.ty, &mut typed);
        }
        let binders: Vec<(String, Type)> = typed.iter().filter(|(n, _)| !params.contains(n)).cloned().collect();
        let scope = Scope::typed(f.params.iter().map(|p| (p.name.clone(), p.ty.clone())).chain(typed));
        NClause { index, pats, guard, body, binders, scope, rename }
    }

    fn terms(&self) -> Vec<String> {
        self.pats.iter().map(|p| coq_pattern(p, true)).collect()
    }

    /// Binders of a statement over the clause's terms rather than the
    /// parameters: aliasing parameters and pattern binders, by position.
    fn term_binders(&self, f: &FunDef) -> String {
        let mut out = Vec::new();
        for (p, q) in self.pats.iter().zip(&f.params) {
            match p {
                Pattern::Var(v) => out.push(format!("({v} : {})", coq_type(&q.ty))),
                _ => {
                    let mut bs = Vec::new();
                    p.binders(&mut bs);
                    for b in bs {
                        let t = self.scope.types.get(&b).map(coq_type).unwrap_or_else(|| "nat".into());
                        out.push(format!("({b} : {t})"));
                    }
                }
            }
        }
        out.join(" ")
    }

    fn binder_names(&self) -> Vec<String> {
        self.binders.iter().map(|(n, _)| n.clone()).collect()
    }

    fn forall_binders(&self) -> String {
        self.binders.iter().map(|(n, t)| format!("({n} : {})", coq_type(t))).collect::<Vec<_>>().join(" ")
    }

    /// `param = pattern` for every refutable position.
    fn equations(&self, f: &FunDef) -> Vec<String> {
        self.pats
            .iter()
            .zip(&f.params)
            .filter(|(p, _)| !matches!(p, Pattern::Var(_)))
            .map(|(p, q)| format!("{} = {}", q.name, coq_pattern(p, false)))
            .collect()
    }

    /// The guard and the exclusions of earlier clauses, as propositions.
    fn premises(&self, r: &Render, f: &FunDef, exclusions: &[Exclusion]) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(g) = &self.guard {
            out.push(format!("{} = true", r.base_top(g, &self.scope)));
        }
        let terms = self.terms();
        for ex in exclusions {
            match ex {
                Exclusion::GuardFalse { guard, .. } => {
                    let g = guard.subst(&|v| self.rename.get(v).map(|n| BaseExpr::var(n.clone())));
                    out.push(format!("{} = false", r.base_top(&g, &self.scope)));
                }
                Exclusion::NoMatch { pats, guard, .. } => {
                    let mut used: BTreeSet<String> = self.scope.types.keys().cloned().collect();
                    used.extend(f.params.iter().map(|p| p.name.clone()));
                    let mut sc = self.scope.clone();
                    let mut exists = Vec::new();
                    let mut conjuncts = Vec::new();
                    for (k, (p, q)) in pats.iter().zip(&f.params).enumerate() {
                        match p {
                            Pattern::Var(v) => {
                                sc.names.insert(v.clone(), terms[k].clone());
                            }
                            Pattern::Wild => {}
                            _ => {
                                let named = name_wilds(p, &format!("w{k}"), &mut used.clone());
                                let mut bs = Vec::new();
                                pattern_binders(r.prog, &named, &q.ty, &mut bs);
                                let mut map = BTreeMap::new();
                                for (b, t) in bs {
                                    let n = fresh(&format!("{b}'"), &used);
                                    used.insert(n.clone());
                                    sc.names.insert(b.clone(), n.clone());
                                    sc.types.insert(b.clone(), t.clone());
                                    exists.push(format!("({n} : {})", coq_type(&t)));
                                    map.insert(b, n);
                                }
                                let renamed = named.rename(&|v| map.get(v).cloned());
                                conjuncts.push(format!("{} = {}", terms[k], coq_pattern(&renamed, false)));
                            }
                        }
                    }
                    if let Some(g) = guard {
                        conjuncts.push(format!("{} = true", r.base_top(g, &sc)));
                    }
                    let body = conj(&conjuncts);
                    out.push(if exists.is_empty() { format!("~ ({body})") } else { format!("~ (exists {}, {body})", exists.join(" ")) });
                }
            }
        }
        out
    }
}

#[derive(Clone)]
enum Mode {
    /// Ordinary matches and `if`.
    Plain,
    /// Matches that record the equation they decide, returning `ret`.
    Dependent { ret: String },
}

#[derive(Clone)]
struct Row<'c> {
    cl: &'c NClause,
    pats: Vec<Pattern>,
}

struct Compiler<'a> {
    prog: &'a Program,
    fun: &'a FunDef,
    mode: Mode,
    counter: Cell<usize>,
    used: &'a BTreeSet<String>,
}

/// Whether the patterns together match every value of type `ty`.
fn covers(prog: &Program, pats: &[&Pattern], ty: &Type) -> bool {
    if pats.iter().any(|p| p.is_irrefutable()) {
        return true;
    }
    match ty {
        Type::Base(BaseType::Bool) => {
            pats.iter().any(|p| matches!(p, Pattern::Bool(true))) && pats.iter().any(|p| matches!(p, Pattern::Bool(false)))
        }
        Type::Base(BaseType::Nat) => {
            let inner: Vec<&Pattern> = pats
                .iter()
                .filter_map(|p| match p {
                    Pattern::Succ(q) => Some(&**q),
                    _ => None,
                })
                .collect();
            pats.iter().any(|p| matches!(p, Pattern::Zero)) && covers(prog, &inner, ty)
        }
        Type::Codata(name) => match prog.codata(name) {
            Some(cd) => cd.ctors.iter().all(|k| {
                pats.iter().any(|p| match p {
                    Pattern::Ctor(n, subs) if *n == k.name => subs.iter().zip(&k.fields).all(|(s, f)| {
                        let t = match f {
                            FieldKind::Payload(b) => Type::Base(*b),
                            FieldKind::Slot => ty.clone(),
                        };
                        covers(prog, &[s], &t)
                    }),
                    _ => false,
                })
            }),
            None => false,
        },
    }
}

impl<'a> Compiler<'a> {
    fn rows(clauses: &[NClause]) -> Vec<Row<'_>> {
        clauses.iter().map(|cl| Row { cl, pats: cl.pats.clone() }).collect()
    }

    fn fresh_local(&self, base: &str) -> String {
        let n = self.counter.get() + 1;
        self.counter.set(n);
        fresh(&format!("{base}{n}"), self.used)
    }

    fn as_name(&self) -> String {
        fresh("b", self.used)
    }

    /// Decision tree over the rows in first-match order. `action` renders a
    /// selected clause at the given indentation.
    fn compile(&self, rows: &[Row], ind: usize, action: &dyn Fn(&NClause, usize) -> String) -> String {
        let Some(r0) = rows.first() else {
            return "_ (* no clause applies *)".into();
        };
        let pad = " ".repeat(ind);
        let inner = ind + 4;
        let ipad = " ".repeat(inner);
        let Some(k) = r0.pats.iter().position(|p| !matches!(p, Pattern::Var(_))) else {
            let Some(g) = &r0.cl.guard else {
                return action(r0.cl, ind);
            };
            let gs = Render { prog: self.prog }.base_top(g, &r0.cl.scope);
            return match &self.mode {
                Mode::Plain => {
                    let yes = action(r0.cl, inner);
                    let no = self.compile(&rows[1..], inner, action);
                    format!("if {gs}\n{pad}then {yes}\n{pad}else {no}")
                }
                Mode::Dependent { ret } => {
                    let b = self.as_name();
                    let t = self.fresh_local("Hg");
                    let yes = action(r0.cl, inner);
                    let f = self.fresh_local("Hn");
                    let no = self.compile(&rows[1..], inner, action);
                    format!(
                        "match {gs} as {b} return {gs} = {b} -> {ret} with\n{pad}| true => fun {t} =>\n{ipad}{yes}\n{pad}| false => fun {f} =>\n{ipad}{no}\n{pad}end (refl_equal ({gs}))"
                    )
                }
            };
        };
        let x = &self.fun.params[k].name;
        let ty = &self.fun.params[k].ty;
        let mut arms: Vec<&Pattern> = Vec::new();
        for r in rows {
            let p = &r.pats[k];
            if matches!(p, Pattern::Var(_)) || arms.contains(&p) {
                continue;
            }
            if arms.iter().any(|a| covers(self.prog(), &[a], ty)) {
                break;
            }
            arms.push(p);
        }
        let mut out = match &self.mode {
            Mode::Plain => format!("match {x} with\n"),
            Mode::Dependent { ret } => {
                let b = self.as_name();
                format!("match {x} as {b} return {x} = {b} -> {ret} with\n")
            }
        };
        let arm = |pat: String, sub: Vec<Row>, out: &mut String| match &self.mode {
            Mode::Plain => {
                let body = self.compile(&sub, inner, action);
                let _ = write!(out, "{pad}| {pat} =>\n{ipad}{body}\n");
            }
            Mode::Dependent { .. } => {
                let e = self.fresh_local("Heq");
                let body = self.compile(&sub, inner, action);
                let _ = write!(out, "{pad}| {pat} => fun {e} =>\n{ipad}{body}\n");
            }
        };
        for a in &arms {
            let sub: Vec<Row> = rows
                .iter()
                .filter(|r| overlaps(&r.pats[k], a))
                .map(|r| {
                    let mut r = r.clone();
                    if r.pats[k] == **a {
                        r.pats[k] = Pattern::Var(x.clone());
                    }
                    r
                })
                .collect();
            arm(coq_pattern(a, false), sub, &mut out);
        }
        if !covers(self.prog(), &arms, ty) {
            let sub: Vec<Row> = rows.iter().filter(|r| matches!(r.pats[k], Pattern::Var(_))).cloned().collect();
            arm("_".into(), sub, &mut out);
        }
        out.push_str(&pad);
        out.push_str("end");
        if let Mode::Dependent { .. } = self.mode {
            let _ = write!(out, " (refl_equal {x})");
        }
        out
    }

    fn prog(&self) -> &Program {
        self.prog
    }
}

fn app(head: &str, args: &[String]) -> String {
    if args.is_empty() {
        head.to_string()
    } else {
        format!("{head} {}", args.join(" "))
    }
}

fn app_atom(head: &str, args: &[String]) -> String {
    if args.is_empty() {
        head.to_string()
    } else {
        format!("({head} {})", args.join(" "))
    }
}

fn forall(binders: &str) -> String {
    if binders.is_empty() {
        String::new()
    } else {
        format!("forall {binders}, ")
    }
}

fn arrows(items: &[String]) -> String {
    items.iter().map(|s| format!("{s} -> ")).collect()
}

fn rec_calls<'e>(e: &'e CoExpr, out: &mut Vec<&'e [Arg]>) {
    if let CoExpr::Rec { args, .. } = e {
        out.push(args);
    }
    for a in e.args() {
        if let Arg::Co(c) = a {
            rec_calls(c, out);
        }
    }
}

fn lemma(name: &str, statement: &str, recipe: &str) -> String {
    format!("Lemma {name} :\n  {statement}.\nProof.\n  {}\nAdmitted.\n", comment(recipe))
}

/// Renders a constructor context; `payload` and `hole` supply the leaves.
fn head_str(n: &HeadNode, payload: &mut dyn FnMut() -> String, hole: &mut dyn FnMut(usize) -> String, top: bool) -> String {
    match n {
        HeadNode::Hole(i) => hole(*i),
        HeadNode::Ctor { name, args } => {
            let parts: Vec<String> = args
                .iter()
                .map(|a| match a {
                    HeadArg::Base(_) => payload(),
                    HeadArg::Node(m) => head_str(m, payload, hole, false),
                })
                .collect();
            if top {
                app(name, &parts)
            } else {
                app_atom(name, &parts)
            }
        }
    }
}

/// Field layout of one producing clause in the generated output type.
struct OutArm {
    clause: usize,
    ctor: String,
    head: HeadSpec,
    payloads: Vec<String>,
    /// Per hole: the variables holding it (arguments, or one codata value).
    holes: Vec<Vec<String>>,
}

impl OutArm {
    fn pattern(&self) -> String {
        let mut vs = self.payloads.clone();
        self.holes.iter().for_each(|h| vs.extend(h.iter().cloned()));
        app(&self.ctor, &vs)
    }

    fn rec_holes(&self) -> Vec<&[String]> {
        self.head.holes.iter().zip(&self.holes).filter(|(h, _)| matches!(h, Hole::Rec(_))).map(|(_, v)| v.as_slice()).collect()
    }
}

struct Split<'a> {
    prog: &'a Program,
    fun: &'a FunDef,
    art: &'a TransformArtifacts,
    clauses: Vec<NClause>,
    used: BTreeSet<String>,
    params: Vec<String>,
    /// Payload types when the output is a pair.
    pair: Option<Vec<String>>,
    arms: Vec<OutArm>,
    out_ty: String,
    d: String,
    h: String,
    i: String,
}

impl<'a> Split<'a> {
    fn new(prog: &'a Program, fun: &'a FunDef, art: &'a TransformArtifacts) -> Split<'a> {
        let clauses: Vec<NClause> = (0..fun.clauses.len()).map(|i| NClause::new(prog, fun, i)).collect();
        let mut used = identifiers(prog, fun);
        for c in &clauses {
            used.extend(c.scope.types.keys().cloned());
        }
        let r = Render { prog };
        let heads: Vec<(usize, HeadSpec)> = art
            .pre
            .clauses
            .iter()
            .filter(|pc| matches!(pc.branch, PreBranch::Produce(_)))
            .filter_map(|pc| HeadSpec::from_body(&clauses[pc.cond.clause].body).map(|h| (pc.cond.clause, h)))
            .collect();
        let uniform = heads.windows(2).all(|w| w[0].1.shape() == w[1].1.shape())
            && heads.iter().all(|(_, h)| h.rec_hole_count() == 1 && h.holes.len() == 1);
        let pair = match heads.first() {
            Some((c, h)) if uniform => Some(h.payloads().iter().map(|e| r.ty(e, &clauses[*c].scope).to_string()).collect::<Vec<String>>()),
            _ => None,
        };
        let d = fresh("d", &used);
        let h = fresh("h", &used);
        let i = fresh("i", &used);
        for n in [&d, &h, &i] {
            used.insert(n.clone());
        }
        let mut arms = Vec::new();
        if pair.is_none() {
            let mut k = 0;
            let mut var = |used: &mut BTreeSet<String>| {
                let n = fresh(&format!("v{k}"), used);
                k += 1;
                used.insert(n.clone());
                n
            };
            for (c, head) in heads {
                let payloads = (0..head.payloads().len()).map(|_| var(&mut used)).collect();
                let holes = head
                    .holes
                    .iter()
                    .map(|hl| match hl {
                        Hole::Rec(_) => (0..fun.params.len()).map(|_| var(&mut used)).collect(),
                        Hole::Plain(_) => vec![var(&mut used)],
                    })
                    .collect();
                arms.push(OutArm { clause: c, ctor: format!("out_{}{}", fun.name, c + 1), head, payloads, holes });
            }
        }
        let out_ty = match &pair {
            Some(pay) => {
                let next: Vec<String> = fun.params.iter().map(|p| coq_type(&p.ty)).collect();
                let (a, b) = (right_tuple_type(pay), right_tuple_type(&next));
                let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
                format!("{} * {}", wrap(a), wrap(b))
            }
            None => format!("pre_{}_out", fun.name),
        };
        Split { prog, fun, art, clauses, used, params: param_names(&fun.params), pair, arms, out_ty, d, h, i }
    }

    fn r(&self) -> Render<'a> {
        Render { prog: self.prog }
    }

    fn compiler(&self, ret: &str) -> Compiler<'_> {
        Compiler { prog: self.prog, fun: self.fun, mode: Mode::Dependent { ret: ret.into() }, counter: Cell::new(0), used: &self.used }
    }

    fn exclusions(&self, c: usize) -> &[Exclusion] {
        &self.art.eventually.ctors[c].cond.exclusions
    }

    fn premises(&self, c: usize) -> Vec<String> {
        self.clauses[c].premises(&self.r(), self.fun, self.exclusions(c))
    }

    /// Side conditions discharged by tactic at a use site of a per-clause lemma.
    fn side_args(&self, c: usize) -> Vec<String> {
        let n = self.clauses[c].equations(self.fun).len() + self.premises(c).len();
        vec!["ltac:(corec_side)".to_string(); n]
    }

    fn pre_app(&self, args: &[String], ev: &str) -> String {
        let mut a = args.to_vec();
        a.push(ev.to_string());
        app_atom(&self.art.pre.name, &a)
    }

    fn inf(&self, args: &[String]) -> String {
        app(&self.art.infinite.name, args)
    }

    /// The proposition that the next arguments in output `o` are infinite.
    fn next_infinite(&self, o: &str, ind: usize) -> String {
        let n = self.params.len();
        if self.pair.is_some() {
            let next = format!("(snd {o})");
            let args: Vec<String> = (0..n).map(|k| tuple_proj(&next, k, n)).collect();
            return self.inf(&args);
        }
        let pad = " ".repeat(ind);
        let mut s = format!("match {o} with\n");
        for arm in &self.arms {
            let conjuncts: Vec<String> = arm.rec_holes().iter().map(|vs| self.inf(vs)).collect();
            let _ = writeln!(s, "{pad}| {} => {}", arm.pattern(), conj(&conjuncts));
        }
        s.push_str(&pad);
        s.push_str("end");
        s
    }

    fn render(&self) -> String {
        let f = &self.fun.name;
        let mut s = comment(&format!("{f}: not guarded; split into an inductive and a coinductive component"));
        s.push_str("\n\n");
        for part in [
            self.eventually(),
            self.inversions(),
            self.pre(),
            self.infinite(),
            self.infinite_lemmas(),
            self.guarded(),
            self.irrelevance(),
            self.steps(),
            self.equation(),
        ] {
            if !part.is_empty() {
                s.push_str(&part);
                s.push('\n');
            }
        }
        s.pop();
        s
    }

    fn eventually(&self) -> String {
        let ev = &self.art.eventually;
        let mut arity: Vec<String> = self.fun.params.iter().map(|p| coq_type(&p.ty)).collect();
        arity.push("Prop".into());
        let mut s = format!("Inductive {} : {} :=\n", ev.name, arity.join(" -> "));
        for (c, ctor) in ev.ctors.iter().enumerate() {
            let cl = &self.clauses[c];
            let mut hyps = self.premises(c);
            if let CoExpr::Rec { args, .. } = &cl.body {
                hyps.push(app(&ev.name, &self.r().args(args, &cl.scope)));
            }
            let concl = app(&ev.name, &cl.terms());
            let _ = writeln!(s, "| {} :\n    {}{}{concl}", ctor.name, forall(&cl.term_binders(self.fun)), arrows(&hyps));
        }
        s.pop();
        s.push_str(".\n");
        s
    }

    fn inversions(&self) -> String {
        let ev = &self.art.eventually.name;
        let mut s = String::new();
        for inv in &self.art.inversions {
            let Some(c) = self.art.eventually.ctors.iter().position(|k| k.name == inv.ev_ctor) else { continue };
            let cl = &self.clauses[c];
            let CoExpr::Rec { args, .. } = &cl.body else { continue };
            let mut hyps = cl.equations(self.fun);
            hyps.extend(self.premises(c));
            let stmt = format!(
                "{}{} ->\n  {}{}{}",
                forall(&param_binders(&self.fun.params)),
                app(ev, &self.params),
                forall(&cl.forall_binders()),
                arrows(&hyps),
                app(ev, &self.r().args(args, &cl.scope))
            );
            s.push_str(&lemma(&inv.name, &stmt, "invert the evidence; the premise for the recursive call is a sub-derivation"));
            s.push('\n');
        }
        s.pop();
        s
    }

    fn pre(&self) -> String {
        let mut s = String::new();
        if self.pair.is_none() {
            let _ = writeln!(s, "Inductive {} : Set :=", self.out_ty);
            for arm in &self.arms {
                let cl = &self.clauses[arm.clause];
                let mut tys: Vec<String> = arm.head.payloads().iter().map(|e| self.r().ty(e, &cl.scope).to_string()).collect();
                for hl in &arm.head.holes {
                    match hl {
                        Hole::Rec(_) => tys.extend(self.fun.params.iter().map(|p| coq_type(&p.ty))),
                        Hole::Plain(_) => tys.push(self.fun.ret.clone()),
                    }
                }
                tys.push(self.out_ty.clone());
                let _ = writeln!(s, "| {} : {}", arm.ctor, tys.join(" -> "));
            }
            s.pop();
            s.push_str(".\n\n");
        }
        let ev = &self.art.eventually.name;
        let d = &self.d;
        let compiler = self.compiler(&self.out_ty);
        let body = compiler.compile(&Compiler::rows(&self.clauses), 2, &|cl, _| self.pre_action(cl));
        let _ = write!(
            s,
            "Fixpoint {} {}{}({d} : {}) {{struct {d}}} : {} :=\n  {body}.\n",
            self.art.pre.name,
            param_binders(&self.fun.params),
            if self.params.is_empty() { "" } else { " " },
            app(ev, &self.params),
            self.out_ty
        );
        s
    }

    fn pre_action(&self, cl: &NClause) -> String {
        let r = self.r();
        let c = cl.index;
        match &cl.body {
            CoExpr::Rec { args, .. } => {
                let inv = self
                    .art
                    .inversions
                    .iter()
                    .find(|l| l.ev_ctor == self.art.eventually.ctors[c].name)
                    .map(|l| l.name.clone())
                    .unwrap_or_default();
                let mut proof = self.params.clone();
                proof.push(self.d.clone());
                proof.extend(cl.binder_names());
                proof.extend(self.side_args(c));
                let ev = app_atom(&inv, &proof);
                app(&self.art.pre.name, &[r.args(args, &cl.scope), vec![ev]].concat())
            }
            body => {
                let head = HeadSpec::from_body(body).expect("producing clauses are constructor headed");
                let pays: Vec<String> = head.payloads().iter().map(|e| r.base_top(e, &cl.scope)).collect();
                match &self.pair {
                    Some(_) => {
                        let next = head.rec_holes().next().map(|(_, a)| r.args_top(a, &cl.scope)).unwrap_or_default();
                        format!("({}, {})", right_tuple(&pays), right_tuple(&next))
                    }
                    None => {
                        let mut vs: Vec<String> = head.payloads().iter().map(|e| r.base(e, &cl.scope)).collect();
                        for hl in &head.holes {
                            match hl {
                                Hole::Rec(a) => vs.extend(r.args(a, &cl.scope)),
                                Hole::Plain(e) => vs.push(r.co(e, &cl.scope, &|_, _| "_".into())),
                            }
                        }
                        app(&format!("out_{}{}", self.fun.name, c + 1), &vs)
                    }
                }
            }
        }
    }

    fn infinite(&self) -> String {
        let inf = &self.art.infinite;
        let mut arity: Vec<String> = self.fun.params.iter().map(|p| coq_type(&p.ty)).collect();
        arity.push("Prop".into());
        let d = &self.d;
        let binders = format!(
            "{}{}({d} : {})",
            param_binders(&self.fun.params),
            if self.params.is_empty() { "" } else { " " },
            app(&inf.eventually, &self.params)
        );
        let o = self.pre_app(&self.params, d);
        format!(
            "CoInductive {} : {} :=\n| {} :\n    forall {binders},\n    {} ->\n    {}.\n",
            inf.name,
            arity.join(" -> "),
            inf.ctor,
            self.next_infinite(&o, 4),
            self.inf(&self.params)
        )
    }

    fn infinite_lemmas(&self) -> String {
        let l = &self.art.lemmas;
        let ev = &self.art.eventually.name;
        let ps = forall(&param_binders(&self.fun.params));
        let mut s = lemma(
            &l.infinite_eventually,
            &format!("{ps}{} -> {}", self.inf(&self.params), app(ev, &self.params)),
            "destruct the infinite evidence",
        );
        s.push('\n');
        let e = &self.d;
        let o = self.pre_app(&self.params, e);
        s.push_str(&lemma(
            &l.infinite_always,
            &format!("{ps}{} ->\n  forall {e} : {}, {}", self.inf(&self.params), app(ev, &self.params), self.next_infinite(&o, 2)),
            "destruct the infinite evidence, then use irrelevance of the inductive component",
        ));
        s
    }

    fn guarded(&self) -> String {
        let g = &self.art.guarded;
        let l = &self.art.lemmas;
        let (h, n) = (&self.h, self.params.len());
        let mut hp = self.params.clone();
        hp.push(h.clone());
        let ie = app_atom(&l.infinite_eventually, &hp);
        let o = self.pre_app(&self.params, &ie);
        let mut always = self.params.clone();
        always.push(h.clone());
        always.push(ie.clone());
        let always = app_atom(&l.infinite_always, &always);
        let sig = format!(
            "CoFixpoint {} {}{}({h} : {}) : {} :=",
            g.name,
            param_binders(&self.fun.params),
            if n == 0 { "" } else { " " },
            self.inf(&self.params),
            g.ret
        );
        let body = match &self.pair {
            Some(pay) => {
                let first = self.art.pre.clauses.iter().find_map(|pc| match pc.branch {
                    PreBranch::Produce(_) => HeadSpec::from_body(&self.clauses[pc.cond.clause].body),
                    _ => None,
                });
                let Some(head) = first else { return format!("{sig}\n  _.\n") };
                let head_val = format!("(fst {o})");
                let mut k = 0;
                let np = pay.len();
                let mut rec = vec!["_".to_string(); n];
                rec.push(always.clone());
                head_str(
                    &head.root,
                    &mut || {
                        let v = tuple_proj(&head_val, k, np);
                        k += 1;
                        v
                    },
                    &mut |_| app_atom(&g.name, &rec),
                    true,
                )
            }
            None => {
                let hi = fresh("hi", &self.used);
                let mut s = format!("match {o} as o return\n      ({}) -> {} with\n", self.next_infinite("o", 6), g.ret);
                for arm in &self.arms {
                    let m = arm.rec_holes().len();
                    let mut k = 0;
                    let mut j = 0;
                    let head = head_str(
                        &arm.head.root,
                        &mut || {
                            let v = arm.payloads[k].clone();
                            k += 1;
                            v
                        },
                        &mut |hole| match &arm.head.holes[hole] {
                            Hole::Rec(_) => {
                                let mut a = arm.holes[hole].clone();
                                a.push(conj_proj(&hi, j, m));
                                j += 1;
                                app_atom(&g.name, &a)
                            }
                            Hole::Plain(_) => arm.holes[hole][0].clone(),
                        },
                        true,
                    );
                    let _ = writeln!(s, "  | {} => fun {hi} =>\n      {head}", arm.pattern());
                }
                let _ = write!(s, "  end {always}");
                s
            }
        };
        format!("{sig}\n  {body}.\n")
    }

    fn irrelevance(&self) -> String {
        let l = &self.art.lemmas;
        let ev = &self.art.eventually.name;
        let mut used = self.used.clone();
        let e1 = fresh("e1", &used);
        let e2 = fresh("e2", &used);
        let ps = param_binders(&self.fun.params);
        let sep = if ps.is_empty() { "" } else { " " };
        let mut s = lemma(
            &l.pre_irrelevant,
            &format!(
                "forall {ps}{sep}({e1} {e2} : {}),\n  {} = {}",
                app(ev, &self.params),
                app(&self.art.pre.name, &[self.params.clone(), vec![e1.clone()]].concat()),
                app(&self.art.pre.name, &[self.params.clone(), vec![e2.clone()]].concat())
            ),
            "induction on the first evidence, inverting the second",
        );
        s.push('\n');
        let primed: Vec<String> = self
            .params
            .iter()
            .map(|p| {
                let n = fresh(&format!("{p}'"), &used);
                used.insert(n.clone());
                n
            })
            .collect();
        let i = &self.i;
        let i2 = fresh(&format!("{i}'"), &used);
        let primed_binders: Vec<String> =
            self.fun.params.iter().zip(&primed).map(|(p, q)| format!("({q} : {})", coq_type(&p.ty))).collect();
        let eqs: Vec<String> = self.params.iter().zip(&primed).map(|(p, q)| format!("{p} = {q}")).collect();
        let g = &self.art.guarded.name;
        let lhs = app_atom(g, &[self.params.clone(), vec![i.clone()]].concat());
        let rhs = app_atom(g, &[primed.clone(), vec![i2.clone()]].concat());
        let binders = [
            ps.clone(),
            primed_binders.join(" "),
            format!("({i} : {})", self.inf(&self.params)),
            format!("({i2} : {})", self.inf(&primed)),
        ]
        .into_iter()
        .filter(|b| !b.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
        s.push_str(&lemma(
            &l.fun_irrelevant,
            &format!("forall {binders},\n  {}bisimilar_{} {lhs} {rhs}", arrows(&eqs), self.fun.ret),
            "coinduction, using irrelevance of the inductive component",
        ));
        s
    }

    fn step_calls(&self, c: usize) -> Vec<&[Arg]> {
        let mut calls = Vec::new();
        rec_calls(&self.clauses[c].body, &mut calls);
        calls
    }

    fn steps(&self) -> String {
        let mut s = String::new();
        for (c, step) in self.art.lemmas.steps.iter().enumerate() {
            let cl = &self.clauses[c];
            let mut hyps = cl.equations(self.fun);
            hyps.extend(self.premises(c));
            hyps.push(self.inf(&self.params));
            let concl: Vec<String> = self.step_calls(c).iter().map(|a| self.inf(&self.r().args(a, &cl.scope))).collect();
            let binders =
                [param_binders(&self.fun.params), cl.forall_binders()].into_iter().filter(|b| !b.is_empty()).collect::<Vec<_>>().join(" ");
            s.push_str(&lemma(
                &step.name,
                &format!("{}{}{}", forall(&binders), arrows(&hyps), conj(&concl)),
                "unfold the infinite evidence and follow the inductive component through this clause",
            ));
            s.push('\n');
        }
        s.pop();
        s
    }

    fn equation(&self) -> String {
        let l = &self.art.lemmas;
        let g = &self.art.guarded.name;
        let i = &self.i;
        let r = self.r();
        let compiler = self.compiler(&self.fun.ret);
        let body = compiler.compile(&Compiler::rows(&self.clauses), 4, &|cl, _| {
            let c = cl.index;
            let m = self.step_calls(c).len();
            let mut proof = self.params.clone();
            proof.extend(cl.binder_names());
            proof.extend(self.side_args(c));
            proof.push(i.clone());
            let step = app_atom(&l.steps[c].name, &proof);
            let j = Cell::new(0);
            r.co_top(&cl.body, &cl.scope, &|args, sc| {
                let mut a = r.args(args, sc);
                a.push(conj_proj(&step, j.get(), m));
                j.set(j.get() + 1);
                app_atom(g, &a)
            })
        });
        let ps = param_binders(&self.fun.params);
        let sep = if ps.is_empty() { "" } else { " " };
        format!(
            "Theorem {} :\n  forall {ps}{sep}({i} : {}),\n  bisimilar_{} {}\n    ({body}).\nProof.\n  {}\nAdmitted.\n",
            l.equation,
            self.inf(&self.params),
            self.fun.ret,
            app_atom(g, &[self.params.clone(), vec![i.clone()]].concat()),
            comment("unfold the guarded function once and rewrite with the irrelevance lemmas")
        )
    }
}

#[derive(Serialize)]
struct Report<'a> {
    definitions: Vec<Entry<'a>>,
}

#[derive(Serialize)]
struct Entry<'a> {
    name: &'a str,
    kind: &'static str,
    verdict: String,
    calls: &'a [CallInfo],
    artifact_names: Vec<String>,
    counts: Option<Counts>,
}

/// One record per `fun`, `cofun` and `rec` definition, in source order.
pub fn emit_report(prog: &Program, analysis: &Analysis) -> String {
    let mut definitions = Vec::new();
    for d in &prog.decls {
        match d {
            Decl::Fun(f) => {
                let Some(c) = analysis.classifications.get(&f.name) else { continue };
                let art = analysis.artifacts(&f.name).filter(|_| c.verdict == Verdict::TransformableUnguarded);
                definitions.push(Entry {
                    name: &f.name,
                    kind: match f.kind {
                        FunKind::Cofun => "cofun",
                        FunKind::Fun => "fun",
                    },
                    verdict: c.verdict.to_string(),
                    calls: &c.calls,
                    artifact_names: art.map(|a| a.names()).unwrap_or_default(),
                    counts: art.map(|a| a.counts()),
                });
            }
            Decl::Rec(r) => {
                let verdict = match analysis.structural.get(&r.name) {
                    Some(v) if v.is_accepted() => "Accepted",
                    _ => "Rejected",
                };
                definitions.push(Entry {
                    name: &r.name,
                    kind: "rec",
                    verdict: verdict.into(),
                    calls: &[],
                    artifact_names: vec![],
                    counts: None,
                });
            }
            _ => {}
        }
    }
    serde_json::to_string_pretty(&Report { definitions }).expect("report serializes")
}
