//! Splitting a productive definition into an inductive component and a
//! guarded coinductive component.
//!
//! For a definition `f` the artifacts are: the inductive predicate
//! `eventually_f` (one constructor per clause), one inversion lemma per
//! non-guarded clause, the inductive component `pre_f` recursing on
//! `eventually_f` evidence, the coinductive predicate `infinite_f`, the
//! guarded function `f_guarded`, and the statements relating them.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ast::*;
use crate::guard::{classify_function, Classification, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("`{fun}` is {verdict}; only guarded or transformable definitions can be split")]
    NotTransformable { fun: String, verdict: Verdict },
    #[error("{span}: `{fun}` clause {clause} produces no head constructor")]
    Headless { fun: String, clause: usize, span: Span },
}

/// A condition excluding an earlier clause, needed because clauses are
/// selected by first match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exclusion {
    /// The earlier clause matches whenever this one does; its guard,
    /// rewritten over this clause's binders, must be false.
    GuardFalse { clause: usize, guard: BaseExpr },
    /// The earlier clause overlaps this one partially and must not apply.
    NoMatch { clause: usize, pats: Vec<Pattern>, guard: Option<BaseExpr> },
}

/// What selecting a clause requires of the inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseCondition {
    pub clause: usize,
    pub pats: Vec<Pattern>,
    /// Pattern binders in order of occurrence, with their types.
    pub binders: Vec<(String, Type)>,
    pub guard: Option<BaseExpr>,
    pub exclusions: Vec<Exclusion>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvCtor {
    pub name: String,
    pub cond: ClauseCondition,
    /// Arguments of the non-guarded call, for non-guarded clauses.
    pub recursive: Option<Vec<Arg>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventuallyIR {
    pub name: String,
    pub fun: String,
    pub params: Vec<Param>,
    pub ctors: Vec<EvCtor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionLemmaIR {
    pub name: String,
    /// The eventually constructor whose recursive premise is extracted.
    pub ev_ctor: String,
    pub cond: ClauseCondition,
    pub conclusion: Vec<Arg>,
    /// The conclusion is a sub-derivation of the hypothesis, so recursion
    /// on it is structural.
    pub structural: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadNode {
    Ctor { name: String, args: Vec<HeadArg> },
    Hole(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadArg {
    Base(BaseExpr),
    Node(HeadNode),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hole {
    /// A corecursive call, by its arguments.
    Rec(Vec<Arg>),
    /// A codata expression without recursive calls.
    Plain(CoExpr),
}

/// Constructor context produced by a guarded clause. Holes are numbered
/// left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadSpec {
    pub root: HeadNode,
    pub holes: Vec<Hole>,
}

impl HeadSpec {
    /// Builds the context of a clause body whose root is a constructor.
    pub fn from_body(body: &CoExpr) -> Option<HeadSpec> {
        if !matches!(body, CoExpr::Ctor { .. }) {
            return None;
        }
        let mut holes = Vec::new();
        let root = head_node(body, &mut holes);
        Some(HeadSpec { root, holes })
    }

    pub fn rec_holes(&self) -> impl Iterator<Item = (usize, &[Arg])> {
        self.holes.iter().enumerate().filter_map(|(i, h)| match h {
            Hole::Rec(a) => Some((i, a.as_slice())),
            Hole::Plain(_) => None,
        })
    }

    pub fn rec_hole_count(&self) -> usize {
        self.rec_holes().count()
    }

    /// Payload expressions in left-to-right order.
    pub fn payloads(&self) -> Vec<&BaseExpr> {
        fn go<'a>(n: &'a HeadNode, out: &mut Vec<&'a BaseExpr>) {
            if let HeadNode::Ctor { args, .. } = n {
                for a in args {
                    match a {
                        HeadArg::Base(b) => out.push(b),
                        HeadArg::Node(m) => go(m, out),
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    pub fn ctor_count(&self) -> usize {
        fn go(n: &HeadNode) -> usize {
            match n {
                HeadNode::Ctor { args, .. } => {
                    1 + args
                        .iter()
                        .map(|a| match a {
                            HeadArg::Node(m) => go(m),
                            HeadArg::Base(_) => 0,
                        })
                        .sum::<usize>()
                }
                HeadNode::Hole(_) => 0,
            }
        }
        go(&self.root)
    }

    /// Shape of the context ignoring payload expressions and hole contents.
    pub fn shape(&self) -> String {
        fn go(n: &HeadNode, out: &mut String) {
            match n {
                HeadNode::Ctor { name, args } => {
                    out.push_str(name);
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        match a {
                            HeadArg::Base(_) => out.push('_'),
                            HeadArg::Node(m) => go(m, out),
                        }
                    }
                    out.push(')');
                }
                HeadNode::Hole(_) => out.push('#'),
            }
        }
        let mut s = String::new();
        go(&self.root, &mut s);
        s
    }

    /// Renders the context back to an expression, filling payloads and holes.
    pub fn to_coexpr(&self, payload: &mut dyn FnMut(usize, &BaseExpr) -> BaseExpr, hole: &mut dyn FnMut(usize, &Hole) -> CoExpr) -> CoExpr {
        fn go(
            n: &HeadNode,
            holes: &[Hole],
            k: &mut usize,
            payload: &mut dyn FnMut(usize, &BaseExpr) -> BaseExpr,
            hole: &mut dyn FnMut(usize, &Hole) -> CoExpr,
        ) -> CoExpr {
            match n {
                HeadNode::Ctor { name, args } => CoExpr::Ctor {
                    name: name.clone(),
                    args: args
                        .iter()
                        .map(|a| match a {
                            HeadArg::Base(b) => {
                                let e = payload(*k, b);
                                *k += 1;
                                Arg::Base(e)
                            }
                            HeadArg::Node(m) => Arg::Co(go(m, holes, k, payload, hole)),
                        })
                        .collect(),
                },
                HeadNode::Hole(i) => hole(*i, &holes[*i]),
            }
        }
        go(&self.root, &self.holes, &mut 0, payload, hole)
    }
}

/// The root constructor always belongs to the context; below it, only
/// constructors with a recursive call inside do.
fn head_node(e: &CoExpr, holes: &mut Vec<Hole>) -> HeadNode {
    match e {
        CoExpr::Ctor { name, args } => ctor_node(name, args, holes),
        _ => child_node(e, holes),
    }
}

fn ctor_node(name: &str, args: &[Arg], holes: &mut Vec<Hole>) -> HeadNode {
    HeadNode::Ctor {
        name: name.to_string(),
        args: args
            .iter()
            .map(|a| match a {
                Arg::Base(b) => HeadArg::Base(b.clone()),
                Arg::Co(c) => HeadArg::Node(child_node(c, holes)),
            })
            .collect(),
    }
}

fn child_node(e: &CoExpr, holes: &mut Vec<Hole>) -> HeadNode {
    match e {
        CoExpr::Ctor { name, args } if e.contains_rec() => ctor_node(name, args, holes),
        CoExpr::Rec { args, .. } => {
            holes.push(Hole::Rec(args.clone()));
            HeadNode::Hole(holes.len() - 1)
        }
        other => {
            holes.push(Hole::Plain(other.clone()));
            HeadNode::Hole(holes.len() - 1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreBranch {
    Produce(HeadSpec),
    Recurse { args: Vec<Arg>, inversion: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreClause {
    pub cond: ClauseCondition,
    pub branch: PreBranch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveComponentIR {
    pub name: String,
    pub fun: String,
    pub params: Vec<Param>,
    pub evidence: String,
    pub clauses: Vec<PreClause>,
}

impl InductiveComponentIR {
    pub fn produce_branches(&self) -> impl Iterator<Item = (usize, &HeadSpec)> {
        self.clauses.iter().filter_map(|c| match &c.branch {
            PreBranch::Produce(h) => Some((c.cond.clause, h)),
            PreBranch::Recurse { .. } => None,
        })
    }

    pub fn self_calls(&self) -> usize {
        self.clauses.iter().filter(|c| matches!(c.branch, PreBranch::Recurse { .. })).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfiniteIR {
    pub name: String,
    pub ctor: String,
    pub eventually: String,
    pub pre: String,
    /// Per producing clause, the number of corecursive holes, each of which
    /// carries one infinite premise.
    pub premises: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedFunIR {
    pub name: String,
    pub fun: String,
    pub params: Vec<Param>,
    pub ret: String,
    pub infinite: String,
    pub pre: String,
    pub infinite_eventually: String,
    pub infinite_always: String,
    /// Per producing clause, the head it builds.
    pub branches: Vec<(usize, HeadSpec)>,
}

impl GuardedFunIR {
    /// The body with evidence arguments erased, as a definition over
    /// placeholder variables: payloads become `_hK`, plain holes `_pK`,
    /// and each corecursive hole a self-call on fresh variables.
    pub fn erased(&self) -> FunDef {
        let clauses = self
            .branches
            .iter()
            .map(|(_, head)| {
                let body = head.to_coexpr(&mut |k, _| BaseExpr::var(format!("_h{k}")), &mut |i, h| match h {
                    Hole::Rec(args) => CoExpr::Rec {
                        args: args
                            .iter()
                            .enumerate()
                            .map(|(j, a)| match a {
                                Arg::Base(_) => Arg::Base(BaseExpr::var(format!("_n{i}_{j}"))),
                                Arg::Co(_) => Arg::Co(CoExpr::Var(format!("_n{i}_{j}"))),
                            })
                            .collect(),
                        span: Span::default(),
                    },
                    Hole::Plain(_) => CoExpr::Var(format!("_p{i}")),
                });
                Clause { pats: vec![Pattern::Wild; self.params.len()], guard: None, body, span: Span::default() }
            })
            .collect();
        FunDef {
            kind: FunKind::Cofun,
            name: self.name.clone(),
            params: self.params.clone(),
            ret: self.ret.clone(),
            clauses,
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepLemma {
    pub name: String,
    pub cond: ClauseCondition,
    /// Arguments of every recursive call in the clause body.
    pub calls: Vec<Vec<Arg>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaStatementIR {
    pub infinite_eventually: String,
    pub infinite_always: String,
    pub pre_irrelevant: String,
    pub fun_irrelevant: String,
    pub steps: Vec<StepLemma>,
    pub equation: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub eventually_ctors: usize,
    pub inversions: usize,
    pub pre_self_calls: usize,
    pub infinite_ctors: usize,
    pub step_lemmas: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformArtifacts {
    pub fun: String,
    pub verdict: Verdict,
    pub eventually: EventuallyIR,
    pub inversions: Vec<InversionLemmaIR>,
    pub pre: InductiveComponentIR,
    pub infinite: InfiniteIR,
    pub guarded: GuardedFunIR,
    pub lemmas: LemmaStatementIR,
}

impl TransformArtifacts {
    pub fn counts(&self) -> Counts {
        Counts {
            eventually_ctors: self.eventually.ctors.len(),
            inversions: self.inversions.len(),
            pre_self_calls: self.pre.self_calls(),
            infinite_ctors: 1,
            step_lemmas: self.lemmas.steps.len(),
        }
    }

    /// Every generated name, in declaration order.
    pub fn names(&self) -> Vec<String> {
        let mut v = vec![self.eventually.name.clone()];
        v.extend(self.eventually.ctors.iter().map(|c| c.name.clone()));
        v.extend(self.inversions.iter().map(|l| l.name.clone()));
        v.push(self.pre.name.clone());
        v.push(self.infinite.name.clone());
        v.push(self.infinite.ctor.clone());
        v.push(self.lemmas.infinite_eventually.clone());
        v.push(self.lemmas.infinite_always.clone());
        v.push(self.guarded.name.clone());
        v.push(self.lemmas.pre_irrelevant.clone());
        v.push(self.lemmas.fun_irrelevant.clone());
        v.extend(self.lemmas.steps.iter().map(|s| s.name.clone()));
        v.push(self.lemmas.equation.clone());
        v
    }
}

fn check_transformable(fun: &FunDef, cls: &Classification) -> Result<(), TransformError> {
    if cls.verdict.is_rejected() {
        return Err(TransformError::NotTransformable { fun: fun.name.clone(), verdict: cls.verdict });
    }
    for (i, c) in fun.clauses.iter().enumerate() {
        if !matches!(c.body, CoExpr::Ctor { .. } | CoExpr::Rec { .. }) {
            return Err(TransformError::Headless { fun: fun.name.clone(), clause: i + 1, span: c.span });
        }
    }
    Ok(())
}

fn bare_call(c: &Clause) -> Option<&[Arg]> {
    match &c.body {
        CoExpr::Rec { args, .. } => Some(args),
        _ => None,
    }
}

pub(crate) fn pattern_binders(prog: &Program, p: &Pattern, ty: &Type, out: &mut Vec<(String, Type)>) {
    match p {
        Pattern::Var(v) => out.push((v.clone(), ty.clone())),
        Pattern::Succ(q) => pattern_binders(prog, q, ty, out),
        Pattern::Ctor(name, subs) => {
            if let Some((cd, ctor)) = prog.ctor(name) {
                for (q, f) in subs.iter().zip(&ctor.fields) {
                    let t = match f {
                        FieldKind::Payload(b) => Type::Base(*b),
                        FieldKind::Slot => Type::Codata(cd.name.clone()),
                    };
                    pattern_binders(prog, q, &t, out);
                }
            }
        }
        Pattern::Wild | Pattern::Zero | Pattern::Bool(_) => {}
    }
}

/// Whether some value matches both patterns.
pub(crate) fn overlaps(a: &Pattern, b: &Pattern) -> bool {
    match (a, b) {
        (Pattern::Var(_) | Pattern::Wild, _) | (_, Pattern::Var(_) | Pattern::Wild) => true,
        (Pattern::Zero, Pattern::Zero) => true,
        (Pattern::Succ(x), Pattern::Succ(y)) => overlaps(x, y),
        (Pattern::Bool(x), Pattern::Bool(y)) => x == y,
        (Pattern::Ctor(n, xs), Pattern::Ctor(m, ys)) => n == m && xs.iter().zip(ys).all(|(x, y)| overlaps(x, y)),
        _ => false,
    }
}

/// The value matched by `p`, as a base expression, when it is fully known.
fn pattern_term(p: &Pattern) -> Option<BaseExpr> {
    if let Some(n) = p.as_numeral() {
        return Some(BaseExpr::Nat(n));
    }
    match p {
        Pattern::Var(v) => Some(BaseExpr::var(v.clone())),
        Pattern::Bool(b) => Some(BaseExpr::Bool(*b)),
        Pattern::Succ(q) => pattern_term(q).map(|t| BaseExpr::bin(BinOp::Add, t, BaseExpr::Nat(1))),
        _ => None,
    }
}

/// Whether `general` matches every value `specific` matches, recording what
/// each binder of `general` is bound to.
fn subsumes(general: &Pattern, specific: &Pattern, sub: &mut BTreeMap<String, Option<BaseExpr>>) -> bool {
    match (general, specific) {
        (Pattern::Wild, _) => true,
        (Pattern::Var(v), s) => {
            sub.insert(v.clone(), pattern_term(s));
            true
        }
        (Pattern::Zero, Pattern::Zero) => true,
        (Pattern::Succ(g), Pattern::Succ(s)) => subsumes(g, s, sub),
        (Pattern::Bool(x), Pattern::Bool(y)) => x == y,
        (Pattern::Ctor(n, gs), Pattern::Ctor(m, ss)) => n == m && gs.iter().zip(ss).all(|(g, s)| subsumes(g, s, sub)),
        _ => false,
    }
}

fn exclusions(fun: &FunDef, i: usize) -> Vec<Exclusion> {
    let mine = &fun.clauses[i];
    let mut mine_binders = Vec::new();
    mine.pats.iter().for_each(|p| p.binders(&mut mine_binders));
    let mut out = Vec::new();
    for (j, earlier) in fun.clauses[..i].iter().enumerate() {
        if !earlier.pats.iter().zip(&mine.pats).all(|(a, b)| overlaps(a, b)) {
            continue;
        }
        let no_match = || Exclusion::NoMatch { clause: j, pats: earlier.pats.clone(), guard: earlier.guard.clone() };
        let mut sub = BTreeMap::new();
        let general = earlier.pats.iter().zip(&mine.pats).all(|(g, s)| subsumes(g, s, &mut sub));
        match (&earlier.guard, general) {
            (Some(guard), true) => {
                let mut vars = std::collections::BTreeSet::new();
                guard.free_vars(&mut vars);
                let expressible = vars.iter().all(|v| match sub.get(v) {
                    Some(t) => t.is_some(),
                    None => !mine_binders.contains(v),
                });
                if expressible {
                    let g = guard.subst(&|v| sub.get(v).cloned().flatten());
                    out.push(Exclusion::GuardFalse { clause: j, guard: g });
                } else {
                    out.push(no_match());
                }
            }
            _ => out.push(no_match()),
        }
    }
    out
}

fn condition(prog: &Program, fun: &FunDef, i: usize) -> ClauseCondition {
    let c = &fun.clauses[i];
    let mut binders = Vec::new();
    for (p, param) in c.pats.iter().zip(&fun.params) {
        pattern_binders(prog, p, &param.ty, &mut binders);
    }
    ClauseCondition { clause: i, pats: c.pats.clone(), binders, guard: c.guard.clone(), exclusions: exclusions(fun, i) }
}

pub fn eventually_name(fun: &str) -> String {
    format!("eventually_{fun}")
}

pub fn build_eventually(prog: &Program, fun: &FunDef, cls: &Classification) -> Result<EventuallyIR, TransformError> {
    check_transformable(fun, cls)?;
    let ctors = (0..fun.clauses.len())
        .map(|i| EvCtor {
            name: format!("ev_{}{}", fun.name, i + 1),
            cond: condition(prog, fun, i),
            recursive: bare_call(&fun.clauses[i]).map(<[Arg]>::to_vec),
        })
        .collect();
    Ok(EventuallyIR { name: eventually_name(&fun.name), fun: fun.name.clone(), params: fun.params.clone(), ctors })
}

pub fn build_inversions(fun: &FunDef, ev: &EventuallyIR) -> Vec<InversionLemmaIR> {
    ev.ctors
        .iter()
        .filter_map(|c| c.recursive.as_ref().map(|args| (c, args)))
        .enumerate()
        .map(|(k, (c, args))| InversionLemmaIR {
            name: format!("{}_inv{}", fun.name, k + 1),
            ev_ctor: c.name.clone(),
            cond: c.cond.clone(),
            conclusion: args.clone(),
            structural: true,
        })
        .collect()
}

pub fn build_inductive_component(fun: &FunDef, ev: &EventuallyIR, invs: &[InversionLemmaIR]) -> InductiveComponentIR {
    let clauses = ev
        .ctors
        .iter()
        .map(|c| {
            let branch = match &c.recursive {
                Some(args) => PreBranch::Recurse {
                    args: args.clone(),
                    inversion: invs.iter().find(|l| l.ev_ctor == c.name).map(|l| l.name.clone()).unwrap_or_default(),
                },
                None => PreBranch::Produce(
                    HeadSpec::from_body(&fun.clauses[c.cond.clause].body).expect("checked: guarded clauses are constructor headed"),
                ),
            };
            PreClause { cond: c.cond.clone(), branch }
        })
        .collect();
    InductiveComponentIR {
        name: format!("pre_{}", fun.name),
        fun: fun.name.clone(),
        params: fun.params.clone(),
        evidence: ev.name.clone(),
        clauses,
    }
}

pub fn build_infinite(fun: &FunDef, pre: &InductiveComponentIR) -> InfiniteIR {
    InfiniteIR {
        name: format!("infinite_{}", fun.name),
        ctor: format!("inf_{}", fun.name),
        eventually: pre.evidence.clone(),
        pre: pre.name.clone(),
        premises: pre.produce_branches().map(|(ci, h)| (ci, h.rec_hole_count())).collect(),
    }
}

pub fn build_guarded(fun: &FunDef, pre: &InductiveComponentIR, inf: &InfiniteIR) -> GuardedFunIR {
    GuardedFunIR {
        name: format!("{}_guarded", fun.name),
        fun: fun.name.clone(),
        params: fun.params.clone(),
        ret: fun.ret.clone(),
        infinite: inf.name.clone(),
        pre: pre.name.clone(),
        infinite_eventually: format!("infinite_eventually_{}", fun.name),
        infinite_always: format!("infinite_always_{}", fun.name),
        branches: pre.produce_branches().map(|(ci, h)| (ci, h.clone())).collect(),
    }
}

fn rec_calls(e: &CoExpr, out: &mut Vec<Vec<Arg>>) {
    if let CoExpr::Rec { args, .. } = e {
        out.push(args.clone());
    }
    for a in e.args() {
        if let Arg::Co(c) = a {
            rec_calls(c, out);
        }
    }
}

pub fn build_lemma_statements(fun: &FunDef, ev: &EventuallyIR, guarded: &GuardedFunIR) -> LemmaStatementIR {
    let steps = ev
        .ctors
        .iter()
        .map(|c| {
            let mut calls = Vec::new();
            rec_calls(&fun.clauses[c.cond.clause].body, &mut calls);
            StepLemma { name: format!("{}_step{}", fun.name, c.cond.clause + 1), cond: c.cond.clone(), calls }
        })
        .collect();
    LemmaStatementIR {
        infinite_eventually: guarded.infinite_eventually.clone(),
        infinite_always: guarded.infinite_always.clone(),
        pre_irrelevant: format!("pre_{}_prf_irrelevant", fun.name),
        fun_irrelevant: format!("{}_prf_irrelevant", fun.name),
        steps,
        equation: format!("{}_equation", fun.name),
    }
}

/// Runs every construction for one definition.
pub fn transform(prog: &Program, fun: &FunDef) -> Result<TransformArtifacts, TransformError> {
    let cls = classify_function(fun);
    transform_classified(prog, fun, &cls)
}

pub fn transform_classified(prog: &Program, fun: &FunDef, cls: &Classification) -> Result<TransformArtifacts, TransformError> {
    let eventually = build_eventually(prog, fun, cls)?;
    let inversions = build_inversions(fun, &eventually);
    let pre = build_inductive_component(fun, &eventually, &inversions);
    let infinite = build_infinite(fun, &pre);
    let guarded = build_guarded(fun, &pre, &infinite);
    let lemmas = build_lemma_statements(fun, &eventually, &guarded);
    Ok(TransformArtifacts { fun: fun.name.clone(), verdict: cls.verdict, eventually, inversions, pre, infinite, guarded, lemmas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const SRC: &str = "codata Stream = SCons(nat, #)\n\
        codata Tree = Leaf(nat, #) | Node(nat, #, #)\n\
        def p(x) = x mod 3 == 0\n\
        def even(x) = x mod 2 == 0\n\
        cofun repeat(a: nat): Stream = SCons(a, repeat(a))\n\
        fun dyn(x: nat): Stream | x when p(x) => SCons(x, dyn(x + 1)) | x => dyn(x + 2)\n\
        fun filter(s: Stream): Stream | SCons(x, tl) when even(x) => SCons(x, filter(tl)) | SCons(x, tl) => filter(tl)\n\
        fun two(x: nat): Tree | x when even(x) => Node(x, two(x + 1), two(x + 3)) | x => two(x + 1)\n\
        fun pair(x: nat): Stream | x when even(x) => SCons(x, SCons(x + 1, pair(x + 2))) | x => pair(x + 1)\n\
        fun mix(x: nat, s: Stream): Stream | x, SCons(y, t) when even(y) => SCons(y, s) | x, SCons(y, t) => mix(x, t)\n\
        fun nats(): Stream = SCons(1, repeat(0))";

    fn artifacts(name: &str) -> TransformArtifacts {
        let p = parse_program(SRC).unwrap();
        transform(&p, p.fun(name).unwrap()).unwrap()
    }

    #[test]
    fn dyn_constructions() {
        let a = artifacts("dyn");
        assert_eq!(a.eventually.name, "eventually_dyn");
        let names: Vec<_> = a.eventually.ctors.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["ev_dyn1", "ev_dyn2"]);
        assert!(a.eventually.ctors[0].recursive.is_none());
        assert!(a.eventually.ctors[1].recursive.is_some());
        assert_eq!(a.inversions.len(), 1);
        assert_eq!(a.inversions[0].name, "dyn_inv1");
        assert_eq!(a.counts().step_lemmas, 2);
        match &a.pre.clauses[0].branch {
            PreBranch::Produce(h) => {
                assert_eq!(h.shape(), "SCons(_,#)");
                assert_eq!(h.rec_hole_count(), 1);
            }
            b => panic!("{b:?}"),
        }
        match &a.pre.clauses[1].branch {
            PreBranch::Recurse { inversion, .. } => assert_eq!(inversion, "dyn_inv1"),
            b => panic!("{b:?}"),
        }
        // The second clause shares the first's pattern, so only the guard is negated.
        assert_eq!(
            a.eventually.ctors[1].cond.exclusions,
            vec![Exclusion::GuardFalse { clause: 0, guard: BaseExpr::Call("p".into(), vec![BaseExpr::var("x")]) }]
        );
    }

    #[test]
    fn filter_constructions() {
        let a = artifacts("filter");
        assert_eq!(a.counts(), Counts { eventually_ctors: 2, inversions: 1, pre_self_calls: 1, infinite_ctors: 1, step_lemmas: 2 });
        assert_eq!(a.infinite.name, "infinite_filter");
        assert_eq!(a.guarded.name, "filter_guarded");
        assert_eq!(a.lemmas.equation, "filter_equation");
    }

    #[test]
    fn guarded_input_is_degenerate() {
        let a = artifacts("repeat");
        assert_eq!(a.eventually.ctors.len(), 1);
        assert!(a.eventually.ctors[0].recursive.is_none());
        assert!(a.inversions.is_empty());
        assert_eq!(a.pre.self_calls(), 0);
        assert_eq!(a.infinite.premises, vec![(0, 1)]);
    }

    #[test]
    fn multi_hole_head() {
        let a = artifacts("two");
        assert_eq!(a.infinite.premises, vec![(0, 2)]);
        let h = &a.guarded.branches[0].1;
        assert_eq!(h.shape(), "Node(_,#,#)");
    }

    #[test]
    fn stacked_constructors() {
        let a = artifacts("pair");
        let h = &a.guarded.branches[0].1;
        assert_eq!(h.shape(), "SCons(_,SCons(_,#))");
        assert_eq!(h.ctor_count(), 2);
        assert_eq!(h.payloads().len(), 2);
    }

    #[test]
    fn plain_holes_carry_no_premise() {
        let a = artifacts("mix");
        assert_eq!(a.infinite.premises, vec![(0, 0)]);
        assert!(matches!(a.guarded.branches[0].1.holes[0], Hole::Plain(CoExpr::Var(_))));
    }

    #[test]
    fn erased_bodies_are_guarded() {
        for f in ["dyn", "filter", "two", "pair", "mix", "repeat"] {
            let a = artifacts(f);
            assert_eq!(classify_function(&a.guarded.erased()).verdict, Verdict::Guarded, "{f}");
        }
    }

    #[test]
    fn rejected_definitions_are_not_transformed() {
        let p = parse_program(
            "codata Stream = SCons(nat, #)\n\
             cofun mapinc(s: Stream): Stream | SCons(x, tl) => SCons(x + 1, mapinc(tl))\n\
             fun nats(): Stream = SCons(1, mapinc(nats()))",
        )
        .unwrap();
        assert!(matches!(transform(&p, p.fun("nats").unwrap()), Err(TransformError::NotTransformable { .. })));
    }

    #[test]
    fn headless_guarded_function_is_reported() {
        let p = parse_program("codata Stream = SCons(nat, #)\ncofun id(s: Stream): Stream = s").unwrap();
        assert!(matches!(transform(&p, p.fun("id").unwrap()), Err(TransformError::Headless { clause: 1, .. })));
    }

    #[test]
    fn partial_overlap_becomes_no_match() {
        let p = parse_program(
            "codata Stream = SCons(nat, #)\n\
             fun k(x: nat): Stream | 0 => SCons(0, k(1)) | S(n) when n > 3 => SCons(n, k(n)) | n => k(n + 1)",
        )
        .unwrap();
        let a = transform(&p, p.fun("k").unwrap()).unwrap();
        let ex = &a.eventually.ctors[2].cond.exclusions;
        assert_eq!(ex.len(), 2);
        assert!(matches!(ex[0], Exclusion::NoMatch { clause: 0, .. }));
        assert!(matches!(ex[1], Exclusion::NoMatch { clause: 1, .. }));
        // A numeral pattern after a variable pattern is subsumed.
        let q = parse_program(
            "codata Stream = SCons(nat, #)\n\
             fun k(x: nat): Stream | n when n > 3 => SCons(n, k(n)) | 2 => k(5) | n => k(n + 1)",
        )
        .unwrap();
        let a = transform(&q, q.fun("k").unwrap()).unwrap();
        match &a.eventually.ctors[1].cond.exclusions[0] {
            Exclusion::GuardFalse { guard, .. } => assert_eq!(crate::pretty::base(guard), "2 > 3"),
            e => panic!("{e:?}"),
        }
    }
}
