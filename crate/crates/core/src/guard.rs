//! Syntactic productivity and termination tests.
//!
//! Corecursive definitions are checked with the pre-guarded / guarded
//! position analysis: the root of a clause body is pre-guarded, and a
//! direct sub-term of a constructor sitting in a pre-guarded or guarded
//! position is guarded. A recursive call must be guarded (condition `*`)
//! and must never be an argument of another function (condition `**`).
//!
//! Recursive functions over naturals are checked for structurally smaller
//! calls.

use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::pretty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PositionTag {
    PreGuarded,
    Guarded,
    Unprotected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Ctor(String),
    Rec,
    App(String),
    Var(String),
}

/// A clause body annotated with position tags. `path` lists the argument
/// indices leading from the root to the node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tagged {
    pub tag: PositionTag,
    pub path: Vec<usize>,
    pub kind: NodeKind,
    pub children: Vec<Tagged>,
}

impl Tagged {
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a Tagged>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

pub fn tag_positions(body: &CoExpr) -> Tagged {
    tag_node(body, PositionTag::PreGuarded, Vec::new())
}

fn tag_node(e: &CoExpr, tag: PositionTag, path: Vec<usize>) -> Tagged {
    let (kind, child_tag) = match e {
        CoExpr::Ctor { name, .. } => {
            let t = match tag {
                PositionTag::PreGuarded | PositionTag::Guarded => PositionTag::Guarded,
                PositionTag::Unprotected => PositionTag::Unprotected,
            };
            (NodeKind::Ctor(name.clone()), t)
        }
        CoExpr::Rec { .. } => (NodeKind::Rec, PositionTag::Unprotected),
        CoExpr::App { name, .. } => (NodeKind::App(name.clone()), PositionTag::Unprotected),
        CoExpr::Var(v) => (NodeKind::Var(v.clone()), PositionTag::Unprotected),
    };
    let children = e
        .args()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a {
            Arg::Co(c) => {
                let mut p = path.clone();
                p.push(i);
                Some(tag_node(c, child_tag, p))
            }
            Arg::Base(_) => None,
        })
        .collect();
    Tagged { tag, path, kind, children }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CallTag {
    GuardedCall,
    /// Not under a constructor: violates condition `*`.
    UnguardedStar,
    /// Inside an argument of another function: violates condition `**`.
    UnguardedStarStar,
    /// A recursive call inside the arguments of another recursive call.
    UnsupportedNested,
}

impl fmt::Display for CallTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CallTag::GuardedCall => "guarded",
            CallTag::UnguardedStar => "unguarded (*)",
            CallTag::UnguardedStarStar => "unguarded (**)",
            CallTag::UnsupportedNested => "nested",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CallInfo {
    /// 0-based clause index.
    pub clause: usize,
    pub path: Vec<usize>,
    pub tag: CallTag,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Guarded,
    TransformableUnguarded,
    RejectedStarStar,
    RejectedUnsupported,
}

impl Verdict {
    pub fn is_rejected(self) -> bool {
        matches!(self, Verdict::RejectedStarStar | Verdict::RejectedUnsupported)
    }

    /// Guarded or transformable: the inductive/coinductive split applies.
    pub fn is_transformable(self) -> bool {
        !self.is_rejected()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Guarded => "Guarded",
            Verdict::TransformableUnguarded => "TransformableUnguarded",
            Verdict::RejectedStarStar => "RejectedStarStar",
            Verdict::RejectedUnsupported => "RejectedUnsupported",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub fun: String,
    pub verdict: Verdict,
    pub calls: Vec<CallInfo>,
    pub positions: Vec<Tagged>,
    /// Human readable explanations, each naming a source position.
    pub diagnostics: Vec<String>,
}

impl Classification {
    /// Indices of clauses whose body is a bare recursive call.
    pub fn unguarded_clauses(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.calls.iter().filter(|c| c.tag == CallTag::UnguardedStar).map(|c| c.clause).collect();
        v.dedup();
        v
    }
}

fn collect_calls(
    e: &CoExpr,
    path: &mut Vec<usize>,
    in_app: bool,
    in_rec: bool,
    tagged: &Tagged,
    out: &mut Vec<(Vec<usize>, CallTag, Span)>,
) {
    if let CoExpr::Rec { span, .. } = e {
        let tag = if in_app {
            CallTag::UnguardedStarStar
        } else if in_rec {
            CallTag::UnsupportedNested
        } else if tagged.tag == PositionTag::Guarded {
            CallTag::GuardedCall
        } else {
            CallTag::UnguardedStar
        };
        out.push((path.clone(), tag, *span));
    }
    let mut child = tagged.children.iter();
    for (i, a) in e.args().iter().enumerate() {
        if let Arg::Co(c) = a {
            let t = child.next().expect("tagging mirrors the expression");
            path.push(i);
            collect_calls(c, path, in_app || matches!(e, CoExpr::App { .. }), in_rec || matches!(e, CoExpr::Rec { .. }), t, out);
            path.pop();
        }
    }
}

fn path_str(p: &[usize]) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn enclosing_app<'a>(e: &'a CoExpr, path: &[usize]) -> Option<&'a str> {
    let mut cur = e;
    let mut found = None;
    for &i in path {
        if let CoExpr::App { name, .. } = cur {
            found = Some(name.as_str());
        }
        match &cur.args()[i] {
            Arg::Co(c) => cur = c,
            Arg::Base(_) => return found,
        }
    }
    found
}

pub fn classify_function(fun: &FunDef) -> Classification {
    let mut calls = Vec::new();
    let mut positions = Vec::new();
    let mut diagnostics = Vec::new();
    for (ci, clause) in fun.clauses.iter().enumerate() {
        let tagged = tag_positions(&clause.body);
        let mut found = Vec::new();
        collect_calls(&clause.body, &mut Vec::new(), false, false, &tagged, &mut found);
        for (path, tag, span) in found {
            match tag {
                CallTag::UnguardedStar => diagnostics.push(format!(
                    "{span}: `{}` clause {}: recursive call is not under a constructor (violates condition *)",
                    fun.name,
                    ci + 1
                )),
                CallTag::UnguardedStarStar => diagnostics.push(format!(
                    "{span}: `{}` clause {}: recursive call is an argument of `{}` (violates condition **)",
                    fun.name,
                    ci + 1,
                    enclosing_app(&clause.body, &path).unwrap_or("?")
                )),
                CallTag::UnsupportedNested => diagnostics.push(format!(
                    "{span}: `{}` clause {}: recursive call nested inside another recursive call's arguments is not supported",
                    fun.name,
                    ci + 1
                )),
                CallTag::GuardedCall => {}
            }
            calls.push(CallInfo { clause: ci, path, tag, span });
        }
        positions.push(tagged);
    }

    let has = |t: CallTag| calls.iter().any(|c: &CallInfo| c.tag == t);
    let verdict = if has(CallTag::UnguardedStarStar) {
        Verdict::RejectedStarStar
    } else if has(CallTag::UnsupportedNested) {
        Verdict::RejectedUnsupported
    } else if !has(CallTag::UnguardedStar) {
        Verdict::Guarded
    } else {
        // Bodies that are neither a bare recursive call nor headed by a
        // constructor leave no head data for the inductive component.
        let mut ok = true;
        for (ci, clause) in fun.clauses.iter().enumerate() {
            let bare = matches!(clause.body, CoExpr::Rec { .. });
            let headed = matches!(clause.body, CoExpr::Ctor { .. });
            if !bare && !headed {
                ok = false;
                diagnostics.push(format!(
                    "{}: `{}` clause {}: body `{}` produces no head constructor; unsupported next to unguarded calls",
                    clause.span,
                    fun.name,
                    ci + 1,
                    pretty::co_named(&clause.body, Some(&fun.name))
                ));
            }
        }
        if ok {
            Verdict::TransformableUnguarded
        } else {
            Verdict::RejectedUnsupported
        }
    };
    Classification { fun: fun.name.clone(), verdict, calls, positions, diagnostics }
}

pub fn describe_path(p: &[usize]) -> String {
    path_str(p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum StructuralVerdict {
    /// Every recursive call decreases the parameter at `param`
    /// (`None` when the function makes no recursive call).
    Accepted { param: Option<usize> },
    Rejected {
        clause: usize,
        #[serde(skip)]
        span: Span,
        reason: String,
    },
}

impl StructuralVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, StructuralVerdict::Accepted { .. })
    }
}

fn self_calls<'a>(name: &str, e: &'a BaseExpr, out: &mut Vec<&'a [BaseExpr]>) {
    match e {
        BaseExpr::Nat(_) | BaseExpr::Bool(_) | BaseExpr::Var(_) => {}
        BaseExpr::Not(x) => self_calls(name, x, out),
        BaseExpr::Bin(_, l, r) => {
            self_calls(name, l, out);
            self_calls(name, r, out);
        }
        BaseExpr::If(c, t, f) => {
            self_calls(name, c, out);
            self_calls(name, t, out);
            self_calls(name, f, out);
        }
        BaseExpr::Call(f, args) => {
            if f == name {
                out.push(args);
            }
            args.iter().for_each(|a| self_calls(name, a, out));
        }
    }
}

/// Depth of `S` constructors above binder `v` in `p`, if `v` occurs.
fn succ_depth(p: &Pattern, v: &str) -> Option<usize> {
    match p {
        Pattern::Var(x) if x == v => Some(0),
        Pattern::Succ(q) => succ_depth(q, v).map(|d| d + 1),
        Pattern::Ctor(_, qs) => qs.iter().find_map(|q| succ_depth(q, v)),
        _ => None,
    }
}

/// Why argument `arg` fails to be structurally smaller than the parameter
/// matched by `pat`, or `None` when it is smaller.
fn not_smaller(pat: &Pattern, arg: &BaseExpr) -> Option<String> {
    match arg {
        BaseExpr::Var(v) => match succ_depth(pat, v) {
            Some(d) if d >= 1 => None,
            Some(_) => Some(format!("`{v}` is not bound under `S` in pattern `{}`", pretty::pattern(pat))),
            None => Some(format!("`{v}` is not a variable of pattern `{}`", pretty::pattern(pat))),
        },
        other => Some(format!("argument `{}` is not a pattern variable", pretty::base(other))),
    }
}

pub fn check_structural(rec: &RecFunDef) -> StructuralVerdict {
    let calls: Vec<(usize, Span, &[BaseExpr])> = rec
        .clauses
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            let mut v = Vec::new();
            self_calls(&rec.name, &c.body, &mut v);
            v.into_iter().map(move |args| (ci, c.span, args))
        })
        .collect();
    if calls.is_empty() {
        return StructuralVerdict::Accepted { param: None };
    }
    for i in 0..rec.params.len() {
        if calls.iter().all(|(ci, _, args)| not_smaller(&rec.clauses[*ci].pats[i], &args[i]).is_none()) {
            return StructuralVerdict::Accepted { param: Some(i) };
        }
    }
    // Report against the first parameter, which is the only one in the
    // common single-argument case.
    let (ci, span, args) =
        calls.iter().find(|(ci, _, args)| not_smaller(&rec.clauses[*ci].pats[0], &args[0]).is_some()).copied().unwrap_or(calls[0]);
    let why = if rec.params.is_empty() {
        "recursive call without a decreasing argument".to_string()
    } else {
        not_smaller(&rec.clauses[ci].pats[0], &args[0]).unwrap_or_else(|| "no parameter decreases in every call".into())
    };
    StructuralVerdict::Rejected {
        clause: ci,
        span,
        reason: format!(
            "{span}: `{}` clause {}: call `{}({})` is not structurally smaller: {why}",
            rec.name,
            ci + 1,
            rec.name,
            args.iter().map(pretty::base).collect::<Vec<_>>().join(", ")
        ),
    }
}
