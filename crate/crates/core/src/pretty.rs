//! Canonical rendering of programs in the surface syntax.
//!
//! `parse_program(&program(p))` is structurally equal to `p`.

use std::fmt::Write;

use crate::ast::*;

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (i, d) in p.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&decl(d));
    }
    out
}

pub fn decl(d: &Decl) -> String {
    let mut s = String::new();
    match d {
        Decl::Codata(c) => {
            let ctors: Vec<String> = c
                .ctors
                .iter()
                .map(|k| {
                    let fields: Vec<String> = k
                        .fields
                        .iter()
                        .map(|f| match f {
                            FieldKind::Payload(b) => b.to_string(),
                            FieldKind::Slot => "#".to_string(),
                        })
                        .collect();
                    format!("{}({})", k.name, fields.join(", "))
                })
                .collect();
            let _ = writeln!(s, "codata {} = {}", c.name, ctors.join(" | "));
        }
        Decl::Def(h) => {
            let params: Vec<String> = h
                .params
                .iter()
                .map(|(n, t)| match t {
                    BaseType::Nat => n.clone(),
                    BaseType::Bool => format!("{n}: bool"),
                })
                .collect();
            let _ = writeln!(s, "def {}({}) = {}", h.name, params.join(", "), base(&h.body));
        }
        Decl::Rec(r) => {
            let _ = writeln!(s, "rec {}({}): nat", r.name, r.params.join(", "));
            for c in &r.clauses {
                let pats: Vec<String> = c.pats.iter().map(pattern).collect();
                let _ = writeln!(s, "  | {} => {}", pats.join(", "), base(&c.body));
            }
        }
        Decl::Fun(f) => {
            let params: Vec<String> = f.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
            let head = format!("{} {}({}): {}", f.kind, f.name, params.join(", "), f.ret);
            if f.is_equation() {
                let _ = writeln!(s, "{head} = {}", co_named(&f.clauses[0].body, Some(&f.name)));
            } else {
                let _ = writeln!(s, "{head}");
                for c in &f.clauses {
                    let _ = writeln!(s, "  | {}", clause_lhs_body(c, &f.name));
                }
            }
        }
    }
    s
}

pub fn clause_lhs_body(c: &Clause, fun: &str) -> String {
    let pats: Vec<String> = c.pats.iter().map(pattern).collect();
    let guard = c.guard.as_ref().map(|g| format!(" when {}", base(g))).unwrap_or_default();
    format!("{}{} => {}", pats.join(", "), guard, co_named(&c.body, Some(fun)))
}

pub fn pattern(p: &Pattern) -> String {
    if let Some(n) = p.as_numeral() {
        return n.to_string();
    }
    match p {
        Pattern::Var(v) => v.clone(),
        Pattern::Wild => "_".to_string(),
        Pattern::Zero => "0".to_string(),
        Pattern::Succ(q) => format!("S({})", pattern(q)),
        Pattern::Bool(b) => b.to_string(),
        Pattern::Ctor(n, ps) => {
            let subs: Vec<String> = ps.iter().map(pattern).collect();
            format!("{n}({})", subs.join(", "))
        }
    }
}

const PREC_IF: u8 = 0;
const PREC_NOT: u8 = 3;
const PREC_ATOM: u8 = 7;

fn prec(e: &BaseExpr) -> u8 {
    match e {
        BaseExpr::If(..) => PREC_IF,
        BaseExpr::Not(_) => PREC_NOT,
        BaseExpr::Bin(op, _, _) => op.precedence(),
        _ => PREC_ATOM,
    }
}

pub fn base(e: &BaseExpr) -> String {
    base_at(e, 0)
}

fn base_at(e: &BaseExpr, min: u8) -> String {
    let s = match e {
        BaseExpr::Nat(n) => n.to_string(),
        BaseExpr::Bool(b) => b.to_string(),
        BaseExpr::Var(v) => v.clone(),
        BaseExpr::Not(x) => format!("!{}", base_at(x, PREC_NOT)),
        BaseExpr::Bin(op, l, r) => {
            let p = op.precedence();
            let (lmin, rmin) = if op.is_comparison() { (p + 1, p + 1) } else { (p, p + 1) };
            format!("{} {} {}", base_at(l, lmin), op.symbol(), base_at(r, rmin))
        }
        BaseExpr::If(c, t, f) => format!("if {} then {} else {}", base(c), base(t), base(f)),
        BaseExpr::Call(n, args) => {
            let a: Vec<String> = args.iter().map(base).collect();
            format!("{n}({})", a.join(", "))
        }
    };
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn co(e: &CoExpr) -> String {
    co_named(e, None)
}

/// Renders a body, printing recursive calls under `self_name` when given.
pub fn co_named(e: &CoExpr, self_name: Option<&str>) -> String {
    match e {
        CoExpr::Var(v) => v.clone(),
        CoExpr::Ctor { name, args } | CoExpr::App { name, args, .. } => {
            format!("{name}({})", args_str(args, self_name))
        }
        CoExpr::Rec { args, .. } => format!("{}({})", self_name.unwrap_or("self"), args_str(args, self_name)),
    }
}

pub fn arg(a: &Arg) -> String {
    match a {
        Arg::Base(b) => base(b),
        Arg::Co(c) => co(c),
    }
}

fn args_str(args: &[Arg], self_name: Option<&str>) -> String {
    args.iter()
        .map(|a| match a {
            Arg::Base(b) => base(b),
            Arg::Co(c) => co_named(c, self_name),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
