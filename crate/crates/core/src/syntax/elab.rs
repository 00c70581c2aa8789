//! Name resolution and type checking of the surface tree.

use std::collections::HashSet;

use crate::ast::*;

use super::parser::{Raw, RawClause, RawDecl, RawFieldKind, RawType};
use super::{ClosedExpr, Diagnostic, Diagnostics, Dir, Observation};

/// Typing environment for binders; later entries shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv(Vec<(String, Type)>);

impl TypeEnv {
    pub fn push(&mut self, name: impl Into<String>, ty: Type) {
        self.0.push((name.into(), ty));
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.0.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Type of an already elaborated base expression, `None` if it does not
/// type check in `env`.
pub fn infer_base_type(prog: &Program, e: &BaseExpr, env: &TypeEnv) -> Option<BaseType> {
    match e {
        BaseExpr::Nat(_) => Some(BaseType::Nat),
        BaseExpr::Bool(_) => Some(BaseType::Bool),
        BaseExpr::Var(v) => match env.lookup(v)? {
            Type::Base(b) => Some(*b),
            Type::Codata(_) => None,
        },
        BaseExpr::Not(_) => Some(BaseType::Bool),
        BaseExpr::Bin(op, _, _) => {
            if op.is_arithmetic() {
                Some(BaseType::Nat)
            } else {
                Some(BaseType::Bool)
            }
        }
        BaseExpr::If(_, t, _) => infer_base_type(prog, t, env),
        BaseExpr::Call(f, _) => {
            if let Some(h) = prog.helper(f) {
                Some(h.ret)
            } else {
                // `rec` functions, including one referring to itself.
                Some(BaseType::Nat)
            }
        }
    }
}

struct Ctx<'a> {
    prog: &'a Program,
    self_rec: Option<(&'a str, usize)>,
    self_fun: Option<(&'a str, &'a [Param], &'a str)>,
    env: TypeEnv,
}

fn type_err<T>(pos: Span, msg: impl Into<String>) -> Result<T, Diagnostic> {
    Err(Diagnostic::Type { pos, msg: msg.into() })
}

fn name_err<T>(pos: Span, msg: impl Into<String>) -> Result<T, Diagnostic> {
    Err(Diagnostic::Name { pos, msg: msg.into() })
}

impl<'a> Ctx<'a> {
    fn new(prog: &'a Program) -> Self {
        Ctx { prog, self_rec: None, self_fun: None, env: TypeEnv::default() }
    }

    fn base_expect(&self, raw: &Raw, want: BaseType) -> Result<BaseExpr, Diagnostic> {
        let (e, t) = self.base(raw)?;
        if t != want {
            return type_err(raw.span(), format!("expected a `{want}` expression, found `{t}`"));
        }
        Ok(e)
    }

    fn base(&self, raw: &Raw) -> Result<(BaseExpr, BaseType), Diagnostic> {
        match raw {
            Raw::Num(n, _) => Ok((BaseExpr::Nat(*n), BaseType::Nat)),
            Raw::Bool(b, _) => Ok((BaseExpr::Bool(*b), BaseType::Bool)),
            Raw::Name(n, pos) => match self.env.lookup(n) {
                Some(Type::Base(t)) => Ok((BaseExpr::Var(n.clone()), *t)),
                Some(Type::Codata(t)) => type_err(*pos, format!("`{n}` has codata type `{t}` where a base value is expected")),
                None => name_err(*pos, format!("unbound variable `{n}`")),
            },
            Raw::Not(e, _) => Ok((BaseExpr::Not(Box::new(self.base_expect(e, BaseType::Bool)?)), BaseType::Bool)),
            Raw::Bin(op, l, r, pos) => {
                let (le, lt) = self.base(l)?;
                let (re, rt) = self.base(r)?;
                let ty = if op.is_arithmetic() {
                    if lt != BaseType::Nat || rt != BaseType::Nat {
                        return type_err(*pos, format!("`{}` expects `nat` operands", op.symbol()));
                    }
                    BaseType::Nat
                } else if matches!(op, BinOp::And | BinOp::Or) {
                    if lt != BaseType::Bool || rt != BaseType::Bool {
                        return type_err(*pos, format!("`{}` expects `bool` operands", op.symbol()));
                    }
                    BaseType::Bool
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    if lt != rt {
                        return type_err(*pos, format!("cannot compare `{lt}` with `{rt}`"));
                    }
                    BaseType::Bool
                } else {
                    if lt != BaseType::Nat || rt != BaseType::Nat {
                        return type_err(*pos, format!("`{}` expects `nat` operands", op.symbol()));
                    }
                    BaseType::Bool
                };
                Ok((BaseExpr::bin(*op, le, re), ty))
            }
            Raw::If(c, t, e, pos) => {
                let c = self.base_expect(c, BaseType::Bool)?;
                let (te, tt) = self.base(t)?;
                let (ee, et) = self.base(e)?;
                if tt != et {
                    return type_err(*pos, format!("`if` branches have types `{tt}` and `{et}`"));
                }
                Ok((BaseExpr::If(Box::new(c), Box::new(te), Box::new(ee)), tt))
            }
            Raw::App(name, args, pos) => {
                if name == "S" {
                    if args.len() != 1 {
                        return type_err(*pos, "`S` takes exactly one argument");
                    }
                    let e = self.base_expect(&args[0], BaseType::Nat)?;
                    return Ok((BaseExpr::bin(BinOp::Add, e, BaseExpr::Nat(1)), BaseType::Nat));
                }
                let (params, ret): (Vec<BaseType>, BaseType) = if let Some((_, arity)) = self.self_rec.filter(|(r, _)| r == name) {
                    (vec![BaseType::Nat; arity], BaseType::Nat)
                } else if let Some(h) = self.prog.helper(name) {
                    (h.params.iter().map(|(_, t)| *t).collect(), h.ret)
                } else if let Some(r) = self.prog.rec(name) {
                    (vec![BaseType::Nat; r.params.len()], BaseType::Nat)
                } else if self.prog.ctor(name).is_some()
                    || self.prog.fun(name).is_some()
                    || self.self_fun.is_some_and(|(f, _, _)| f == name)
                {
                    return type_err(*pos, format!("`{name}` produces codata where a base value is expected"));
                } else {
                    return name_err(*pos, format!("unknown function `{name}`"));
                };
                if params.len() != args.len() {
                    return type_err(*pos, format!("`{name}` expects {} argument(s), found {}", params.len(), args.len()));
                }
                let args = args.iter().zip(params).map(|(a, t)| self.base_expect(a, t)).collect::<Result<Vec<_>, _>>()?;
                Ok((BaseExpr::Call(name.clone(), args), ret))
            }
            Raw::List(_, pos) => type_err(*pos, "list literals are only allowed in `fetch`"),
        }
    }

    fn args_for(&self, params: &[Type], raws: &[Raw], name: &str, pos: Span) -> Result<Vec<Arg>, Diagnostic> {
        if params.len() != raws.len() {
            return type_err(pos, format!("`{name}` expects {} argument(s), found {}", params.len(), raws.len()));
        }
        raws.iter()
            .zip(params)
            .map(|(r, t)| match t {
                Type::Base(b) => self.base_expect(r, *b).map(Arg::Base),
                Type::Codata(c) => self.co(r, Some(c)).map(|(e, _)| Arg::Co(e)),
            })
            .collect()
    }

    /// Elaborates a codata expression; `expected` is the required type when known.
    fn co(&self, raw: &Raw, expected: Option<&str>) -> Result<(CoExpr, String), Diagnostic> {
        let check = |got: &str, pos: Span| -> Result<(), Diagnostic> {
            match expected {
                Some(want) if want != got => type_err(pos, format!("expected a `{want}` value, found `{got}`")),
                _ => Ok(()),
            }
        };
        match raw {
            Raw::Name(n, pos) => match self.env.lookup(n) {
                Some(Type::Codata(t)) => {
                    check(t, *pos)?;
                    Ok((CoExpr::Var(n.clone()), t.clone()))
                }
                Some(Type::Base(t)) => type_err(*pos, format!("`{n}` is a `{t}` value where codata is expected")),
                None => {
                    if self.prog.fun(n).is_some() || self.self_fun.is_some_and(|(f, _, _)| f == n) {
                        type_err(*pos, format!("`{n}` must be applied: write `{n}(...)`"))
                    } else {
                        name_err(*pos, format!("unbound variable `{n}`"))
                    }
                }
            },
            Raw::App(name, raws, pos) => {
                if let Some((ty, ctor)) = self.prog.ctor(name) {
                    check(&ty.name, *pos)?;
                    if ctor.fields.len() != raws.len() {
                        return type_err(*pos, format!("constructor `{name}` has {} field(s), found {}", ctor.fields.len(), raws.len()));
                    }
                    let mut args = Vec::new();
                    for (r, k) in raws.iter().zip(&ctor.fields) {
                        args.push(match k {
                            FieldKind::Payload(b) => Arg::Base(self.base_expect(r, *b).map_err(|e| match e {
                                Diagnostic::Type { .. } if !matches!(r, Raw::Num(..) | Raw::Bool(..)) => {
                                    field_mismatch(name, r.span(), &format!("`{b}`"))
                                }
                                other => other,
                            })?),
                            FieldKind::Slot => Arg::Co(
                                self.co(r, Some(&ty.name))
                                    .map_err(|e| match e {
                                        Diagnostic::Type { .. } => field_mismatch(name, r.span(), "a corecursive value"),
                                        other => other,
                                    })?
                                    .0,
                            ),
                        });
                    }
                    return Ok((CoExpr::Ctor { name: name.clone(), args }, ty.name.clone()));
                }
                if let Some((_, params, ret)) = self.self_fun.filter(|(f, _, _)| f == name) {
                    let ret = ret.to_string();
                    check(&ret, *pos)?;
                    let tys: Vec<Type> = params.iter().map(|p| p.ty.clone()).collect();
                    let args = self.args_for(&tys, raws, name, *pos)?;
                    return Ok((CoExpr::Rec { args, span: *pos }, ret));
                }
                if let Some(f) = self.prog.fun(name) {
                    check(&f.ret, *pos)?;
                    let tys: Vec<Type> = f.params.iter().map(|p| p.ty.clone()).collect();
                    let args = self.args_for(&tys, raws, name, *pos)?;
                    return Ok((CoExpr::App { name: name.clone(), args, span: *pos }, f.ret.clone()));
                }
                if self.prog.helper(name).is_some() || self.prog.rec(name).is_some() || name == "S" {
                    return type_err(*pos, format!("`{name}` produces a base value where codata is expected"));
                }
                name_err(*pos, format!("unknown constructor or function `{name}`"))
            }
            other => type_err(
                other.span(),
                match expected {
                    Some(t) => format!("expected a `{t}` value, found a base expression"),
                    None => "expected a codata expression".to_string(),
                },
            ),
        }
    }

    fn pattern(&self, p: &Pattern, ty: &Type, pos: Span, seen: &mut Vec<(String, Type)>) -> Result<(), Diagnostic> {
        match (p, ty) {
            (Pattern::Var(v), _) => {
                if seen.iter().any(|(n, _)| n == v) {
                    return name_err(pos, format!("binder `{v}` occurs more than once in the clause"));
                }
                seen.push((v.clone(), ty.clone()));
                Ok(())
            }
            (Pattern::Wild, _) => Ok(()),
            (Pattern::Zero, Type::Base(BaseType::Nat)) => Ok(()),
            (Pattern::Succ(q), Type::Base(BaseType::Nat)) => self.pattern(q, ty, pos, seen),
            (Pattern::Bool(_), Type::Base(BaseType::Bool)) => Ok(()),
            (Pattern::Ctor(name, subs), Type::Codata(t)) => {
                let Some((owner, ctor)) = self.prog.ctor(name) else {
                    return name_err(pos, format!("unknown constructor `{name}`"));
                };
                if owner.name != *t {
                    return type_err(pos, format!("constructor `{name}` belongs to `{}`, not `{t}`", owner.name));
                }
                if subs.len() != ctor.fields.len() {
                    return type_err(pos, format!("constructor `{name}` has {} field(s), pattern has {}", ctor.fields.len(), subs.len()));
                }
                for (s, k) in subs.iter().zip(&ctor.fields) {
                    let fty = match k {
                        FieldKind::Payload(b) => Type::Base(*b),
                        FieldKind::Slot => Type::Codata(t.clone()),
                    };
                    self.pattern(s, &fty, pos, seen)?;
                }
                Ok(())
            }
            (p, ty) => type_err(pos, format!("pattern `{}` does not match type `{ty}`", crate::pretty::pattern(p))),
        }
    }
}

fn field_mismatch(ctor: &str, pos: Span, want: &str) -> Diagnostic {
    Diagnostic::Type { pos, msg: format!("field kind mismatch in `{ctor}`: expected {want}") }
}

pub(super) fn elaborate(decls: Vec<RawDecl>) -> Result<Program, Diagnostics> {
    let mut prog = Program::default();
    let mut names: HashSet<String> = HashSet::new();
    let mut diags = Vec::new();
    for d in decls {
        match elab_decl(&prog, &mut names, d) {
            Ok(decl) => prog.decls.push(decl),
            Err(e) => diags.push(e),
        }
    }
    if diags.is_empty() {
        Ok(prog)
    } else {
        Err(Diagnostics(diags))
    }
}

fn claim(names: &mut HashSet<String>, name: &str, pos: Span) -> Result<(), Diagnostic> {
    if name == "S" {
        return name_err(pos, "`S` is reserved for the successor pattern");
    }
    if !names.insert(name.to_string()) {
        return name_err(pos, format!("duplicate declaration of `{name}`"));
    }
    Ok(())
}

fn elab_decl(prog: &Program, names: &mut HashSet<String>, d: RawDecl) -> Result<Decl, Diagnostic> {
    match d {
        RawDecl::Codata { name, ctors, span } => {
            let mut local = HashSet::new();
            for (c, _, cspan) in &ctors {
                if !local.insert(c.clone()) {
                    return name_err(*cspan, format!("constructor `{c}` declared twice in `{name}`"));
                }
                if names.contains(c) || c == "S" || *c == name {
                    return name_err(*cspan, format!("constructor name `{c}` is already in use"));
                }
            }
            let ctors: Vec<CtorDef> = ctors
                .into_iter()
                .map(|(n, fs, _)| CtorDef {
                    name: n,
                    fields: fs
                        .into_iter()
                        .map(|f| match f {
                            RawFieldKind::Base(b) => FieldKind::Payload(b),
                            RawFieldKind::Slot => FieldKind::Slot,
                        })
                        .collect(),
                })
                .collect();
            if !ctors.iter().any(|c| c.slot_count() > 0) {
                return type_err(span, format!("`{name}` has no corecursive slot `#`, so it is not a codata type"));
            }
            claim(names, &name, span)?;
            for c in &ctors {
                names.insert(c.name.clone());
            }
            Ok(Decl::Codata(CodataDef { name, ctors, span }))
        }
        RawDecl::Def { name, params, body, span } => {
            check_distinct(params.iter().map(|(p, _)| p.as_str()), span)?;
            let mut cx = Ctx::new(prog);
            for (p, t) in &params {
                cx.env.push(p.clone(), Type::Base(*t));
            }
            let (body, ret) = cx.base(&body)?;
            claim(names, &name, span)?;
            Ok(Decl::Def(HelperDef { name, params, ret, body, span }))
        }
        RawDecl::Rec { name, params, clauses, span } => {
            check_distinct(params.iter().map(|p| p.as_str()), span)?;
            let mut cx = Ctx::new(prog);
            cx.self_rec = Some((&name, params.len()));
            let nat = Type::Base(BaseType::Nat);
            let mut out = Vec::new();
            for c in clauses {
                if c.pats.len() != params.len() {
                    return type_err(c.span, format!("clause has {} pattern(s), `{name}` has {} parameter(s)", c.pats.len(), params.len()));
                }
                let mut seen = Vec::new();
                for p in &c.pats {
                    cx.pattern(p, &nat, c.span, &mut seen)?;
                }
                let mut env = TypeEnv::default();
                for p in &params {
                    env.push(p.clone(), nat.clone());
                }
                for (b, t) in seen {
                    env.push(b, t);
                }
                cx.env = env;
                let body = cx.base_expect(&c.body, BaseType::Nat)?;
                out.push(RecClause { pats: c.pats, body, span: c.span });
            }
            claim(names, &name, span)?;
            Ok(Decl::Rec(RecFunDef { name, params, clauses: out, span }))
        }
        RawDecl::Fun { kind, name, params, ret, clauses, body, span } => {
            check_distinct(params.iter().map(|(p, _, _)| p.as_str()), span)?;
            if prog.codata(&ret.0).is_none() {
                return type_err(ret.1, format!("result type `{}` is not a declared codata type", ret.0));
            }
            let mut ps = Vec::new();
            for (p, t, _) in params {
                let ty = match t {
                    RawType::Base(b) => Type::Base(b),
                    RawType::Named(n, tspan) => {
                        if prog.codata(&n).is_none() {
                            return type_err(tspan, format!("unknown type `{n}`"));
                        }
                        Type::Codata(n)
                    }
                };
                ps.push(Param { name: p, ty });
            }
            let raw_clauses: Vec<RawClause> = match (clauses, body) {
                (Some(cs), _) => cs,
                (None, Some(b)) => {
                    vec![RawClause { pats: ps.iter().map(|p| Pattern::Var(p.name.clone())).collect(), guard: None, body: b, span }]
                }
                (None, None) => unreachable!("parser always yields clauses or a body"),
            };
            let mut cx = Ctx::new(prog);
            cx.self_fun = Some((&name, &ps, &ret.0));
            let mut out = Vec::new();
            for c in raw_clauses {
                if c.pats.len() != ps.len() {
                    return type_err(c.span, format!("clause has {} pattern(s), `{name}` has {} parameter(s)", c.pats.len(), ps.len()));
                }
                let mut seen = Vec::new();
                for (p, param) in c.pats.iter().zip(&ps) {
                    cx.pattern(p, &param.ty, c.span, &mut seen)?;
                }
                let mut env = TypeEnv::default();
                for p in &ps {
                    env.push(p.name.clone(), p.ty.clone());
                }
                for (b, t) in seen {
                    env.push(b, t);
                }
                cx.env = env;
                let guard = c.guard.as_ref().map(|g| cx.base_expect(g, BaseType::Bool)).transpose()?;
                let (body, _) = cx.co(&c.body, Some(&ret.0))?;
                out.push(Clause { pats: c.pats, guard, body, span: c.span });
            }
            claim(names, &name, span)?;
            Ok(Decl::Fun(FunDef { kind, name, params: ps, ret: ret.0, clauses: out, span }))
        }
    }
}

fn check_distinct<'a>(names: impl Iterator<Item = &'a str>, pos: Span) -> Result<(), Diagnostic> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return name_err(pos, format!("parameter `{n}` declared twice"));
        }
    }
    Ok(())
}

pub(super) fn closed(prog: &Program, raw: &Raw, expected: Option<&Type>) -> Result<ClosedExpr, Diagnostic> {
    let cx = Ctx::new(prog);
    match expected {
        Some(Type::Base(b)) => Ok(ClosedExpr::Base(cx.base_expect(raw, *b)?)),
        Some(Type::Codata(t)) => {
            let (e, t) = cx.co(raw, Some(t))?;
            Ok(ClosedExpr::Co(e, t))
        }
        None => {
            let is_co = match raw {
                Raw::App(n, _, _) => prog.ctor(n).is_some() || prog.fun(n).is_some(),
                _ => false,
            };
            if is_co {
                let (e, t) = cx.co(raw, None)?;
                Ok(ClosedExpr::Co(e, t))
            } else {
                Ok(ClosedExpr::Base(cx.base(raw)?.0))
            }
        }
    }
}

fn closed_co(prog: &Program, raw: &Raw) -> Result<(CoExpr, String), Diagnostic> {
    match closed(prog, raw, None)? {
        ClosedExpr::Co(e, t) => Ok((e, t)),
        ClosedExpr::Base(_) => type_err(raw.span(), "expected a codata expression"),
    }
}

pub(super) fn closed_args(prog: &Program, fun: &str, raws: &[Raw]) -> Result<Vec<Arg>, Diagnostic> {
    let Some(f) = prog.fun(fun) else {
        return name_err(Span::new(1, 1), format!("unknown function `{fun}`"));
    };
    let cx = Ctx::new(prog);
    let tys: Vec<Type> = f.params.iter().map(|p| p.ty.clone()).collect();
    cx.args_for(&tys, raws, fun, raws.first().map(|r| r.span()).unwrap_or(Span::new(1, 1)))
}

pub(super) fn observation(prog: &Program, raw: &Raw) -> Result<Observation, Diagnostic> {
    let declared = |n: &str| prog.decls.iter().any(|d| d.name() == n);
    if let Raw::App(name, args, pos) = raw {
        let count = |r: &Raw| match r {
            Raw::Num(n, _) => Ok(*n),
            other => type_err(other.span(), "expected a natural number literal"),
        };
        match name.as_str() {
            "nth" | "take" if !declared(name) => {
                if args.len() != 2 {
                    return type_err(*pos, format!("`{name}` takes a count and an expression"));
                }
                let n = count(&args[0])?;
                let (e, t) = closed_co(prog, &args[1])?;
                return Ok(if name == "nth" { Observation::Nth(n, e, t) } else { Observation::Take(n, e, t) });
            }
            "fetch" if !declared(name) => {
                if args.len() != 2 {
                    return type_err(*pos, "`fetch` takes a path and an expression");
                }
                let Raw::List(items, _) = &args[0] else {
                    return type_err(args[0].span(), "expected a path such as `[L, R]`");
                };
                let path = items
                    .iter()
                    .map(|i| match i {
                        Raw::Name(n, _) if n == "L" => Ok(Dir::L),
                        Raw::Name(n, _) if n == "R" => Ok(Dir::R),
                        other => type_err(other.span(), "path elements must be `L` or `R`"),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let (e, t) = closed_co(prog, &args[1])?;
                return Ok(Observation::Fetch(path, e, t));
            }
            _ => {}
        }
    }
    Ok(Observation::Value(closed(prog, raw, None)?))
}
