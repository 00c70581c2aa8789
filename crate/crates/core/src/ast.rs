//! Abstract syntax of the corecursive language.
//!
//! Every node that a diagnostic may point at carries a [`Span`]. Spans never
//! take part in structural equality, so a program compares equal to the
//! result of re-parsing its pretty-printed form.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// A source position (1-based line and column).
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

// Positions are metadata: two trees that differ only in where they were
// written are the same tree.
impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseType {
    Nat,
    Bool,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Nat => f.write_str("nat"),
            BaseType::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Payload(BaseType),
    /// A corecursive slot, written `#`.
    Slot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDef {
    pub name: String,
    pub fields: Vec<FieldKind>,
}

impl CtorDef {
    pub fn slot_count(&self) -> usize {
        self.fields.iter().filter(|k| **k == FieldKind::Slot).count()
    }

    pub fn payload_types(&self) -> impl Iterator<Item = BaseType> + '_ {
        self.fields.iter().filter_map(|k| match k {
            FieldKind::Payload(t) => Some(*t),
            FieldKind::Slot => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodataDef {
    pub name: String,
    pub ctors: Vec<CtorDef>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Base(BaseType),
    Codata(String),
}

impl Type {
    pub fn is_codata(&self) -> bool {
        matches!(self, Type::Codata(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(b) => b.fmt(f),
            Type::Codata(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    /// Truncated subtraction.
    Sub,
    Mul,
    /// Floor division; `x / 0 = 0`.
    Div,
    /// `x mod 0 = 0`.
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 5
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseExpr {
    Nat(u64),
    Bool(bool),
    Var(String),
    Not(Box<BaseExpr>),
    Bin(BinOp, Box<BaseExpr>, Box<BaseExpr>),
    If(Box<BaseExpr>, Box<BaseExpr>, Box<BaseExpr>),
    /// Application of a `def` helper or a `rec` function.
    Call(String, Vec<BaseExpr>),
}

impl BaseExpr {
    pub fn bin(op: BinOp, l: BaseExpr, r: BaseExpr) -> BaseExpr {
        BaseExpr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn var(name: impl Into<String>) -> BaseExpr {
        BaseExpr::Var(name.into())
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BaseExpr::Nat(_) | BaseExpr::Bool(_) => {}
            BaseExpr::Var(v) => {
                out.insert(v.clone());
            }
            BaseExpr::Not(e) => e.free_vars(out),
            BaseExpr::Bin(_, l, r) => {
                l.free_vars(out);
                r.free_vars(out);
            }
            BaseExpr::If(c, t, e) => {
                c.free_vars(out);
                t.free_vars(out);
                e.free_vars(out);
            }
            BaseExpr::Call(_, args) => args.iter().for_each(|a| a.free_vars(out)),
        }
    }

    /// Simultaneous substitution of variables.
    pub fn subst(&self, map: &dyn Fn(&str) -> Option<BaseExpr>) -> BaseExpr {
        match self {
            BaseExpr::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            BaseExpr::Nat(_) | BaseExpr::Bool(_) => self.clone(),
            BaseExpr::Not(e) => BaseExpr::Not(Box::new(e.subst(map))),
            BaseExpr::Bin(op, l, r) => BaseExpr::bin(*op, l.subst(map), r.subst(map)),
            BaseExpr::If(c, t, e) => BaseExpr::If(Box::new(c.subst(map)), Box::new(t.subst(map)), Box::new(e.subst(map))),
            BaseExpr::Call(n, args) => BaseExpr::Call(n.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }
}

/// Clause patterns. Nat patterns use `0` and `S(p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(String),
    Wild,
    Zero,
    Succ(Box<Pattern>),
    Bool(bool),
    Ctor(String, Vec<Pattern>),
}

impl Pattern {
    pub fn binders(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Wild | Pattern::Zero | Pattern::Bool(_) => {}
            Pattern::Succ(p) => p.binders(out),
            Pattern::Ctor(_, ps) => ps.iter().for_each(|p| p.binders(out)),
        }
    }

    pub fn is_irrefutable(&self) -> bool {
        matches!(self, Pattern::Var(_) | Pattern::Wild)
    }

    /// Number of `S` wrappers when the pattern is a closed numeral.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Pattern::Zero => Some(0),
            Pattern::Succ(p) => p.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn numeral(n: u64) -> Pattern {
        (0..n).fold(Pattern::Zero, |p, _| Pattern::Succ(Box::new(p)))
    }

    pub fn rename(&self, map: &dyn Fn(&str) -> Option<String>) -> Pattern {
        match self {
            Pattern::Var(v) => Pattern::Var(map(v).unwrap_or_else(|| v.clone())),
            Pattern::Succ(p) => Pattern::Succ(Box::new(p.rename(map))),
            Pattern::Ctor(n, ps) => Pattern::Ctor(n.clone(), ps.iter().map(|p| p.rename(map)).collect()),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Base(BaseExpr),
    Co(CoExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoExpr {
    /// A constructor of the result type applied to its fields in order.
    Ctor {
        name: String,
        args: Vec<Arg>,
    },
    /// A call of the enclosing function.
    Rec {
        args: Vec<Arg>,
        span: Span,
    },
    /// A call of another (earlier) cofun or fun.
    App {
        name: String,
        args: Vec<Arg>,
        span: Span,
    },
    Var(String),
}

impl CoExpr {
    pub fn args(&self) -> &[Arg] {
        match self {
            CoExpr::Ctor { args, .. } | CoExpr::Rec { args, .. } | CoExpr::App { args, .. } => args,
            CoExpr::Var(_) => &[],
        }
    }

    pub fn contains_rec(&self) -> bool {
        match self {
            CoExpr::Rec { .. } => true,
            CoExpr::Var(_) => false,
            CoExpr::Ctor { args, .. } | CoExpr::App { args, .. } => args.iter().any(|a| match a {
                Arg::Co(c) => c.contains_rec(),
                Arg::Base(_) => false,
            }),
        }
    }

    /// Number of co-expression nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self
            .args()
            .iter()
            .map(|a| match a {
                Arg::Co(c) => c.size(),
                Arg::Base(_) => 0,
            })
            .sum::<usize>()
    }

    pub fn subst(&self, base: &dyn Fn(&str) -> Option<BaseExpr>, co: &dyn Fn(&str) -> Option<CoExpr>) -> CoExpr {
        let args = |args: &[Arg]| args.iter().map(|a| a.subst(base, co)).collect::<Vec<_>>();
        match self {
            CoExpr::Var(v) => co(v).unwrap_or_else(|| self.clone()),
            CoExpr::Ctor { name, args: a } => CoExpr::Ctor { name: name.clone(), args: args(a) },
            CoExpr::Rec { args: a, span } => CoExpr::Rec { args: args(a), span: *span },
            CoExpr::App { name, args: a, span } => CoExpr::App { name: name.clone(), args: args(a), span: *span },
        }
    }
}

impl Arg {
    pub fn subst(&self, base: &dyn Fn(&str) -> Option<BaseExpr>, co: &dyn Fn(&str) -> Option<CoExpr>) -> Arg {
        match self {
            Arg::Base(b) => Arg::Base(b.subst(base)),
            Arg::Co(c) => Arg::Co(c.subst(base, co)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub pats: Vec<Pattern>,
    pub guard: Option<BaseExpr>,
    pub body: CoExpr,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunKind {
    /// Declared guarded by its author.
    Cofun,
    /// A candidate corecursive definition that may be unguarded.
    Fun,
}

impl fmt::Display for FunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunKind::Cofun => f.write_str("cofun"),
            FunKind::Fun => f.write_str("fun"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub kind: FunKind,
    pub name: String,
    pub params: Vec<Param>,
    pub ret: String,
    pub clauses: Vec<Clause>,
    pub span: Span,
}

impl FunDef {
    /// True when the definition is a single unguarded clause binding each
    /// parameter by name, i.e. it can be written `= body`.
    pub fn is_equation(&self) -> bool {
        match self.clauses.as_slice() {
            [c] => {
                c.guard.is_none()
                    && c.pats.len() == self.params.len()
                    && c.pats.iter().zip(&self.params).all(|(p, q)| matches!(p, Pattern::Var(v) if *v == q.name))
            }
            _ => false,
        }
    }
}

/// A `def` helper over base values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperDef {
    pub name: String,
    pub params: Vec<(String, BaseType)>,
    pub ret: BaseType,
    pub body: BaseExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecClause {
    pub pats: Vec<Pattern>,
    pub body: BaseExpr,
    pub span: Span,
}

/// A recursive function over naturals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecFunDef {
    pub name: String,
    pub params: Vec<String>,
    pub clauses: Vec<RecClause>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Codata(CodataDef),
    Def(HelperDef),
    Rec(RecFunDef),
    Fun(FunDef),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Codata(d) => &d.name,
            Decl::Def(d) => &d.name,
            Decl::Rec(d) => &d.name,
            Decl::Fun(d) => &d.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Codata(d) => d.span,
            Decl::Def(d) => d.span,
            Decl::Rec(d) => d.span,
            Decl::Fun(d) => d.span,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn codata(&self, name: &str) -> Option<&CodataDef> {
        self.decls.iter().find_map(|d| match d {
            Decl::Codata(c) if c.name == name => Some(c),
            _ => None,
        })
    }

    /// Looks a constructor up by name, returning its owning type.
    pub fn ctor(&self, name: &str) -> Option<(&CodataDef, &CtorDef)> {
        self.decls.iter().find_map(|d| match d {
            Decl::Codata(c) => c.ctors.iter().find(|k| k.name == name).map(|k| (c, k)),
            _ => None,
        })
    }

    pub fn fun(&self, name: &str) -> Option<&FunDef> {
        self.funs().find(|f| f.name == name)
    }

    pub fn helper(&self, name: &str) -> Option<&HelperDef> {
        self.decls.iter().find_map(|d| match d {
            Decl::Def(h) if h.name == name => Some(h),
            _ => None,
        })
    }

    pub fn rec(&self, name: &str) -> Option<&RecFunDef> {
        self.recs().find(|r| r.name == name)
    }

    pub fn funs(&self) -> impl Iterator<Item = &FunDef> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Fun(f) => Some(f),
            _ => None,
        })
    }

    pub fn recs(&self) -> impl Iterator<Item = &RecFunDef> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Rec(r) => Some(r),
            _ => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}
