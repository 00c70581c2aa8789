//! Recursive-descent parser producing an untyped surface tree. Whether an
//! application is a constructor, a helper or a recursive call is decided
//! later during elaboration.

use crate::ast::{BaseType, BinOp, FunKind, Pattern, Span};

use super::lexer::{Tok, Token};
use super::Diagnostic;

#[derive(Clone, Debug)]
pub enum Raw {
    Num(u64, Span),
    Bool(bool, Span),
    Name(String, Span),
    App(String, Vec<Raw>, Span),
    Bin(BinOp, Box<Raw>, Box<Raw>, Span),
    Not(Box<Raw>, Span),
    If(Box<Raw>, Box<Raw>, Box<Raw>, Span),
    List(Vec<Raw>, Span),
}

impl Raw {
    pub fn span(&self) -> Span {
        match self {
            Raw::Num(_, s)
            | Raw::Bool(_, s)
            | Raw::Name(_, s)
            | Raw::App(_, _, s)
            | Raw::Bin(_, _, _, s)
            | Raw::Not(_, s)
            | Raw::If(_, _, _, s)
            | Raw::List(_, s) => *s,
        }
    }
}

#[derive(Clone, Debug)]
pub enum RawFieldKind {
    Base(BaseType),
    Slot,
}

#[derive(Clone, Debug)]
pub enum RawType {
    Base(BaseType),
    Named(String, Span),
}

#[derive(Clone, Debug)]
pub struct RawClause {
    pub pats: Vec<Pattern>,
    pub guard: Option<Raw>,
    pub body: Raw,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum RawDecl {
    Codata {
        name: String,
        ctors: Vec<(String, Vec<RawFieldKind>, Span)>,
        span: Span,
    },
    Def {
        name: String,
        params: Vec<(String, BaseType)>,
        body: Raw,
        span: Span,
    },
    Rec {
        name: String,
        params: Vec<String>,
        clauses: Vec<RawClause>,
        span: Span,
    },
    Fun {
        kind: FunKind,
        name: String,
        params: Vec<(String, RawType, Span)>,
        ret: (String, Span),
        /// `None` for the `= body` equation form.
        clauses: Option<Vec<RawClause>>,
        body: Option<Raw>,
        span: Span,
    },
}

const KEYWORDS: &[&str] = &["codata", "def", "rec", "cofun", "fun", "when", "if", "then", "else", "true", "false", "mod", "nat", "bool"];

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, Diagnostic> {
        Err(Diagnostic::Syntax { pos: self.span(), expected: expected.to_string(), found: self.peek().to_string() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), Diagnostic> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    /// Closes a comma separated list.
    fn end_list(&mut self) -> Result<(), Diagnostic> {
        if self.eat_sym(")") {
            Ok(())
        } else {
            self.error("`,` or `)`")
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), Diagnostic> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.span();
                self.bump();
                Ok((s, span))
            }
            _ => self.error("an identifier"),
        }
    }

    fn at_decl_start(&self) -> bool {
        ["codata", "def", "rec", "cofun", "fun"].iter().any(|k| self.is_kw(k))
    }

    pub fn program(&mut self) -> Result<Vec<RawDecl>, Diagnostic> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(decls)
    }

    fn decl(&mut self) -> Result<RawDecl, Diagnostic> {
        let span = self.span();
        if self.is_kw("codata") {
            self.bump();
            self.codata(span)
        } else if self.is_kw("def") {
            self.bump();
            self.def(span)
        } else if self.is_kw("rec") {
            self.bump();
            self.rec(span)
        } else if self.is_kw("cofun") {
            self.bump();
            self.fun(FunKind::Cofun, span)
        } else if self.is_kw("fun") {
            self.bump();
            self.fun(FunKind::Fun, span)
        } else {
            self.error("a declaration (`codata`, `def`, `rec`, `cofun` or `fun`)")
        }
    }

    fn codata(&mut self, span: Span) -> Result<RawDecl, Diagnostic> {
        let (name, _) = self.ident()?;
        self.expect_sym("=")?;
        let mut ctors = vec![self.ctor()?];
        while self.eat_sym("|") {
            ctors.push(self.ctor()?);
        }
        Ok(RawDecl::Codata { name, ctors, span })
    }

    fn ctor(&mut self) -> Result<(String, Vec<RawFieldKind>, Span), Diagnostic> {
        let (name, span) = self.ident()?;
        self.expect_sym("(")?;
        let mut fields = vec![self.field_kind()?];
        while self.eat_sym(",") {
            fields.push(self.field_kind()?);
        }
        self.end_list()?;
        Ok((name, fields, span))
    }

    fn field_kind(&mut self) -> Result<RawFieldKind, Diagnostic> {
        if self.eat_sym("#") {
            return Ok(RawFieldKind::Slot);
        }
        match self.base_type_opt() {
            Some(t) => Ok(RawFieldKind::Base(t)),
            None => self.error("a field type (`nat`, `bool` or `#`)"),
        }
    }

    fn base_type_opt(&mut self) -> Option<BaseType> {
        if self.is_kw("nat") {
            self.bump();
            Some(BaseType::Nat)
        } else if self.is_kw("bool") {
            self.bump();
            Some(BaseType::Bool)
        } else {
            None
        }
    }

    fn def(&mut self, span: Span) -> Result<RawDecl, Diagnostic> {
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (p, _) = self.ident()?;
                let ty = if self.eat_sym(":") {
                    match self.base_type_opt() {
                        Some(t) => t,
                        None => return self.error("`nat` or `bool`"),
                    }
                } else {
                    BaseType::Nat
                };
                params.push((p, ty));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("=")?;
        let body = self.expr()?;
        Ok(RawDecl::Def { name, params, body, span })
    }

    fn rec(&mut self, span: Span) -> Result<RawDecl, Diagnostic> {
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (p, _) = self.ident()?;
                if self.eat_sym(":") {
                    self.expect_kw("nat")?;
                }
                params.push(p);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym(":")?;
        self.expect_kw("nat")?;
        let clauses = self.clauses(false)?;
        Ok(RawDecl::Rec { name, params, clauses, span })
    }

    fn fun(&mut self, kind: FunKind, span: Span) -> Result<RawDecl, Diagnostic> {
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (p, pspan) = self.ident()?;
                self.expect_sym(":")?;
                let ty = match self.base_type_opt() {
                    Some(t) => RawType::Base(t),
                    None => {
                        let (t, tspan) = self.ident()?;
                        RawType::Named(t, tspan)
                    }
                };
                params.push((p, ty, pspan));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym(":")?;
        let ret = self.ident()?;
        if self.eat_sym("=") {
            let body = self.expr()?;
            return Ok(RawDecl::Fun { kind, name, params, ret, clauses: None, body: Some(body), span });
        }
        let clauses = self.clauses(true)?;
        Ok(RawDecl::Fun { kind, name, params, ret, clauses: Some(clauses), body: None, span })
    }

    fn clauses(&mut self, allow_guard: bool) -> Result<Vec<RawClause>, Diagnostic> {
        if !self.is_sym("|") {
            return self.error(if allow_guard { "`|` or `=`" } else { "`|`" });
        }
        let mut out = Vec::new();
        while self.is_sym("|") {
            let span = self.span();
            self.bump();
            let mut pats = vec![self.pattern()?];
            while self.eat_sym(",") {
                pats.push(self.pattern()?);
            }
            let guard = if allow_guard && self.is_kw("when") {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_sym("=>")?;
            let body = self.expr()?;
            out.push(RawClause { pats, guard, body, span });
            if self.at_decl_start() {
                break;
            }
        }
        Ok(out)
    }

    fn pattern(&mut self) -> Result<Pattern, Diagnostic> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Pattern::numeral(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Pattern::Bool(s == "true"))
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(Pattern::Wild)
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                if self.eat_sym("(") {
                    let mut subs = Vec::new();
                    if !self.is_sym(")") {
                        subs.push(self.pattern()?);
                        while self.eat_sym(",") {
                            subs.push(self.pattern()?);
                        }
                    }
                    self.expect_sym(")")?;
                    if name == "S" {
                        if subs.len() != 1 {
                            return self.error("exactly one argument to `S`");
                        }
                        return Ok(Pattern::Succ(Box::new(subs.pop().unwrap())));
                    }
                    Ok(Pattern::Ctor(name, subs))
                } else {
                    Ok(Pattern::Var(name))
                }
            }
            _ => self.error("a pattern"),
        }
    }

    pub fn single_expr(&mut self) -> Result<Raw, Diagnostic> {
        let e = self.expr()?;
        if *self.peek() != Tok::Eof {
            return self.error("end of input");
        }
        Ok(e)
    }

    pub fn arg_list(&mut self) -> Result<Vec<Raw>, Diagnostic> {
        let mut out = Vec::new();
        if *self.peek() == Tok::Eof {
            return Ok(out);
        }
        out.push(self.expr()?);
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        if *self.peek() != Tok::Eof {
            return self.error("`,` or end of input");
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> Result<Raw, Diagnostic> {
        if self.is_kw("if") {
            let span = self.span();
            self.bump();
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Raw::If(Box::new(c), Box::new(t), Box::new(e), span));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Raw, Diagnostic> {
        let mut l = self.and_expr()?;
        while self.is_sym("||") {
            let span = self.span();
            self.bump();
            let r = self.and_expr()?;
            l = Raw::Bin(BinOp::Or, Box::new(l), Box::new(r), span);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Raw, Diagnostic> {
        let mut l = self.not_expr()?;
        while self.is_sym("&&") {
            let span = self.span();
            self.bump();
            let r = self.not_expr()?;
            l = Raw::Bin(BinOp::And, Box::new(l), Box::new(r), span);
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Result<Raw, Diagnostic> {
        if self.is_sym("!") {
            let span = self.span();
            self.bump();
            let e = self.not_expr()?;
            return Ok(Raw::Not(Box::new(e), span));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Raw, Diagnostic> {
        let l = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(l),
        };
        let span = self.span();
        self.bump();
        let r = self.add_expr()?;
        Ok(Raw::Bin(op, Box::new(l), Box::new(r), span))
    }

    fn add_expr(&mut self) -> Result<Raw, Diagnostic> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(l),
            };
            let span = self.span();
            self.bump();
            let r = self.mul_expr()?;
            l = Raw::Bin(op, Box::new(l), Box::new(r), span);
        }
    }

    fn mul_expr(&mut self) -> Result<Raw, Diagnostic> {
        let mut l = self.atom()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                _ => return Ok(l),
            };
            let span = self.span();
            self.bump();
            let r = self.atom()?;
            l = Raw::Bin(op, Box::new(l), Box::new(r), span);
        }
    }

    fn atom(&mut self) -> Result<Raw, Diagnostic> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Raw::Num(n, span))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Raw::Bool(s == "true", span))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.is_sym("]") {
                    items.push(self.expr()?);
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                }
                self.expect_sym("]")?;
                Ok(Raw::List(items, span))
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident()?;
                if matches!(self.peek(), Tok::Sym("(")) && !matches!(self.peek_at(1), Tok::Eof) {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    Ok(Raw::App(name, args, span))
                } else {
                    Ok(Raw::Name(name, span))
                }
            }
            _ => self.error("an expression"),
        }
    }
}
