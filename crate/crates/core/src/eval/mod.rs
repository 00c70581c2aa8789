//! Executable semantics under fuel.
//!
//! Codata values are memoized suspensions ([`Lazy`]). A suspended call runs
//! either the source clauses directly ([`Route::Source`]) or, for
//! transformable definitions, the inductive component followed by the head
//! of the guarded function ([`Route::Pre`]). One unit of fuel is consumed per
//! clause reduction of a codata-producing definition.

mod decide;
mod observe;
mod value;

use std::cell::Cell;
use std::rc::Rc;

use thiserror::Error;

use crate::analysis::Analysis;
use crate::ast::*;
use crate::syntax::ClosedExpr;

pub use decide::{
    check_equation, Decision, EquationVerdict, EventuallyCertificate, HeadInstance, HoleValue, InfiniteVerdict, PreOutput, Witness,
};
pub use observe::{Bisim, Fetched};
pub use value::{describe_args, KeyArg, Lazy, Node, Route, Sem, StateKey, Value, KEY_DEPTH_LIMIT};

use value::Call;

/// Nesting limit for base-level function calls.
pub const BASE_DEPTH_LIMIT: u32 = 2048;
/// Total base-level calls allowed per machine.
pub const BASE_CALL_BUDGET: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("eventually not established for {call}: {reason}")]
    NotEstablished { call: String, reason: String },
    #[error("no clause of `{fun}` matches ({args})")]
    NoMatch { fun: String, args: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("recursion depth limit exceeded in `{0}`")]
    DepthLimit(String),
    #[error("base evaluation budget exhausted")]
    BaseBudget,
    #[error("value demanded while it is being computed: {0}")]
    BlackHole(String),
    #[error("unknown definition `{0}`")]
    Unknown(String),
    #[error("`{0}` has no inductive component")]
    NotTransformable(String),
    #[error("{0}")]
    Observation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl EvalError {
    /// Errors that may disappear with more fuel.
    pub fn is_retryable(&self) -> bool {
        matches!(self, EvalError::FuelExhausted)
    }
}

/// Variable bindings; names borrow from the program.
pub type Env<'p> = Vec<(&'p str, Value)>;

fn lookup<'e>(env: &'e [(&str, Value)], v: &str) -> Result<&'e Value, EvalError> {
    env.iter().rev().find(|(n, _)| *n == v).map(|(_, x)| x).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))
}

/// The definition a body belongs to, for resolving recursive calls.
#[derive(Clone, Copy)]
struct Ctx<'s> {
    fun: Option<&'s str>,
    route: Route,
    sem: Sem,
}

/// Evaluation context: program, analysis results and a fuel budget.
pub struct Machine<'a> {
    pub prog: &'a Program,
    pub analysis: &'a Analysis,
    fuel: Cell<u64>,
    base_depth: Cell<u32>,
    base_calls: Cell<u64>,
    rec_calls: Cell<u64>,
}

impl<'a> Machine<'a> {
    pub fn new(prog: &'a Program, analysis: &'a Analysis, fuel: u64) -> Self {
        Machine { prog, analysis, fuel: Cell::new(fuel), base_depth: Cell::new(0), base_calls: Cell::new(0), rec_calls: Cell::new(0) }
    }

    pub fn fuel(&self) -> u64 {
        self.fuel.get()
    }

    pub fn set_fuel(&self, fuel: u64) {
        self.fuel.set(fuel);
    }

    fn tick(&self) -> Result<(), EvalError> {
        match self.fuel.get() {
            0 => Err(EvalError::FuelExhausted),
            n => {
                self.fuel.set(n - 1);
                Ok(())
            }
        }
    }

    /// Number of recursive-function invocations so far.
    pub fn rec_calls(&self) -> u64 {
        self.rec_calls.get()
    }

    fn fun(&self, name: &str) -> Result<&'a FunDef, EvalError> {
        self.prog.fun(name).ok_or_else(|| EvalError::Unknown(name.to_string()))
    }

    fn route_for(&self, name: &str, sem: Sem) -> Route {
        if sem == Sem::Transformed && self.analysis.uses_pre(name) {
            Route::Pre
        } else {
            Route::Source
        }
    }

    // ---- base level ----

    pub fn eval_base(&self, e: &BaseExpr, env: &[(&str, Value)]) -> Result<Value, EvalError> {
        Ok(match e {
            BaseExpr::Nat(n) => Value::Nat(*n),
            BaseExpr::Bool(b) => Value::Bool(*b),
            BaseExpr::Var(v) => lookup(env, v)?.clone(),
            BaseExpr::Not(x) => Value::Bool(!self.eval_base(x, env)?.as_bool()?),
            BaseExpr::If(c, t, f) => {
                if self.eval_base(c, env)?.as_bool()? {
                    self.eval_base(t, env)?
                } else {
                    self.eval_base(f, env)?
                }
            }
            BaseExpr::Bin(op, l, r) => {
                match op {
                    BinOp::And => return Ok(Value::Bool(self.eval_base(l, env)?.as_bool()? && self.eval_base(r, env)?.as_bool()?)),
                    BinOp::Or => return Ok(Value::Bool(self.eval_base(l, env)?.as_bool()? || self.eval_base(r, env)?.as_bool()?)),
                    _ => {}
                }
                let a = self.eval_base(l, env)?;
                let b = self.eval_base(r, env)?;
                binop(*op, &a, &b)?
            }
            BaseExpr::Call(name, args) => {
                let vals = args.iter().map(|a| self.eval_base(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.call_base(name, vals)?
            }
        })
    }

    fn call_base(&self, name: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        let calls = self.base_calls.get() + 1;
        if calls > BASE_CALL_BUDGET {
            return Err(EvalError::BaseBudget);
        }
        self.base_calls.set(calls);
        let depth = self.base_depth.get();
        if depth >= BASE_DEPTH_LIMIT {
            return Err(EvalError::DepthLimit(name.to_string()));
        }
        self.base_depth.set(depth + 1);
        let out = self.call_base_inner(name, args);
        self.base_depth.set(depth);
        out
    }

    fn call_base_inner(&self, name: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        if let Some(h) = self.prog.helper(name) {
            let env: Env = h.params.iter().map(|(p, _)| p.as_str()).zip(args).collect();
            return self.eval_base(&h.body, &env);
        }
        let r = self.prog.rec(name).ok_or_else(|| EvalError::Unknown(name.to_string()))?;
        self.rec_calls.set(self.rec_calls.get() + 1);
        let params: Env = r.params.iter().map(String::as_str).zip(args.iter().cloned()).collect();
        for c in &r.clauses {
            let mut env = params.clone();
            if self.match_all(&c.pats, &args, &mut env)? {
                return self.eval_base(&c.body, &env);
            }
        }
        Err(EvalError::NoMatch { fun: name.to_string(), args: show_values(&args) })
    }

    /// Evaluates a recursive function, returning its value and the number of
    /// recursive-function invocations it made.
    pub fn eval_rec(&self, name: &str, args: &[u64]) -> Result<(u64, u64), EvalError> {
        let before = self.rec_calls.get();
        let v = self.call_base(name, args.iter().map(|n| Value::Nat(*n)).collect())?.as_nat()?;
        Ok((v, self.rec_calls.get() - before))
    }

    // ---- matching ----

    fn match_pattern(&self, p: &'a Pattern, v: &Value, env: &mut Env<'a>) -> Result<bool, EvalError> {
        match p {
            Pattern::Var(x) => {
                env.push((x.as_str(), v.clone()));
                Ok(true)
            }
            Pattern::Wild => Ok(true),
            Pattern::Zero => Ok(v.as_nat()? == 0),
            Pattern::Succ(q) => match v.as_nat()? {
                0 => Ok(false),
                n => self.match_pattern(q, &Value::Nat(n - 1), env),
            },
            Pattern::Bool(b) => Ok(v.as_bool()? == *b),
            Pattern::Ctor(name, subs) => {
                let node = self.force(v.as_lazy()?)?;
                if &*node.ctor != name {
                    return Ok(false);
                }
                for (q, f) in subs.iter().zip(&node.fields) {
                    if !self.match_pattern(q, f, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn match_all(&self, pats: &'a [Pattern], args: &[Value], env: &mut Env<'a>) -> Result<bool, EvalError> {
        for (p, a) in pats.iter().zip(args) {
            if !self.match_pattern(p, a, env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Environment of clause `ci` if it matches `args` and its guard holds.
    fn try_clause(&self, f: &'a FunDef, ci: usize, args: &[Value]) -> Result<Option<Env<'a>>, EvalError> {
        let c = &f.clauses[ci];
        let mut env: Env = Vec::with_capacity(f.params.len() + 6);
        env.extend(f.params.iter().map(|p| p.name.as_str()).zip(args.iter().cloned()));
        if !self.match_all(&c.pats, args, &mut env)? {
            return Ok(None);
        }
        if let Some(g) = &c.guard {
            if !self.eval_base(g, &env)?.as_bool()? {
                return Ok(None);
            }
        }
        Ok(Some(env))
    }

    /// First-match clause selection without consuming fuel.
    fn select_untimed(&self, f: &'a FunDef, args: &[Value]) -> Result<Option<(usize, Env<'a>)>, EvalError> {
        for ci in 0..f.clauses.len() {
            if let Some(env) = self.try_clause(f, ci, args)? {
                return Ok(Some((ci, env)));
            }
        }
        Ok(None)
    }

    /// One clause reduction: consumes one unit of fuel.
    fn select(&self, f: &'a FunDef, args: &[Value]) -> Result<Option<(usize, Env<'a>)>, EvalError> {
        self.tick()?;
        self.select_untimed(f, args)
    }

    // ---- instantiation ----

    fn inst_arg(&self, a: &Arg, env: &[(&str, Value)], cx: Ctx) -> Result<Value, EvalError> {
        match a {
            Arg::Base(b) => self.eval_base(b, env),
            Arg::Co(c) => self.inst_co(c, env, cx),
        }
    }

    fn inst_args(&self, args: &[Arg], env: &[(&str, Value)], cx: Ctx) -> Result<Vec<Value>, EvalError> {
        args.iter().map(|a| self.inst_arg(a, env, cx)).collect()
    }

    /// Turns a codata expression into a value without forcing anything:
    /// constructors are built, calls are suspended.
    fn inst_co(&self, e: &CoExpr, env: &[(&str, Value)], cx: Ctx) -> Result<Value, EvalError> {
        Ok(Value::Co(match e {
            CoExpr::Var(v) => return lookup(env, v).cloned(),
            CoExpr::Ctor { name, args } => Lazy::ready(Node { ctor: Rc::from(name.as_str()), fields: self.inst_args(args, env, cx)? }),
            CoExpr::Rec { args, .. } => {
                let fun = cx.fun.ok_or_else(|| EvalError::Internal("recursive call outside a definition".into()))?;
                Lazy::call(Call { fun: Rc::from(fun), route: cx.route, sem: cx.sem, args: self.inst_args(args, env, cx)? })
            }
            CoExpr::App { name, args, .. } => Lazy::call(Call {
                fun: Rc::from(name.as_str()),
                route: self.route_for(name, cx.sem),
                sem: cx.sem,
                args: self.inst_args(args, env, cx)?,
            }),
        }))
    }

    /// Suspends a call of `fun` on `args`.
    pub fn suspend(&self, fun: &str, args: Vec<Value>, route: Route, sem: Sem) -> Lazy {
        Lazy::call(Call { fun: Rc::from(fun), route, sem, args })
    }

    /// Builds the value of a closed expression.
    pub fn closed(&self, e: &ClosedExpr, sem: Sem) -> Result<Value, EvalError> {
        let cx = Ctx { fun: None, route: Route::Source, sem };
        match e {
            ClosedExpr::Base(b) => self.eval_base(b, &Vec::new()),
            ClosedExpr::Co(c, _) => self.inst_co(c, &Vec::new(), cx),
        }
    }

    /// Builds argument values for a call from parsed closed arguments.
    pub fn closed_args(&self, args: &[Arg], sem: Sem) -> Result<Vec<Value>, EvalError> {
        let cx = Ctx { fun: None, route: Route::Source, sem };
        self.inst_args(args, &Vec::new(), cx)
    }

    // ---- forcing ----

    pub fn force(&self, l: &Lazy) -> Result<Rc<Node>, EvalError> {
        l.force_with(|call| {
            let backup = call.clone();
            self.run_call(call).map(Rc::new).map_err(|e| (e, Some(backup)))
        })
    }

    fn run_call(&self, call: Call) -> Result<Node, EvalError> {
        match call.route {
            Route::Source => self.run_source(call),
            Route::Pre => self.run_pre_node(&call.fun, call.args, call.sem),
        }
    }

    /// Clause rewriting on the source definition. Bare calls in tail
    /// position are followed without growing the stack.
    fn run_source(&self, call: Call) -> Result<Node, EvalError> {
        let sem = call.sem;
        let mut fun: Rc<str> = call.fun;
        let mut args = call.args;
        loop {
            let f = self.fun(&fun)?;
            let Some((ci, env)) = self.select(f, &args)? else {
                return Err(EvalError::NoMatch { fun: fun.to_string(), args: show_values(&args) });
            };
            let cx = Ctx { fun: Some(&f.name), route: Route::Source, sem };
            match &f.clauses[ci].body {
                CoExpr::Ctor { name, args: a } => {
                    return Ok(Node { ctor: Rc::from(name.as_str()), fields: self.inst_args(a, &env, cx)? });
                }
                CoExpr::Var(v) => {
                    let l = lookup(&env, v)?.as_lazy()?.clone();
                    return Ok((*self.force(&l)?).clone());
                }
                CoExpr::Rec { args: a, .. } => {
                    args = self.inst_args(a, &env, cx)?;
                }
                CoExpr::App { name, args: a, .. } => {
                    let next = self.inst_args(a, &env, cx)?;
                    if self.route_for(name, sem) == Route::Pre {
                        return self.run_pre_node(name, next, sem);
                    }
                    fun = Rc::from(name.as_str());
                    args = next;
                }
            }
        }
    }

    /// One layer through the inductive component: establish eventually,
    /// then build the head of the guarded function.
    fn run_pre_node(&self, fun: &str, args: Vec<Value>, sem: Sem) -> Result<Node, EvalError> {
        let out = self.run_pre_env(fun, args)?;
        let art = self.analysis.artifacts(fun).ok_or_else(|| EvalError::NotTransformable(fun.to_string()))?;
        let head = match &art.pre.clauses[out.clause].branch {
            crate::transform::PreBranch::Produce(h) => h,
            _ => return Err(EvalError::Internal("certificate ends in a non-producing clause".into())),
        };
        let f = self.fun(fun)?;
        let cx = Ctx { fun: Some(&f.name), route: Route::Pre, sem };
        let expr = head.to_coexpr(&mut |_, b| b.clone(), &mut |_, h| match h {
            crate::transform::Hole::Rec(a) => CoExpr::Rec { args: a.clone(), span: Span::default() },
            crate::transform::Hole::Plain(c) => c.clone(),
        });
        match self.inst_co(&expr, &out.env, cx)? {
            Value::Co(l) => Ok((*self.force(&l)?).clone()),
            _ => Err(EvalError::Internal("head is not codata".into())),
        }
    }

    // ---- entry points ----

    /// The value of a guarded definition, evaluated clause by clause.
    pub fn eval_guarded(&self, fun: &str, args: Vec<Value>) -> Lazy {
        self.suspend(fun, args, Route::Source, Sem::Direct)
    }

    /// The original unguarded definition, unfolded clause by clause.
    pub fn eval_direct(&self, fun: &str, args: Vec<Value>) -> Lazy {
        self.suspend(fun, args, Route::Source, Sem::Direct)
    }

    /// The transformed definition: every layer produced by the inductive
    /// component.
    pub fn eval_transformed(&self, fun: &str, args: Vec<Value>) -> Result<Lazy, EvalError> {
        if self.analysis.artifacts(fun).is_none() {
            return Err(EvalError::NotTransformable(fun.to_string()));
        }
        Ok(self.suspend(fun, args, Route::Pre, Sem::Transformed))
    }

    /// The default semantics: transformable definitions go through their
    /// inductive component, everything else runs its clauses.
    pub fn eval_call(&self, fun: &str, args: Vec<Value>) -> Lazy {
        self.suspend(fun, args, self.route_for(fun, Sem::Transformed), Sem::Transformed)
    }
}

fn binop(op: BinOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    use BinOp::*;
    Ok(match op {
        Eq => Value::Bool(base_eq(a, b)?),
        Ne => Value::Bool(!base_eq(a, b)?),
        _ => {
            let (x, y) = (a.as_nat()?, b.as_nat()?);
            match op {
                Add => Value::Nat(x.saturating_add(y)),
                Sub => Value::Nat(x.saturating_sub(y)),
                Mul => Value::Nat(x.saturating_mul(y)),
                Div => Value::Nat(x.checked_div(y).unwrap_or(0)),
                Mod => Value::Nat(x.checked_rem(y).unwrap_or(0)),
                Lt => Value::Bool(x < y),
                Le => Value::Bool(x <= y),
                Gt => Value::Bool(x > y),
                Ge => Value::Bool(x >= y),
                Eq | Ne | And | Or => unreachable!(),
            }
        }
    })
}

fn base_eq(a: &Value, b: &Value) -> Result<bool, EvalError> {
    match (a, b) {
        (Value::Nat(x), Value::Nat(y)) => Ok(x == y),
        (Value::Bool(x), Value::Bool(y)) => Ok(x == y),
        _ => Err(EvalError::Internal("comparison of codata values".into())),
    }
}

pub fn show_values(args: &[Value]) -> String {
    args.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

/// Evaluates a closed base expression over an environment of base values.
pub fn eval_base(prog: &Program, e: &BaseExpr, env: &[(&str, Value)]) -> Result<Value, EvalError> {
    let analysis = crate::analysis::analyze(&Program::default());
    let m = Machine::new(prog, &analysis, 0);
    m.eval_base(e, env)
}
