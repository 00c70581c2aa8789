//! Bounded decisions: the eventually predicate, the inductive component,
//! the infinite predicate and the recursive equation.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use super::value::describe_args;
use super::*;
use crate::transform::{Hole, PreBranch};

/// Bounded evidence that the first guarded step is reachable.
#[derive(Clone, Debug)]
pub struct EventuallyCertificate {
    /// Number of non-guarded steps taken.
    pub depth: usize,
    /// Selected clause and arguments at every state, ending with the
    /// guarded clause.
    pub trace: Vec<(usize, Vec<Value>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A state repeated; shows the arguments of the repeated state.
    Cycle(String),
    /// No clause applies; shows the arguments.
    NoClause(String),
    /// Forcing an argument failed definitively.
    Inner(String),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Cycle(s) => write!(f, "cycle: {s}"),
            Witness::NoClause(s) => write!(f, "no clause: {s}"),
            Witness::Inner(s) => write!(f, "argument: {s}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Decision {
    Holds(EventuallyCertificate),
    NotEventually(Witness),
    /// Fuel ran out after `steps` non-guarded steps.
    Unknown {
        steps: usize,
    },
}

impl Decision {
    pub fn label(&self) -> &'static str {
        match self {
            Decision::Holds(_) => "Holds",
            Decision::NotEventually(_) => "NotEventually",
            Decision::Unknown { .. } => "Unknown",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Holds(c) => write!(f, "Holds (depth {})", c.depth),
            Decision::NotEventually(w) => write!(f, "NotEventually ({w})"),
            Decision::Unknown { steps } => write!(f, "Unknown (fuel exhausted after {steps} steps)"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum HoleValue {
    /// Arguments of the next corecursive call.
    Next(Vec<Value>),
    Plain(Value),
}

/// Head data and next arguments computed by the inductive component.
#[derive(Clone, Debug)]
pub struct HeadInstance {
    pub shape: String,
    pub payloads: Vec<Value>,
    pub holes: Vec<HoleValue>,
}

#[derive(Clone, Debug)]
pub struct PreOutput {
    pub clause: usize,
    pub certificate: EventuallyCertificate,
    pub head: HeadInstance,
}

impl PreOutput {
    /// Canonical rendering: head shape, payloads and hole keys. Holes
    /// without keys render their forced prefix.
    pub fn fingerprint(&self, m: &Machine) -> String {
        let mut s = format!("{} [{}]", self.head.shape, show_values(&self.head.payloads));
        for h in &self.head.holes {
            match h {
                HoleValue::Next(args) => s.push_str(&format!(" next({})", fingerprint_values(m, args))),
                HoleValue::Plain(v) => s.push_str(&format!(" plain({})", fingerprint_values(m, std::slice::from_ref(v)))),
            }
        }
        s
    }
}

fn fingerprint_values(m: &Machine, vs: &[Value]) -> String {
    match describe_args(vs) {
        Some(s) => s,
        None => vs
            .iter()
            .map(|v| match v {
                Value::Co(l) => m.render_tree(l, 4).unwrap_or_else(|e| format!("<{e}>")),
                other => format!("{other:?}"),
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

pub(super) struct Reached<'a> {
    pub clause: usize,
    pub env: Env<'a>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfiniteVerdict {
    BoundedVerified(usize),
    DefinitelyNotProductive { step: usize, witness: String },
    Unknown { step: usize },
}

impl fmt::Display for InfiniteVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfiniteVerdict::BoundedVerified(s) => write!(f, "BoundedVerified ({s} steps)"),
            InfiniteVerdict::DefinitelyNotProductive { step, witness } => {
                write!(f, "DefinitelyNotProductive (step {step}: {witness})")
            }
            InfiniteVerdict::Unknown { step } => write!(f, "Unknown (fuel exhausted at step {step})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquationVerdict {
    Bisimilar,
    Counterexample { path: Vec<usize>, detail: String },
    Unknown(String),
}

impl fmt::Display for EquationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationVerdict::Bisimilar => f.write_str("Bisimilar"),
            EquationVerdict::Counterexample { path, detail } => {
                write!(f, "Counterexample (at [{}]: {detail})", path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            }
            EquationVerdict::Unknown(why) => write!(f, "Unknown ({why})"),
        }
    }
}

/// Frontier size beyond which `check_infinite` gives up.
pub const INFINITE_FRONTIER_LIMIT: usize = 4096;

impl<'a> Machine<'a> {
    /// Follows non-guarded clauses until a guarded one applies.
    pub fn decide_eventually(&self, fun: &str, args: Vec<Value>) -> Result<Decision, EvalError> {
        Ok(match self.decide_inner(fun, args)? {
            Ok((cert, _)) => Decision::Holds(cert),
            Err(d) => d,
        })
    }

    fn decide_inner(&self, fun: &str, mut args: Vec<Value>) -> Result<Result<(EventuallyCertificate, Reached<'a>), Decision>, EvalError> {
        let f = self.fun(fun)?;
        let mut seen = HashSet::new();
        let mut trace = Vec::new();
        loop {
            if let Some(k) = StateKey::call(fun, &args) {
                if !seen.insert(k) {
                    let shown = describe_args(&args).unwrap_or_default();
                    return Ok(Err(Decision::NotEventually(Witness::Cycle(shown))));
                }
            }
            let picked = match self.select(f, &args) {
                Ok(p) => p,
                Err(EvalError::FuelExhausted) => return Ok(Err(Decision::Unknown { steps: trace.len() })),
                Err(e @ EvalError::NotEstablished { .. }) => return Ok(Err(Decision::NotEventually(Witness::Inner(e.to_string())))),
                Err(e) => return Err(e),
            };
            let Some((ci, env)) = picked else {
                return Ok(Err(Decision::NotEventually(Witness::NoClause(show_values(&args)))));
            };
            trace.push((ci, args));
            match &f.clauses[ci].body {
                CoExpr::Rec { args: a, .. } => {
                    let cx = Ctx { fun: Some(&f.name), route: Route::Source, sem: Sem::Transformed };
                    args = self.inst_args(a, &env, cx)?;
                }
                _ => {
                    let cert = EventuallyCertificate { depth: trace.len() - 1, trace };
                    return Ok(Ok((cert, Reached { clause: ci, env })));
                }
            }
        }
    }

    /// Replays a certificate through the inductive component, checking that
    /// every recorded step is the first-match choice and agrees with the
    /// component's branch kind.
    fn replay(&self, fun: &str, cert: &EventuallyCertificate) -> Result<Reached<'a>, EvalError> {
        let f = self.fun(fun)?;
        let art = self.analysis.artifacts(fun).ok_or_else(|| EvalError::NotTransformable(fun.to_string()))?;
        for (i, (ci, args)) in cert.trace.iter().enumerate() {
            let (cj, env) = self.select_untimed(f, args)?.ok_or_else(|| EvalError::Internal("certificate step does not match".into()))?;
            let last = i + 1 == cert.trace.len();
            match (&art.pre.clauses[cj].branch, last) {
                _ if cj != *ci => return Err(EvalError::Internal("certificate disagrees with clause selection".into())),
                (PreBranch::Produce(_), true) => return Ok(Reached { clause: cj, env }),
                (PreBranch::Recurse { .. }, false) => {}
                _ => return Err(EvalError::Internal("certificate shape disagrees with the inductive component".into())),
            }
        }
        Err(EvalError::Internal("empty certificate".into()))
    }

    pub(super) fn run_pre_env(&self, fun: &str, args: Vec<Value>) -> Result<Reached<'a>, EvalError> {
        let call = format!("{fun}({})", describe_args(&args).unwrap_or_else(|| show_values(&args)));
        match self.decide_inner(fun, args)? {
            Ok((cert, _)) => self.replay(fun, &cert),
            Err(Decision::NotEventually(w)) => Err(EvalError::NotEstablished { call, reason: format!("NotEventually ({w})") }),
            Err(_) => Err(EvalError::FuelExhausted),
        }
    }

    /// The inductive component: head data and next arguments.
    pub fn run_pre(&self, fun: &str, args: Vec<Value>) -> Result<PreOutput, EvalError> {
        let f = self.fun(fun)?;
        let art = self.analysis.artifacts(fun).ok_or_else(|| EvalError::NotTransformable(fun.to_string()))?;
        let call = format!("{fun}({})", describe_args(&args).unwrap_or_else(|| show_values(&args)));
        let cert = match self.decide_inner(fun, args)? {
            Ok((cert, _)) => cert,
            Err(Decision::NotEventually(w)) => return Err(EvalError::NotEstablished { call, reason: format!("NotEventually ({w})") }),
            Err(_) => return Err(EvalError::FuelExhausted),
        };
        let reached = self.replay(fun, &cert)?;
        let PreBranch::Produce(head) = &art.pre.clauses[reached.clause].branch else {
            return Err(EvalError::Internal("certificate ends in a non-producing clause".into()));
        };
        let cx = Ctx { fun: Some(&f.name), route: Route::Pre, sem: Sem::Transformed };
        let payloads = head.payloads().into_iter().map(|b| self.eval_base(b, &reached.env)).collect::<Result<Vec<_>, _>>()?;
        let holes = head
            .holes
            .iter()
            .map(|h| {
                Ok(match h {
                    Hole::Rec(a) => HoleValue::Next(self.inst_args(a, &reached.env, cx)?),
                    Hole::Plain(c) => HoleValue::Plain(self.inst_co(c, &reached.env, cx)?),
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(PreOutput { clause: reached.clause, certificate: cert, head: HeadInstance { shape: head.shape(), payloads, holes } })
    }

    /// Breadth-first over the obligation tree, `steps` layers deep, giving
    /// each obligation `fuel_per_step` fuel.
    pub fn check_infinite(&self, fun: &str, args: Vec<Value>, steps: usize, fuel_per_step: u64) -> Result<InfiniteVerdict, EvalError> {
        if self.analysis.artifacts(fun).is_none() {
            return Err(EvalError::NotTransformable(fun.to_string()));
        }
        let mut seen = HashSet::new();
        let mut layer = VecDeque::from([args]);
        for step in 0..steps {
            let mut next = VecDeque::new();
            while let Some(args) = layer.pop_front() {
                if let Some(k) = StateKey::call(fun, &args) {
                    if !seen.insert(k) {
                        continue;
                    }
                }
                self.set_fuel(fuel_per_step);
                match self.run_pre(fun, args) {
                    Ok(out) => {
                        for h in out.head.holes {
                            if let HoleValue::Next(a) = h {
                                next.push_back(a);
                            }
                        }
                    }
                    Err(EvalError::NotEstablished { call, reason }) => {
                        return Ok(InfiniteVerdict::DefinitelyNotProductive { step, witness: format!("{call}: {reason}") })
                    }
                    Err(EvalError::FuelExhausted) => return Ok(InfiniteVerdict::Unknown { step }),
                    Err(e) => return Err(e),
                }
            }
            if next.len() > INFINITE_FRONTIER_LIMIT {
                return Ok(InfiniteVerdict::Unknown { step });
            }
            layer = next;
        }
        Ok(InfiniteVerdict::BoundedVerified(steps))
    }
}

/// Compares the transformed definition with the direct unfolding of its
/// clauses to `depth` constructor layers. The direct side gets `fuel`, the
/// transformed side twice that, since it re-establishes eventually per layer.
pub fn check_equation(
    prog: &Program,
    analysis: &Analysis,
    fun: &str,
    args: &[Arg],
    depth: usize,
    fuel: u64,
) -> Result<EquationVerdict, EvalError> {
    let direct_m = Machine::new(prog, analysis, fuel);
    let direct_args = direct_m.closed_args(args, Sem::Direct)?;
    let direct = direct_m.eval_direct(fun, direct_args);
    match direct_m.force_to_depth(&direct, depth) {
        Ok(()) => {}
        Err(EvalError::FuelExhausted) => {
            return Ok(EquationVerdict::Unknown(format!("direct unfolding did not produce {depth} layers within fuel {fuel}")))
        }
        Err(e) => return Ok(EquationVerdict::Unknown(format!("direct unfolding failed: {e}"))),
    }
    let m = Machine::new(prog, analysis, fuel.saturating_mul(2));
    let targs = m.closed_args(args, Sem::Transformed)?;
    let transformed = m.eval_transformed(fun, targs)?;
    Ok(match m.bisimilar_to_depth(&transformed, &direct, depth) {
        Bisim::Equal => EquationVerdict::Bisimilar,
        Bisim::Differ { path, detail } => EquationVerdict::Counterexample { path, detail },
        Bisim::Error { path, error: EvalError::FuelExhausted } => {
            EquationVerdict::Unknown(format!("transformed side ran out of fuel at [{}]", join_path(&path)))
        }
        Bisim::Error { path, error } => EquationVerdict::Counterexample { path, detail: format!("transformed side failed: {error}") },
    })
}

pub(super) fn join_path(p: &[usize]) -> String {
    p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}
