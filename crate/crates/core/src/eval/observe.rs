//! Observers over codata values and bounded bisimilarity.

use std::collections::VecDeque;
use std::fmt;

use super::decide::join_path;
use super::*;
use crate::syntax::{ClosedExpr, Dir, Observation};

/// Payload found by `fetch`, tagged with the constructor carrying it.
#[derive(Clone, Debug)]
pub struct Fetched {
    pub ctor: String,
    pub payload: Value,
}

impl fmt::Display for Fetched {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.ctor, self.payload)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bisim {
    Equal,
    /// First difference in breadth-first order; `path` lists child indices.
    Differ {
        path: Vec<usize>,
        detail: String,
    },
    /// Forcing failed at `path`; fuel exhaustion means the answer is unknown.
    Error {
        path: Vec<usize>,
        error: EvalError,
    },
}

impl fmt::Display for Bisim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bisim::Equal => f.write_str("true"),
            Bisim::Differ { path, detail } => write!(f, "false (at [{}]: {detail})", join_path(path)),
            Bisim::Error { error: EvalError::FuelExhausted, path } => write!(f, "Unknown (fuel exhausted at [{}])", join_path(path)),
            Bisim::Error { path, error } => write!(f, "error at [{}]: {error}", join_path(path)),
        }
    }
}

fn single_payload(node: &Node) -> Result<Value, EvalError> {
    node.payloads().next().cloned().ok_or_else(|| EvalError::Observation(format!("constructor `{}` carries no payload", node.ctor)))
}

fn show_element(node: &Node) -> String {
    let ps: Vec<String> = node.payloads().map(|v| format!("{v:?}")).collect();
    match ps.len() {
        1 => ps.into_iter().next().unwrap(),
        0 => node.ctor.to_string(),
        _ => format!("{}({})", node.ctor, ps.join(", ")),
    }
}

impl<'a> Machine<'a> {
    /// The `n`-th payload of a stream.
    pub fn nth(&self, v: &Lazy, n: u64) -> Result<Value, EvalError> {
        let mut cur = v.clone();
        for _ in 0..n {
            let node = self.force(&cur)?;
            cur = one_child(&node)?;
        }
        single_payload(&*self.force(&cur)?)
    }

    /// Follows `path` through a tree: one-slot nodes consume a step without
    /// branching, two-slot nodes branch left or right.
    pub fn fetch(&self, v: &Lazy, path: &[Dir]) -> Result<Fetched, EvalError> {
        let mut cur = v.clone();
        for d in path {
            let node = self.force(&cur)?;
            let children: Vec<&Lazy> = node.children().collect();
            cur = match (children.as_slice(), d) {
                ([t], _) => (*t).clone(),
                ([l, _], Dir::L) => (*l).clone(),
                ([_, r], Dir::R) => (*r).clone(),
                _ => {
                    return Err(EvalError::Observation(format!(
                        "`fetch` needs one or two subtrees, `{}` has {}",
                        node.ctor,
                        children.len()
                    )))
                }
            };
        }
        let node = self.force(&cur)?;
        Ok(Fetched { ctor: node.ctor.to_string(), payload: single_payload(&node)? })
    }

    /// The first `n` elements of a stream.
    pub fn take_stream(&self, v: &Lazy, n: u64) -> Result<Vec<String>, EvalError> {
        let mut out = Vec::new();
        let mut cur = v.clone();
        for i in 0..n {
            let node = self.force(&cur)?;
            out.push(show_element(&node));
            if i + 1 < n {
                cur = one_child(&node)?;
            }
        }
        Ok(out)
    }

    /// Renders a value as a term, eliding everything below `depth` layers.
    pub fn render_tree(&self, v: &Lazy, depth: usize) -> Result<String, EvalError> {
        if depth == 0 {
            return Ok("..".into());
        }
        let node = self.force(v)?;
        let mut parts = Vec::new();
        for f in &node.fields {
            parts.push(match f {
                Value::Co(l) => self.render_tree(l, depth - 1)?,
                other => format!("{other:?}"),
            });
        }
        Ok(format!("{}({})", node.ctor, parts.join(", ")))
    }

    /// `take(n, v)`: a stream prefix for single-slot types, else a tree
    /// truncated at depth `n`.
    pub fn take(&self, v: &Lazy, n: u64) -> Result<String, EvalError> {
        let node = self.force(v)?;
        let stream_like = self.prog.ctor(&node.ctor).map(|(cd, _)| cd.ctors.iter().all(|c| c.slot_count() == 1)).unwrap_or(false);
        if stream_like {
            Ok(format!("[{}]", self.take_stream(v, n)?.join(", ")))
        } else {
            self.render_tree(v, n as usize)
        }
    }

    /// Runs a parsed observation and renders its result. A bare codata
    /// expression shows the first `default_take` layers.
    pub fn observe(&self, obs: &Observation, sem: Sem, default_take: u64) -> Result<String, EvalError> {
        let lazy = |e: &CoExpr, ty: &str| -> Result<Lazy, EvalError> {
            Ok(self.closed(&ClosedExpr::Co(e.clone(), ty.to_string()), sem)?.as_lazy()?.clone())
        };
        match obs {
            Observation::Nth(n, e, ty) => self.nth(&lazy(e, ty)?, *n).map(|v| format!("{v:?}")),
            Observation::Fetch(path, e, ty) => self.fetch(&lazy(e, ty)?, path).map(|f| f.to_string()),
            Observation::Take(n, e, ty) => self.take(&lazy(e, ty)?, *n),
            Observation::Value(c) => match self.closed(c, sem)? {
                Value::Co(l) => self.take(&l, default_take),
                base => Ok(format!("{base:?}")),
            },
        }
    }

    /// Forces every node above depth `k`.
    pub fn force_to_depth(&self, v: &Lazy, k: usize) -> Result<(), EvalError> {
        let mut queue = VecDeque::from([(v.clone(), 0)]);
        while let Some((l, d)) = queue.pop_front() {
            if d >= k {
                continue;
            }
            let node = self.force(&l)?;
            for c in node.children() {
                queue.push_back((c.clone(), d + 1));
            }
        }
        Ok(())
    }

    /// Compares constructors and payloads layer by layer down to depth `k`.
    pub fn bisimilar_to_depth(&self, a: &Lazy, b: &Lazy, k: usize) -> Bisim {
        let mut queue = VecDeque::from([(Vec::new(), a.clone(), b.clone())]);
        while let Some((path, x, y)) = queue.pop_front() {
            if path.len() >= k {
                continue;
            }
            if x.ptr_eq(&y) {
                continue;
            }
            let nx = match self.force(&x) {
                Ok(n) => n,
                Err(error) => return Bisim::Error { path, error },
            };
            let ny = match self.force(&y) {
                Ok(n) => n,
                Err(error) => return Bisim::Error { path, error },
            };
            if nx.ctor != ny.ctor {
                return Bisim::Differ { path, detail: format!("`{}` against `{}`", nx.ctor, ny.ctor) };
            }
            for (i, (fx, fy)) in nx.fields.iter().zip(&ny.fields).enumerate() {
                match (fx, fy) {
                    (Value::Co(cx), Value::Co(cy)) => {
                        let mut p = path.clone();
                        p.push(i);
                        queue.push_back((p, cx.clone(), cy.clone()));
                    }
                    (Value::Nat(p), Value::Nat(q)) if p == q => {}
                    (Value::Bool(p), Value::Bool(q)) if p == q => {}
                    _ => return Bisim::Differ { path, detail: format!("`{}` payload {i}: {fx:?} against {fy:?}", nx.ctor) },
                }
            }
        }
        Bisim::Equal
    }
}

fn one_child(node: &Node) -> Result<Lazy, EvalError> {
    let mut it = node.children();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c.clone()),
        _ => Err(EvalError::Observation(format!("`nth` needs a stream; `{}` does not have exactly one tail", node.ctor))),
    }
}
