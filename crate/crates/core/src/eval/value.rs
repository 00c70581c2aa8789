//! Runtime values: base values, memoized codata suspensions and the
//! canonical keys identifying pending computations.

use std::cell::RefCell;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use super::EvalError;

/// Key nesting beyond this depth makes a value unkeyable.
pub const KEY_DEPTH_LIMIT: u32 = 64;

#[derive(Clone)]
pub enum Value {
    Nat(u64),
    Bool(bool),
    Co(Lazy),
}

impl Value {
    pub fn as_nat(&self) -> Result<u64, EvalError> {
        match self {
            Value::Nat(n) => Ok(*n),
            _ => Err(EvalError::Internal("expected a natural number".into())),
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            _ => Err(EvalError::Internal("expected a boolean".into())),
        }
    }

    pub fn as_lazy(&self) -> Result<&Lazy, EvalError> {
        match self {
            Value::Co(l) => Ok(l),
            _ => Err(EvalError::Internal("expected a codata value".into())),
        }
    }

    pub fn key_arg(&self) -> Option<KeyArg> {
        match self {
            Value::Nat(n) => Some(KeyArg::Nat(*n)),
            Value::Bool(b) => Some(KeyArg::Bool(*b)),
            Value::Co(l) => l.key().cloned().map(KeyArg::Key),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Co(l) => match l.key() {
                Some(k) => write!(f, "<{k}>"),
                None => f.write_str("<codata>"),
            },
        }
    }
}

/// A forced constructor node. `fields` follow the constructor's declared
/// field order; slots hold `Value::Co`.
#[derive(Clone, Debug)]
pub struct Node {
    pub ctor: Rc<str>,
    pub fields: Vec<Value>,
}

impl Node {
    pub fn payloads(&self) -> impl Iterator<Item = &Value> {
        self.fields.iter().filter(|v| !matches!(v, Value::Co(_)))
    }

    pub fn children(&self) -> impl Iterator<Item = &Lazy> {
        self.fields.iter().filter_map(|v| match v {
            Value::Co(l) => Some(l),
            _ => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Clause-by-clause evaluation of the source definition.
    Source,
    /// Through the inductive component, one head per force.
    Pre,
}

/// Which semantics nested calls to transformable definitions use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sem {
    Direct,
    Transformed,
}

#[derive(Clone, Debug)]
pub(crate) struct Call {
    pub fun: Rc<str>,
    pub route: Route,
    pub sem: Sem,
    pub args: Vec<Value>,
}

enum Slot {
    Pending(Call),
    Busy,
    Ready(Rc<Node>),
    Failed(EvalError),
}

struct LazyCell {
    key: Option<StateKey>,
    slot: RefCell<Slot>,
}

impl Drop for LazyCell {
    // Long chains of forced nodes would otherwise be dropped recursively.
    fn drop(&mut self) {
        let mut stack: Vec<Value> = Vec::new();
        take_slot(self.slot.get_mut(), &mut stack);
        while let Some(v) = stack.pop() {
            if let Value::Co(Lazy(rc)) = v {
                if let Ok(mut cell) = Rc::try_unwrap(rc) {
                    take_slot(cell.slot.get_mut(), &mut stack);
                }
            }
        }
    }
}

fn take_slot(slot: &mut Slot, stack: &mut Vec<Value>) {
    match std::mem::replace(slot, Slot::Busy) {
        Slot::Pending(call) => stack.extend(call.args),
        Slot::Ready(node) => {
            if let Ok(node) = Rc::try_unwrap(node) {
                stack.extend(node.fields);
            }
        }
        _ => {}
    }
}

/// A memoized codata suspension. Clones share the memo cell.
#[derive(Clone)]
pub struct Lazy(Rc<LazyCell>);

impl Lazy {
    pub(crate) fn call(call: Call) -> Lazy {
        let key = call_key(&call.fun, &call.args);
        Lazy(Rc::new(LazyCell { key, slot: RefCell::new(Slot::Pending(call)) }))
    }

    pub fn ready(node: Node) -> Lazy {
        let key = StateKey::ctor(&node.ctor, &node.fields);
        Lazy(Rc::new(LazyCell { key, slot: RefCell::new(Slot::Ready(Rc::new(node))) }))
    }

    pub fn key(&self) -> Option<&StateKey> {
        self.0.key.as_ref()
    }

    pub fn ptr_eq(&self, other: &Lazy) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn is_forced(&self) -> bool {
        matches!(*self.0.slot.borrow(), Slot::Ready(_))
    }

    /// Forces the suspension with `run`, memoizing the outcome. Fuel
    /// exhaustion is not memoized, so a later force with more fuel retries.
    pub(crate) fn force_with(&self, run: impl FnOnce(Call) -> Result<Rc<Node>, (EvalError, Option<Call>)>) -> Result<Rc<Node>, EvalError> {
        let call = {
            let mut slot = self.0.slot.borrow_mut();
            match &*slot {
                Slot::Ready(n) => return Ok(n.clone()),
                Slot::Failed(e) => return Err(e.clone()),
                Slot::Busy => return Err(EvalError::BlackHole(self.key().map(|k| k.to_string()).unwrap_or_else(|| "<codata>".into()))),
                Slot::Pending(_) => {}
            }
            match std::mem::replace(&mut *slot, Slot::Busy) {
                Slot::Pending(c) => c,
                _ => unreachable!(),
            }
        };
        let out = run(call);
        let mut slot = self.0.slot.borrow_mut();
        match out {
            Ok(n) => {
                *slot = Slot::Ready(n.clone());
                Ok(n)
            }
            Err((e, Some(call))) if e.is_retryable() => {
                *slot = Slot::Pending(call);
                Err(e)
            }
            Err((e, _)) => {
                *slot = Slot::Failed(e.clone());
                Err(e)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum KeyArg {
    Nat(u64),
    Bool(bool),
    Key(StateKey),
}

impl fmt::Display for KeyArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyArg::Nat(n) => write!(f, "{n}"),
            KeyArg::Bool(b) => write!(f, "{b}"),
            KeyArg::Key(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
enum KeyKind {
    Call,
    Ctor,
}

#[derive(Debug)]
struct KeyNode {
    hash: u64,
    depth: u32,
    kind: KeyKind,
    name: Rc<str>,
    args: Vec<KeyArg>,
}

/// Canonical identity of a suspension: a named call or a constructor
/// applied to keyed arguments. Equal keys denote the same value.
#[derive(Clone, Debug)]
pub struct StateKey(Rc<KeyNode>);

impl StateKey {
    fn build(kind: KeyKind, name: &str, args: Vec<KeyArg>) -> Option<StateKey> {
        let depth = 1 + args
            .iter()
            .map(|a| match a {
                KeyArg::Key(k) => k.0.depth,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        if depth > KEY_DEPTH_LIMIT {
            return None;
        }
        let mut h = DefaultHasher::new();
        kind.hash(&mut h);
        name.hash(&mut h);
        args.hash(&mut h);
        Some(StateKey(Rc::new(KeyNode { hash: h.finish(), depth, kind, name: name.into(), args })))
    }

    pub fn call(name: &str, args: &[Value]) -> Option<StateKey> {
        call_key(name, args)
    }

    pub fn ctor(name: &str, fields: &[Value]) -> Option<StateKey> {
        let args = fields.iter().map(Value::key_arg).collect::<Option<Vec<_>>>()?;
        StateKey::build(KeyKind::Ctor, name, args)
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }
}

fn call_key(name: &str, args: &[Value]) -> Option<StateKey> {
    let args = args.iter().map(Value::key_arg).collect::<Option<Vec<_>>>()?;
    StateKey::build(KeyKind::Call, name, args)
}

impl PartialEq for StateKey {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.kind == other.0.kind && self.0.name == other.0.name && self.0.args == other.0.args)
    }
}

impl Eq for StateKey {}

impl Hash for StateKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.0.name)?;
        for (i, a) in self.0.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Displays a list of argument keys, or `None` if any is unkeyable.
pub fn describe_args(args: &[Value]) -> Option<String> {
    let parts = args.iter().map(|a| a.key_arg().map(|k| k.to_string())).collect::<Option<Vec<_>>>()?;
    Some(parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(name: &str, args: Vec<Value>) -> Lazy {
        Lazy::call(Call { fun: name.into(), route: Route::Source, sem: Sem::Direct, args })
    }

    #[test]
    fn keys_are_structural() {
        let a = call("repeat", vec![Value::Nat(1)]);
        let b = call("repeat", vec![Value::Nat(1)]);
        let c = call("repeat", vec![Value::Nat(2)]);
        assert_eq!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
        assert_eq!(a.key().unwrap().to_string(), "repeat(1)");
        let n = Lazy::ready(Node { ctor: "SCons".into(), fields: vec![Value::Nat(1), Value::Co(a)] });
        assert_eq!(n.key().unwrap().to_string(), "SCons(1, repeat(1))");
    }

    #[test]
    fn deep_keys_are_dropped() {
        let mut v = call("z", vec![]);
        for _ in 0..KEY_DEPTH_LIMIT + 5 {
            v = call("s", vec![Value::Co(v)]);
        }
        assert!(v.key().is_none());
        // Unkeyable arguments make the enclosing call unkeyable as well.
        assert!(call("k", vec![Value::Co(v)]).key().is_none());
    }

    #[test]
    fn forcing_is_memoized_and_retry_on_fuel() {
        let l = call("f", vec![]);
        let e = l.force_with(|c| Err((EvalError::FuelExhausted, Some(c))));
        assert!(matches!(e, Err(EvalError::FuelExhausted)));
        let n = l.force_with(|_| Ok(Rc::new(Node { ctor: "C".into(), fields: vec![] }))).unwrap();
        let m = l.force_with(|_| panic!("memoized")).unwrap();
        assert!(Rc::ptr_eq(&n, &m));
    }

    #[test]
    fn reentrant_force_is_a_black_hole() {
        let l = call("loop", vec![]);
        let inner = l.clone();
        let e = l.force_with(move |c| match inner.force_with(|_| unreachable!()) {
            Err(e) => Err((e, Some(c))),
            Ok(n) => Ok(n),
        });
        assert!(matches!(e, Err(EvalError::BlackHole(_))));
    }
}
