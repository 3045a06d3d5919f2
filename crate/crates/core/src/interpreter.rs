//! Call-by-value evaluator with a step budget.
//!
//! Top-level definitions live in a [`RuntimeEnv`], a chain of global tables.
//! Variables are looked up in the lexical environment first and then in the
//! globals, which is what lets recursive definitions call themselves.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{Declaration, Expr, Ident, InducedProgram};

/// Persistent cons list.
#[derive(Clone, Default)]
pub struct List(Option<Arc<Cons>>);

struct Cons {
    head: Value,
    tail: List,
}

impl List {
    pub fn nil() -> Self {
        List(None)
    }

    pub fn cons(head: Value, tail: List) -> Self {
        List(Some(Arc::new(Cons { head, tail })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn head(&self) -> Option<&Value> {
        self.0.as_ref().map(|c| &c.head)
    }

    pub fn tail(&self) -> Option<&List> {
        self.0.as_ref().map(|c| &c.tail)
    }

    pub fn iter(&self) -> ListIter<'_> {
        ListIter(self)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }
}

impl FromIterator<Value> for List {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let items: Vec<Value> = iter.into_iter().collect();
        items.into_iter().rev().fold(List::nil(), |acc, v| List::cons(v, acc))
    }
}

pub struct ListIter<'a>(&'a List);

impl<'a> Iterator for ListIter<'a> {
    type Item = &'a Value;

    fn next(&mut self) -> Option<&'a Value> {
        let c = self.0 .0.as_ref()?;
        self.0 = &c.tail;
        Some(&c.head)
    }
}

impl Drop for List {
    // unlink iteratively so long lists do not overflow the stack
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(rc) = cur {
            match Arc::try_unwrap(rc) {
                Ok(mut cell) => cur = cell.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    Cons,
    Head,
    Tail,
    Not,
    IsUpper,
    IsAlpha,
    IsNum,
}

impl Prim {
    pub const ALL: [(&'static str, Prim); 12] = [
        ("+", Prim::Add),
        ("-", Prim::Sub),
        ("*", Prim::Mul),
        ("=", Prim::Eq),
        ("<", Prim::Lt),
        (":", Prim::Cons),
        ("head", Prim::Head),
        ("tail", Prim::Tail),
        ("not", Prim::Not),
        ("isUpper", Prim::IsUpper),
        ("isAlpha", Prim::IsAlpha),
        ("isNum", Prim::IsNum),
    ];

    pub fn arity(self) -> usize {
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Eq | Prim::Lt | Prim::Cons => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        Prim::ALL.iter().find(|(_, p)| *p == self).map(|(n, _)| *n).unwrap()
    }
}

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Char(char),
    Bool(bool),
    List(List),
    Closure(Arc<Closure>),
    /// A primitive with the arguments supplied so far.
    Prim(Prim, Arc<[Value]>),
}

pub struct Closure {
    params: Arc<[Ident]>,
    body: Arc<Expr>,
    env: Locals,
    /// Arguments supplied so far; the body runs once all params are bound.
    args: Vec<Value>,
}

impl Value {
    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        Value::List(items.into_iter().collect())
    }

    pub fn is_function(&self) -> bool {
        matches!(self, Value::Closure(_) | Value::Prim(..))
    }

    /// Structural equality on first-order values; `None` if either side
    /// contains a function.
    pub fn first_order_eq(&self, other: &Value) -> Option<bool> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a == b),
            (Value::Char(a), Value::Char(b)) => Some(a == b),
            (Value::Bool(a), Value::Bool(b)) => Some(a == b),
            (Value::List(a), Value::List(b)) => {
                let mut xs = a.iter();
                let mut ys = b.iter();
                loop {
                    match (xs.next(), ys.next()) {
                        (None, None) => return Some(true),
                        (Some(x), Some(y)) => {
                            if !x.first_order_eq(y)? {
                                return Some(false);
                            }
                        }
                        (Some(x), None) | (None, Some(x)) => {
                            return if x.is_function() { None } else { Some(false) };
                        }
                    }
                }
            }
            (a, b) if a.is_function() || b.is_function() => None,
            _ => Some(false),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        self.first_order_eq(other) == Some(true)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Char(c) => write!(f, "{c:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Closure(_) => f.write_str("<function>"),
            Value::Prim(p, _) => write!(f, "<{}>", p.name()),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Lexically bound variables, innermost first.
#[derive(Clone, Default)]
struct Locals(Option<Arc<LocalFrame>>);

struct LocalFrame {
    name: Ident,
    value: Value,
    next: Locals,
}

impl Locals {
    fn bind(&self, name: Ident, value: Value) -> Locals {
        Locals(Some(Arc::new(LocalFrame { name, value, next: self.clone() })))
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(frame) = cur {
            if &*frame.name == name {
                return Some(&frame.value);
            }
            cur = &frame.next.0;
        }
        None
    }
}

/// Global definitions: primitives, combinators, background functions and
/// induced functions, layered so that per-candidate layers are cheap.
#[derive(Clone, Default)]
pub struct RuntimeEnv {
    parent: Option<Arc<RuntimeEnv>>,
    globals: BTreeMap<Ident, Value>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("step budget exhausted")]
    OutOfSteps,
    #[error("evaluation nested too deeply")]
    TooDeep,
    #[error("unbound identifier `{0}`")]
    Unbound(Ident),
    #[error("`{0}` of empty list")]
    EmptyList(&'static str),
    #[error("applied a non-function")]
    NotAFunction,
    #[error("`{0}` applied to an argument of the wrong kind")]
    BadArgument(&'static str),
    #[error("condition is not a boolean")]
    BadCondition,
    #[error("comparison of functions")]
    FunctionEquality,
    #[error("integer overflow")]
    Overflow,
    #[error("expression contains a hole")]
    Hole,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error("`{0}` is already defined")]
    Collision(Ident),
    #[error("evaluating `{name}`: {error}")]
    Eval { name: Ident, error: EvalError },
}

/// Maximum number of reductions one evaluation may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: u64,
}

impl Budget {
    pub const DEFAULT: Budget = Budget { max_steps: 100_000 };

    pub fn new(max_steps: u64) -> Self {
        assert!(max_steps > 0, "budget must be positive");
        Budget { max_steps }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

// Rust recursion tracks the object language's, so very deep evaluations
// are cut off rather than allowed to exhaust the native stack.
const MAX_DEPTH: u32 = 1_000;

impl RuntimeEnv {
    pub fn new() -> Self {
        RuntimeEnv::default()
    }

    /// The primitives bound under their names, plus `nil`.
    pub fn with_primitives() -> Self {
        let mut env = RuntimeEnv::new();
        for (name, p) in Prim::ALL {
            env.globals.insert(Ident::new(name), Value::Prim(p, Arc::from(Vec::new())));
        }
        env.globals.insert(Ident::new("nil"), Value::List(List::nil()));
        env
    }

    pub fn child_of(parent: Arc<RuntimeEnv>) -> Self {
        RuntimeEnv { parent: Some(parent), globals: BTreeMap::new() }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        match self.globals.get(name) {
            Some(v) => Some(v),
            None => self.parent.as_ref().and_then(|p| p.get(name)),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Evaluates a definition body and binds it. Recursive definitions work
    /// because the body is only evaluated to a closure; its own name is
    /// looked up in the globals at call time.
    pub fn define(&mut self, name: &Ident, body: &Expr, budget: Budget) -> Result<(), LoadError> {
        if self.contains(name) {
            return Err(LoadError::Collision(name.clone()));
        }
        let v = eval_expr(self, body, budget).map_err(|error| LoadError::Eval { name: name.clone(), error })?;
        self.globals.insert(name.clone(), v);
        Ok(())
    }

    pub fn define_declaration(&mut self, d: &Declaration, budget: Budget) -> Result<(), LoadError> {
        match d.definition() {
            Some((name, body)) => self.define(name, body, budget),
            None => Ok(()),
        }
    }
}

/// Extends `base` with the program's functions in the given order.
pub fn load_program(
    base: &Arc<RuntimeEnv>,
    program: &InducedProgram,
    order: &[Ident],
    budget: Budget,
) -> Result<RuntimeEnv, LoadError> {
    let mut env = RuntimeEnv::child_of(base.clone());
    for name in order {
        let f = program.get(name).expect("order names a program function");
        env.define(&f.name, &f.body, budget)?;
    }
    Ok(env)
}

struct Machine<'a> {
    globals: &'a RuntimeEnv,
    steps_left: u64,
    depth: u32,
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.steps_left == 0 {
            return Err(EvalError::OutOfSteps);
        }
        self.steps_left -= 1;
        Ok(())
    }

    fn eval(&mut self, locals: &Locals, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Num(n) => Ok(Value::Int(*n)),
            Expr::Char(c) => Ok(Value::Char(*c)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Hole(_) => Err(EvalError::Hole),
            Expr::Var(x) => match locals.lookup(x) {
                Some(v) => Ok(v.clone()),
                None => self.globals.get(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
            },
            Expr::Lambda(params, body) => Ok(Value::Closure(Arc::new(Closure {
                params: params.clone(),
                body: body.clone(),
                env: locals.clone(),
                args: Vec::new(),
            }))),
            Expr::Apply(f, a) => {
                let fv = self.eval(locals, f)?;
                let av = self.eval(locals, a)?;
                self.apply(fv, av)
            }
            Expr::If(c, t, el) => match self.eval(locals, c)? {
                Value::Bool(true) => self.eval(locals, t),
                Value::Bool(false) => self.eval(locals, el),
                _ => Err(EvalError::BadCondition),
            },
        }
    }

    fn apply(&mut self, f: Value, arg: Value) -> Result<Value, EvalError> {
        match f {
            Value::Closure(c) => {
                if c.args.len() + 1 < c.params.len() {
                    let mut args = c.args.clone();
                    args.push(arg);
                    return Ok(Value::Closure(Arc::new(Closure {
                        params: c.params.clone(),
                        body: c.body.clone(),
                        env: c.env.clone(),
                        args,
                    })));
                }
                self.tick()?;
                if self.depth >= MAX_DEPTH {
                    return Err(EvalError::TooDeep);
                }
                let mut locals = c.env.clone();
                for (p, v) in c.params.iter().zip(c.args.iter().cloned().chain(std::iter::once(arg))) {
                    locals = locals.bind(p.clone(), v);
                }
                self.depth += 1;
                let r = self.eval(&locals, &c.body);
                self.depth -= 1;
                r
            }
            Value::Prim(p, args) => {
                if args.len() + 1 < p.arity() {
                    let mut v = args.to_vec();
                    v.push(arg);
                    return Ok(Value::Prim(p, Arc::from(v)));
                }
                self.tick()?;
                let mut all = args.to_vec();
                all.push(arg);
                apply_prim(p, all)
            }
            _ => Err(EvalError::NotAFunction),
        }
    }
}

fn apply_prim(p: Prim, mut args: Vec<Value>) -> Result<Value, EvalError> {
    let name = p.name();
    let bad = || EvalError::BadArgument(name);
    match p {
        Prim::Add | Prim::Sub | Prim::Mul | Prim::Lt => {
            let (Value::Int(a), Value::Int(b)) = (&args[0], &args[1]) else { return Err(bad()) };
            let r = match p {
                Prim::Add => a.checked_add(*b),
                Prim::Sub => a.checked_sub(*b),
                Prim::Mul => a.checked_mul(*b),
                _ => return Ok(Value::Bool(a < b)),
            };
            r.map(Value::Int).ok_or(EvalError::Overflow)
        }
        Prim::Eq => args[0].first_order_eq(&args[1]).map(Value::Bool).ok_or(EvalError::FunctionEquality),
        Prim::Cons => {
            let tail = args.pop().unwrap();
            let head = args.pop().unwrap();
            match tail {
                Value::List(xs) => Ok(Value::List(List::cons(head, xs))),
                _ => Err(bad()),
            }
        }
        Prim::Head => match &args[0] {
            Value::List(xs) => xs.head().cloned().ok_or(EvalError::EmptyList(name)),
            _ => Err(bad()),
        },
        Prim::Tail => match &args[0] {
            Value::List(xs) => xs.tail().cloned().map(Value::List).ok_or(EvalError::EmptyList(name)),
            _ => Err(bad()),
        },
        Prim::Not => match args[0] {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            _ => Err(bad()),
        },
        Prim::IsUpper | Prim::IsAlpha | Prim::IsNum => match args[0] {
            Value::Char(c) => Ok(Value::Bool(match p {
                Prim::IsUpper => c.is_uppercase(),
                Prim::IsAlpha => c.is_alphabetic(),
                _ => c.is_ascii_digit(),
            })),
            _ => Err(bad()),
        },
    }
}

pub fn eval_expr(env: &RuntimeEnv, e: &Expr, budget: Budget) -> Result<Value, EvalError> {
    let mut m = Machine { globals: env, steps_left: budget.max_steps, depth: 0 };
    m.eval(&Locals::default(), e)
}

/// Applies the global `name` to `arg`.
pub fn call(env: &RuntimeEnv, name: &str, arg: Value, budget: Budget) -> Result<Value, EvalError> {
    let f = env.get(name).cloned().ok_or_else(|| EvalError::Unbound(Ident::new(name)))?;
    let mut m = Machine { globals: env, steps_left: budget.max_steps, depth: 0 };
    m.apply(f, arg)
}
