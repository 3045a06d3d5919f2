//! Types, substitutions and Hindley-Milner inference for expressions with holes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{Expr, HoleId, Ident};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TypeVar(pub u32);

impl fmt::Display for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Type {
    Var(TypeVar),
    Int,
    Char,
    Bool,
    List(Box<Type>),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn var(n: u32) -> Type {
        Type::Var(TypeVar(n))
    }

    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    /// `a1 -> a2 -> ... -> r`
    pub fn arrows(args: impl IntoIterator<Item = Type>, result: Type) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter().rev().fold(result, |acc, a| Type::arrow(a, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<TypeVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<TypeVar>) {
        match self {
            Type::Var(v) => {
                out.insert(*v);
            }
            Type::List(t) => t.collect_vars(out),
            Type::Arrow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Type::Int | Type::Char | Type::Bool => {}
        }
    }

    pub fn occurs(&self, v: TypeVar) -> bool {
        match self {
            Type::Var(w) => *w == v,
            Type::List(t) => t.occurs(v),
            Type::Arrow(a, b) => a.occurs(v) || b.occurs(v),
            Type::Int | Type::Char | Type::Bool => false,
        }
    }

    /// Splits off up to `n` leading argument types.
    pub fn split_arrows(&self, n: usize) -> Option<(Vec<&Type>, &Type)> {
        let mut args = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            match cur {
                Type::Arrow(a, b) => {
                    args.push(&**a);
                    cur = b;
                }
                _ => return None,
            }
        }
        Some((args, cur))
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &dyn Fn(TypeVar) -> String, arg: bool) -> fmt::Result {
        match self {
            Type::Var(v) => f.write_str(&names(*v)),
            Type::Int => f.write_str("Int"),
            Type::Char => f.write_str("Char"),
            Type::Bool => f.write_str("Bool"),
            Type::List(t) => {
                f.write_str("[")?;
                t.fmt_with(f, names, false)?;
                f.write_str("]")
            }
            Type::Arrow(a, b) => {
                if arg {
                    f.write_str("(")?;
                }
                a.fmt_with(f, names, true)?;
                f.write_str(" -> ")?;
                b.fmt_with(f, names, false)?;
                if arg {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| v.to_string(), false)
    }
}

/// Source of fresh type variables. Each synthesis path carries its own.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VarSupply {
    next: u32,
}

impl VarSupply {
    pub fn new() -> Self {
        VarSupply { next: 0 }
    }

    /// A supply that never hands out variables below `start`.
    pub fn starting_at(start: u32) -> Self {
        VarSupply { next: start }
    }

    pub fn fresh(&mut self) -> TypeVar {
        let v = TypeVar(self.next);
        self.next += 1;
        v
    }

    pub fn fresh_type(&mut self) -> Type {
        Type::Var(self.fresh())
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    /// Makes sure later variables do not collide with anything in `t`.
    pub fn avoid(&mut self, t: &Type) {
        if let Some(max) = t.free_vars().iter().map(|v| v.0).max() {
            self.next = self.next.max(max + 1);
        }
    }
}

/// Idempotent mapping from type variables to types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<TypeVar, Type>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn singleton(v: TypeVar, t: Type) -> Self {
        let mut s = Subst::new();
        s.bind(v, t);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: TypeVar) -> Option<&Type> {
        self.map.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TypeVar, &Type)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Type) -> Type {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Type::Var(v) => match self.map.get(v) {
                Some(r) => r.clone(),
                None => t.clone(),
            },
            Type::List(e) => Type::list(self.apply(e)),
            Type::Arrow(a, b) => Type::arrow(self.apply(a), self.apply(b)),
            Type::Int | Type::Char | Type::Bool => t.clone(),
        }
    }

    /// Adds `v := t`, where `t` is already fully substituted and does not
    /// mention `v`. Existing bindings are rewritten so the result stays
    /// idempotent.
    fn bind(&mut self, v: TypeVar, t: Type) {
        let single = Subst { map: BTreeMap::from([(v, t.clone())]) };
        for r in self.map.values_mut() {
            if r.occurs(v) {
                *r = single.apply(r);
            }
        }
        self.map.insert(v, t);
    }

    /// `self` after `first`: applying the result equals applying `first`
    /// and then `self`.
    pub fn compose(&self, first: &Subst) -> Subst {
        let mut map: BTreeMap<TypeVar, Type> =
            first.map.iter().map(|(v, t)| (*v, self.apply(t))).collect();
        for (v, t) in &self.map {
            map.entry(*v).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| *t != Type::Var(*v));
        Subst { map }
    }

    /// Extends the substitution so that `a` and `b` become equal.
    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), UnifyError> {
        let a = self.apply(a);
        let b = self.apply(b);
        self.unify_applied(&a, &b)
    }

    fn unify_applied(&mut self, a: &Type, b: &Type) -> Result<(), UnifyError> {
        match (a, b) {
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Var(x), t) | (t, Type::Var(x)) => {
                if t.occurs(*x) {
                    return Err(UnifyError::Occurs(*x, t.clone()));
                }
                self.bind(*x, t.clone());
                Ok(())
            }
            (Type::Int, Type::Int) | (Type::Char, Type::Char) | (Type::Bool, Type::Bool) => Ok(()),
            (Type::List(x), Type::List(y)) => self.unify_applied(x, y),
            (Type::Arrow(a1, r1), Type::Arrow(a2, r2)) => {
                self.unify_applied(a1, a2)?;
                let r1 = self.apply(r1);
                let r2 = self.apply(r2);
                self.unify_applied(&r1, &r2)
            }
            _ => Err(UnifyError::Mismatch(a.clone(), b.clone())),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Mismatch(Type, Type),
    #[error("infinite type: {0} occurs in {1}")]
    Occurs(TypeVar, Type),
}

/// Most general unifier of two types.
pub fn unify(a: &Type, b: &Type) -> Result<Subst, UnifyError> {
    let mut s = Subst::new();
    s.unify(a, b)?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub vars: Vec<TypeVar>,
    pub ty: Type,
}

impl Scheme {
    pub fn mono(ty: Type) -> Self {
        Scheme { vars: Vec::new(), ty }
    }

    /// Quantifies every free variable of `ty`.
    pub fn closed(ty: Type) -> Self {
        Scheme { vars: ty.free_vars().into_iter().collect(), ty }
    }

    pub fn free_vars(&self) -> BTreeSet<TypeVar> {
        let mut fv = self.ty.free_vars();
        for v in &self.vars {
            fv.remove(v);
        }
        fv
    }

    pub fn instantiate(&self, supply: &mut VarSupply) -> Type {
        if self.vars.is_empty() {
            return self.ty.clone();
        }
        let s = Subst { map: self.vars.iter().map(|v| (*v, supply.fresh_type())).collect() };
        s.apply(&self.ty)
    }

    /// The scheme with bound variables renamed `0, 1, ...` in order of first
    /// occurrence, so alpha-equivalent schemes compare equal.
    pub fn canonical(&self) -> Scheme {
        let bound: BTreeSet<TypeVar> = self.vars.iter().copied().collect();
        let mut order = Vec::new();
        fn walk(t: &Type, bound: &BTreeSet<TypeVar>, order: &mut Vec<TypeVar>) {
            match t {
                Type::Var(v) => {
                    if bound.contains(v) && !order.contains(v) {
                        order.push(*v);
                    }
                }
                Type::List(e) => walk(e, bound, order),
                Type::Arrow(a, b) => {
                    walk(a, bound, order);
                    walk(b, bound, order);
                }
                _ => {}
            }
        }
        walk(&self.ty, &bound, &mut order);
        // keep canonical names clear of the scheme's free variables
        let offset = self.free_vars().iter().map(|v| v.0 + 1).max().unwrap_or(0).max(1 << 24);
        let s = Subst {
            map: order
                .iter()
                .enumerate()
                .map(|(i, v)| (*v, Type::var(offset + i as u32)))
                .collect(),
        };
        Scheme {
            vars: (0..order.len()).map(|i| TypeVar(offset + i as u32)).collect(),
            ty: s.apply(&self.ty),
        }
    }

    pub fn alpha_eq(&self, other: &Scheme) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.canonical();
        let base = c.vars.first().map(|v| v.0).unwrap_or(0);
        let names = |v: TypeVar| {
            if c.vars.contains(&v) {
                let i = v.0 - base;
                if i < 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("a{i}")
                }
            } else {
                format!("t{}", v.0)
            }
        };
        if !c.vars.is_empty() {
            f.write_str("forall")?;
            for v in &c.vars {
                write!(f, " {}", names(*v))?;
            }
            f.write_str(". ")?;
        }
        c.ty.fmt_with(f, &names, false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvEntry {
    /// Primitives, combinators and background functions.
    Poly(Scheme),
    /// Invented functions keep unquantified types.
    Mono(Type),
}

impl EnvEntry {
    pub fn instantiate(&self, supply: &mut VarSupply) -> Type {
        match self {
            EnvEntry::Poly(s) => s.instantiate(supply),
            EnvEntry::Mono(t) => t.clone(),
        }
    }

    fn free_vars(&self) -> BTreeSet<TypeVar> {
        match self {
            EnvEntry::Poly(s) => s.free_vars(),
            EnvEntry::Mono(t) => t.free_vars(),
        }
    }

    fn apply(&self, s: &Subst) -> EnvEntry {
        match self {
            EnvEntry::Poly(sc) => {
                // bound variables are untouched
                let mut inner = s.clone();
                for v in &sc.vars {
                    inner.map.remove(v);
                }
                EnvEntry::Poly(Scheme { vars: sc.vars.clone(), ty: inner.apply(&sc.ty) })
            }
            EnvEntry::Mono(t) => EnvEntry::Mono(s.apply(t)),
        }
    }
}

/// Typing environment. An optional shared parent holds the closed schemes
/// of the background knowledge so per-state copies stay small.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    parent: Option<Arc<TypeEnv>>,
    entries: BTreeMap<Ident, EnvEntry>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    /// A new layer on top of `parent`. The parent must have no free type
    /// variables, since substitutions are never pushed into it.
    pub fn child_of(parent: Arc<TypeEnv>) -> Self {
        debug_assert!(parent.free_vars().is_empty());
        TypeEnv { parent: Some(parent), entries: BTreeMap::new() }
    }

    pub fn get(&self, name: &str) -> Option<&EnvEntry> {
        match self.entries.get(name) {
            Some(e) => Some(e),
            None => self.parent.as_ref().and_then(|p| p.get(name)),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn insert(&mut self, name: Ident, entry: EnvEntry) {
        self.entries.insert(name, entry);
    }

    pub fn insert_scheme(&mut self, name: &str, scheme: Scheme) {
        self.entries.insert(Ident::new(name), EnvEntry::Poly(scheme));
    }

    pub fn remove(&mut self, name: &str) -> Option<EnvEntry> {
        self.entries.remove(name)
    }

    /// Entries of this layer only.
    pub fn local_entries(&self) -> impl Iterator<Item = (&Ident, &EnvEntry)> {
        self.entries.iter()
    }

    pub fn free_vars(&self) -> BTreeSet<TypeVar> {
        let mut out: BTreeSet<TypeVar> = self.entries.values().flat_map(|e| e.free_vars()).collect();
        if let Some(p) = &self.parent {
            out.extend(p.free_vars());
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> TypeEnv {
        TypeEnv {
            parent: self.parent.clone(),
            entries: self.entries.iter().map(|(k, e)| (k.clone(), e.apply(s))).collect(),
        }
    }

    /// Largest type variable mentioned anywhere, bound or free.
    fn max_var(&self) -> Option<u32> {
        let local = self
            .entries
            .values()
            .flat_map(|e| match e {
                EnvEntry::Poly(s) => {
                    let mut vs = s.ty.free_vars();
                    vs.extend(s.vars.iter().copied());
                    vs
                }
                EnvEntry::Mono(t) => t.free_vars(),
            })
            .map(|v| v.0)
            .max();
        let parent = self.parent.as_ref().and_then(|p| p.max_var());
        local.max(parent)
    }

    /// A supply whose variables are unused by this environment.
    pub fn fresh_supply(&self) -> VarSupply {
        VarSupply::starting_at(self.max_var().map_or(0, |m| m + 1))
    }
}

/// Closes over the variables of `t` that are not free in `env`.
pub fn generalize(env: &TypeEnv, t: &Type) -> Scheme {
    let env_fv = env.free_vars();
    Scheme { vars: t.free_vars().into_iter().filter(|v| !env_fv.contains(v)).collect(), ty: t.clone() }
}

pub fn instantiate(s: &Scheme, supply: &mut VarSupply) -> Type {
    s.instantiate(supply)
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum InferError {
    #[error("unbound identifier `{0}`")]
    Unbound(Ident),
    #[error(transparent)]
    Unify(#[from] UnifyError),
    #[error("repeated parameter `{0}`")]
    DuplicateParam(Ident),
    #[error("repeated hole {0}")]
    DuplicateHole(HoleId),
}

#[derive(Clone, Debug)]
pub struct Inferred {
    pub ty: Type,
    pub subst: Subst,
    /// Type of each hole under `subst`.
    pub holes: BTreeMap<HoleId, Type>,
}

struct Infer<'a> {
    env: &'a TypeEnv,
    supply: &'a mut VarSupply,
    subst: Subst,
    holes: BTreeMap<HoleId, Type>,
    locals: Vec<(Ident, Type)>,
}

impl Infer<'_> {
    fn lookup(&mut self, name: &Ident) -> Result<Type, InferError> {
        if let Some((_, t)) = self.locals.iter().rev().find(|(n, _)| n == name) {
            return Ok(t.clone());
        }
        match self.env.get(name) {
            Some(e) => Ok(e.instantiate(self.supply)),
            None => Err(InferError::Unbound(name.clone())),
        }
    }

    fn infer(&mut self, e: &Expr) -> Result<Type, InferError> {
        match e {
            Expr::Num(_) => Ok(Type::Int),
            Expr::Char(_) => Ok(Type::Char),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Var(x) => self.lookup(x),
            Expr::Hole(h) => {
                let t = self.supply.fresh_type();
                if self.holes.insert(*h, t.clone()).is_some() {
                    return Err(InferError::DuplicateHole(*h));
                }
                Ok(t)
            }
            Expr::Lambda(params, body) => {
                let mark = self.locals.len();
                let mut arg_types = Vec::with_capacity(params.len());
                for (i, p) in params.iter().enumerate() {
                    if params[..i].contains(p) {
                        return Err(InferError::DuplicateParam(p.clone()));
                    }
                    let t = self.supply.fresh_type();
                    arg_types.push(t.clone());
                    self.locals.push((p.clone(), t));
                }
                let result = self.infer(body);
                self.locals.truncate(mark);
                let body_ty = result?;
                Ok(Type::arrows(arg_types, body_ty))
            }
            Expr::Apply(f, a) => {
                let tf = self.infer(f)?;
                let ta = self.infer(a)?;
                let r = self.supply.fresh_type();
                self.subst.unify(&tf, &Type::arrow(ta, r.clone()))?;
                Ok(r)
            }
            Expr::If(c, t, el) => {
                let tc = self.infer(c)?;
                self.subst.unify(&tc, &Type::Bool)?;
                let tt = self.infer(t)?;
                let te = self.infer(el)?;
                self.subst.unify(&tt, &te)?;
                Ok(tt)
            }
        }
    }
}

/// Infers the type of `e`. Holes get fresh variables; the returned map gives
/// each hole's type after all constraints in `e` are applied.
pub fn infer_expr(env: &TypeEnv, e: &Expr, supply: &mut VarSupply) -> Result<Inferred, InferError> {
    let mut st = Infer { env, supply, subst: Subst::new(), holes: BTreeMap::new(), locals: Vec::new() };
    let t = st.infer(e)?;
    let subst = st.subst;
    let holes = st.holes.iter().map(|(h, t)| (*h, subst.apply(t))).collect();
    Ok(Inferred { ty: subst.apply(&t), subst, holes })
}

/// Infers and generalizes a top-level definition. A recursive definition
/// sees its own name at a monomorphic type.
pub fn infer_definition(
    env: &TypeEnv,
    name: &Ident,
    body: &Expr,
    recursive: bool,
    supply: &mut VarSupply,
) -> Result<Scheme, InferError> {
    if recursive {
        let self_ty = supply.fresh_type();
        let mut inner = env.clone();
        inner.insert(name.clone(), EnvEntry::Mono(self_ty.clone()));
        let mut inf = infer_expr(&inner, body, supply)?;
        inf.subst.unify(&self_ty, &inf.ty)?;
        let ty = inf.subst.apply(&inf.ty);
        Ok(generalize(&env.apply(&inf.subst), &ty))
    } else {
        let inf = infer_expr(env, body, supply)?;
        Ok(generalize(&env.apply(&inf.subst), &inf.ty))
    }
}

/// A complete definition to be typed by [`infer_program`].
pub struct Definition<'a> {
    pub name: &'a Ident,
    pub body: &'a Expr,
}

/// Types each definition in the given order, generalizing each one before
/// later definitions refer to it. Returns the environment extended with
/// every definition's scheme.
pub fn infer_program<'a>(
    env: &TypeEnv,
    defs: impl IntoIterator<Item = Definition<'a>>,
) -> Result<TypeEnv, InferError> {
    let mut out = env.clone();
    let mut supply = env.fresh_supply();
    for d in defs {
        let scheme = infer_definition(&out, d.name, d.body, false, &mut supply)?;
        out.insert(d.name.clone(), EnvEntry::Poly(scheme));
    }
    Ok(out)
}

/// Schemes of the built-in primitives.
pub fn primitive_env() -> TypeEnv {
    let a = || Type::var(0);
    let mut env = TypeEnv::new();
    let int2 = Scheme::mono(Type::arrows([Type::Int, Type::Int], Type::Int));
    for op in ["+", "-", "*"] {
        env.insert_scheme(op, int2.clone());
    }
    env.insert_scheme("=", Scheme::closed(Type::arrows([a(), a()], Type::Bool)));
    env.insert_scheme("<", Scheme::mono(Type::arrows([Type::Int, Type::Int], Type::Bool)));
    env.insert_scheme("not", Scheme::mono(Type::arrow(Type::Bool, Type::Bool)));
    env.insert_scheme("head", Scheme::closed(Type::arrow(Type::list(a()), a())));
    env.insert_scheme("tail", Scheme::closed(Type::arrow(Type::list(a()), Type::list(a()))));
    env.insert_scheme("nil", Scheme::closed(Type::list(a())));
    env.insert_scheme(":", Scheme::closed(Type::arrows([a(), Type::list(a())], Type::list(a()))));
    for p in ["isUpper", "isAlpha", "isNum"] {
        env.insert_scheme(p, Scheme::mono(Type::arrow(Type::Char, Type::Bool)));
    }
    env
}
