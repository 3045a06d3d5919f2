//! Abstract syntax of the target language.
//!
//! Expressions are a small lambda calculus with literals, conditionals and
//! numbered holes. Primitive operators (`+`, `:`, `=`, ...) are ordinary
//! variables applied in curried form, so `a + b` is
//! `Apply(Apply(Var "+", a), b)`.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

use crate::types::Type;

/// An identifier. Cheap to clone, shared between states and threads.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(s: &str) -> Self {
        Ident(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Ident {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

impl From<String> for Ident {
    fn from(s: String) -> Self {
        Ident(Arc::from(s))
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Index of a hole. Unique within one synthesis path.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HoleId(pub u32);

impl fmt::Display for HoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Num(i64),
    Char(char),
    Bool(bool),
    Var(Ident),
    Lambda(Arc<[Ident]>, Arc<Expr>),
    Apply(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Hole(HoleId),
}

/// Names of the infix primitives, in the spelling the parser accepts.
pub const INFIX_OPERATORS: [&str; 6] = ["+", "-", "*", "=", "<", ":"];

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Ident::new(name))
    }

    pub fn apply(f: Expr, arg: Expr) -> Expr {
        Expr::Apply(Box::new(f), Box::new(arg))
    }

    /// Applies `f` to each argument in turn.
    pub fn apply_all(f: Expr, args: impl IntoIterator<Item = Expr>) -> Expr {
        args.into_iter().fold(f, Expr::apply)
    }

    pub fn lambda(params: Vec<Ident>, body: Expr) -> Expr {
        Expr::Lambda(params.into(), Arc::new(body))
    }

    pub fn if_then_else(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn binop(op: &str, lhs: Expr, rhs: Expr) -> Expr {
        Expr::apply(Expr::apply(Expr::var(op), lhs), rhs)
    }

    /// Builds the cons chain `x1 : x2 : ... : nil`.
    pub fn list(items: Vec<Expr>) -> Expr {
        items
            .into_iter()
            .rev()
            .fold(Expr::var("nil"), |acc, x| Expr::binop(":", x, acc))
    }

    /// Names occurring free in the expression.
    pub fn free_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        match self {
            Expr::Num(_) | Expr::Char(_) | Expr::Bool(_) | Expr::Hole(_) => {}
            Expr::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Lambda(params, body) => {
                let mark = bound.len();
                bound.extend(params.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(mark);
            }
            Expr::Apply(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Expr::If(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
        }
    }

    /// Hole indices in left-to-right order.
    pub fn holes(&self) -> Vec<HoleId> {
        let mut out = Vec::new();
        self.collect_holes(&mut out);
        out
    }

    fn collect_holes(&self, out: &mut Vec<HoleId>) {
        match self {
            Expr::Hole(h) => out.push(*h),
            Expr::Lambda(_, body) => body.collect_holes(out),
            Expr::Apply(f, a) => {
                f.collect_holes(out);
                a.collect_holes(out);
            }
            Expr::If(c, t, e) => {
                c.collect_holes(out);
                t.collect_holes(out);
                e.collect_holes(out);
            }
            _ => {}
        }
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Expr::Hole(_) => true,
            Expr::Lambda(_, body) => body.has_holes(),
            Expr::Apply(f, a) => f.has_holes() || a.has_holes(),
            Expr::If(c, t, e) => c.has_holes() || t.has_holes() || e.has_holes(),
            _ => false,
        }
    }

    pub fn contains_lambda(&self) -> bool {
        match self {
            Expr::Lambda(..) => true,
            Expr::Apply(f, a) => f.contains_lambda() || a.contains_lambda(),
            Expr::If(c, t, e) => c.contains_lambda() || t.contains_lambda() || e.contains_lambda(),
            _ => false,
        }
    }

    /// Replaces hole `hole` with `filler`. Returns false if the hole is absent.
    pub fn fill_hole(&mut self, hole: HoleId, filler: &Expr) -> bool {
        match self {
            Expr::Hole(h) if *h == hole => {
                *self = filler.clone();
                true
            }
            Expr::Lambda(_, body) => {
                let mut inner = (**body).clone();
                let found = inner.fill_hole(hole, filler);
                if found {
                    *body = Arc::new(inner);
                }
                found
            }
            Expr::Apply(f, a) => f.fill_hole(hole, filler) || a.fill_hole(hole, filler),
            Expr::If(c, t, e) => {
                c.fill_hole(hole, filler) || t.fill_hole(hole, filler) || e.fill_hole(hole, filler)
            }
            _ => false,
        }
    }

    /// Splits `f a1 ... an` into `(f, [a1, ..., an])`.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Expr::Apply(f, a) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }

    /// Equality up to renaming of lambda-bound variables.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        fn go<'a>(
            a: &'a Expr,
            b: &'a Expr,
            env: &mut Vec<(&'a Ident, &'a Ident)>,
        ) -> bool {
            match (a, b) {
                (Expr::Num(x), Expr::Num(y)) => x == y,
                (Expr::Char(x), Expr::Char(y)) => x == y,
                (Expr::Bool(x), Expr::Bool(y)) => x == y,
                (Expr::Hole(x), Expr::Hole(y)) => x == y,
                (Expr::Var(x), Expr::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if *l == x || *r == y {
                            return *l == x && *r == y;
                        }
                    }
                    x == y
                }
                (Expr::Lambda(px, bx), Expr::Lambda(py, by)) => {
                    if px.len() != py.len() {
                        return false;
                    }
                    let mark = env.len();
                    env.extend(px.iter().zip(py.iter()));
                    let ok = go(bx, by, env);
                    env.truncate(mark);
                    ok
                }
                (Expr::Apply(fx, ax), Expr::Apply(fy, ay)) => go(fx, fy, env) && go(ax, ay, env),
                (Expr::If(cx, tx, ex), Expr::If(cy, ty, ey)) => {
                    go(cx, cy, env) && go(tx, ty, env) && go(ex, ey, env)
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Elements of a `x1 : ... : nil` chain, if the expression is one.
    fn as_list_literal(&self) -> Option<Vec<&Expr>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Expr::Var(n) if &**n == "nil" => return Some(items),
                Expr::Apply(f, tl) => match &**f {
                    Expr::Apply(op, hd) if matches!(&**op, Expr::Var(o) if &**o == ":") => {
                        items.push(&**hd);
                        cur = tl;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }
}

// Precedence levels used by the printer; they mirror the parser.
const PREC_TOP: u8 = 0;
const PREC_CMP: u8 = 1;
const PREC_CONS: u8 = 2;
const PREC_ADD: u8 = 3;
const PREC_MUL: u8 = 4;
const PREC_APP: u8 = 6;
const PREC_ATOM: u8 = 7;

fn op_prec(op: &str) -> Option<u8> {
    match op {
        "=" | "<" => Some(PREC_CMP),
        ":" => Some(PREC_CONS),
        "+" | "-" => Some(PREC_ADD),
        "*" => Some(PREC_MUL),
        _ => None,
    }
}

fn write_char_literal(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    match c {
        '\n' => f.write_str("'\\n'"),
        '\t' => f.write_str("'\\t'"),
        '\\' => f.write_str("'\\\\'"),
        '\'' => f.write_str("'\\''"),
        c => write!(f, "'{c}'"),
    }
}

impl Expr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        if let Some(items) = self.as_list_literal() {
            if !items.is_empty() {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    item.fmt_prec(f, PREC_TOP)?;
                }
                return f.write_str("]");
            }
        }
        match self {
            Expr::Num(n) if *n < 0 && ctx > PREC_TOP => write!(f, "({n})"),
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Char(c) => write_char_literal(f, *c),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Hole(h) => write!(f, "{h}"),
            Expr::Var(x) => {
                if op_prec(x).is_some() {
                    write!(f, "({x})")
                } else {
                    write!(f, "{x}")
                }
            }
            Expr::Lambda(params, body) => {
                if ctx > PREC_TOP {
                    f.write_str("(")?;
                }
                f.write_str("lambda (")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(") ")?;
                body.fmt_prec(f, PREC_TOP)?;
                if ctx > PREC_TOP {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::If(c, t, e) => {
                if ctx > PREC_TOP {
                    f.write_str("(")?;
                }
                f.write_str("if ")?;
                c.fmt_prec(f, PREC_TOP)?;
                f.write_str(" then ")?;
                t.fmt_prec(f, PREC_TOP)?;
                f.write_str(" else ")?;
                e.fmt_prec(f, PREC_TOP)?;
                if ctx > PREC_TOP {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Apply(..) => {
                let (head, args) = self.spine();
                if let (Expr::Var(op), 2) = (head, args.len()) {
                    if let Some(p) = op_prec(op) {
                        // `:` is right-associative, comparisons are not associative
                        let (lp, rp) = match &**op {
                            ":" => (p + 1, p),
                            "=" | "<" => (p + 1, p + 1),
                            _ => (p, p + 1),
                        };
                        if ctx > p {
                            f.write_str("(")?;
                        }
                        args[0].fmt_prec(f, lp)?;
                        write!(f, " {op} ")?;
                        args[1].fmt_prec(f, rp)?;
                        if ctx > p {
                            f.write_str(")")?;
                        }
                        return Ok(());
                    }
                }
                if ctx > PREC_APP {
                    f.write_str("(")?;
                }
                head.fmt_prec(f, PREC_APP)?;
                for a in args {
                    f.write_str(" ")?;
                    a.fmt_prec(f, PREC_ATOM)?;
                }
                if ctx > PREC_APP {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, PREC_TOP)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Declaration {
    /// Non-recursive definition.
    Val { name: Ident, body: Expr, line: usize },
    /// Recursive definition; the name is in scope in its own body.
    Rec { name: Ident, body: Expr, line: usize },
    PosExample { input: Expr, output: Expr, line: usize },
    NegExample { input: Expr, output: Expr, line: usize },
    Synthesize { input: Type, output: Type, line: usize },
}

impl Declaration {
    pub fn line(&self) -> usize {
        match self {
            Declaration::Val { line, .. }
            | Declaration::Rec { line, .. }
            | Declaration::PosExample { line, .. }
            | Declaration::NegExample { line, .. }
            | Declaration::Synthesize { line, .. } => *line,
        }
    }

    /// Name and body of a definition.
    pub fn definition(&self) -> Option<(&Ident, &Expr)> {
        match self {
            Declaration::Val { name, body, .. } | Declaration::Rec { name, body, .. } => {
                Some((name, body))
            }
            _ => None,
        }
    }

    pub fn is_recursive(&self) -> bool {
        matches!(self, Declaration::Rec { .. })
    }
}

/// How a template body is printed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Notation {
    /// `f.g`
    Infix,
    /// `comb a b`
    Prefix,
    /// The body is the single filler.
    Bare,
}

/// The template a function body was built from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TemplateUse {
    pub name: Ident,
    pub notation: Notation,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InducedFunction {
    pub name: Ident,
    pub body: Expr,
    pub template: Option<TemplateUse>,
}

impl InducedFunction {
    /// True when the body has no holes and every name it mentions is known.
    pub fn is_complete(&self, is_defined: impl Fn(&str) -> bool) -> bool {
        !self.body.has_holes() && self.body.free_names().iter().all(|n| is_defined(n))
    }

    /// Names of the fillers placed in the template, in hole order.
    fn template_args(&self) -> Vec<&Expr> {
        match self.template.as_ref().map(|t| t.notation) {
            Some(Notation::Bare) => vec![&self.body],
            _ => self.body.spine().1,
        }
    }

    /// The body in table notation: `f.g`, `map f` or `f`.
    pub fn render_body(&self) -> String {
        let args = self.template_args();
        match &self.template {
            Some(TemplateUse { notation: Notation::Infix, .. }) if args.len() == 2 => {
                format!("{}.{}", args[0], args[1])
            }
            Some(TemplateUse { notation: Notation::Bare, .. }) => format!("{}", self.body),
            Some(TemplateUse { name, .. }) => {
                let mut s = name.to_string();
                for a in args {
                    s.push(' ');
                    s.push_str(&a.to_string());
                }
                s
            }
            None => self.body.to_string(),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("function `{0}` is incomplete")]
    Incomplete(Ident),
    #[error("function `{0}` is referenced but not defined")]
    Undefined(Ident),
    #[error("dependency cycle through `{0}`")]
    Cyclic(Ident),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InducedProgram {
    /// Functions in definition order; the target is defined first.
    pub functions: Vec<InducedFunction>,
    pub target: Ident,
}

impl InducedProgram {
    pub fn new(target: Ident) -> Self {
        InducedProgram { functions: Vec::new(), target }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&InducedFunction> {
        self.functions.iter().find(|f| &*f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Ident> {
        self.functions.iter().map(|f| &f.name)
    }

    /// Induced functions each function's body mentions directly.
    pub fn direct_uses(&self) -> BTreeMap<Ident, BTreeSet<Ident>> {
        self.functions
            .iter()
            .map(|f| {
                let uses = f
                    .body
                    .free_names()
                    .into_iter()
                    .filter(|n| self.get(n).is_some())
                    .collect();
                (f.name.clone(), uses)
            })
            .collect()
    }

    /// Definition order with every function after the functions it uses.
    /// Ties follow definition order.
    pub fn topological_order(&self) -> Result<Vec<Ident>, RenderError> {
        let uses = self.direct_uses();
        let mut order = Vec::with_capacity(self.functions.len());
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark: BTreeMap<&Ident, u8> = BTreeMap::new();

        fn visit<'a>(
            n: &'a Ident,
            uses: &'a BTreeMap<Ident, BTreeSet<Ident>>,
            program: &'a InducedProgram,
            mark: &mut BTreeMap<&'a Ident, u8>,
            order: &mut Vec<Ident>,
        ) -> Result<(), RenderError> {
            match mark.get(n) {
                Some(2) => return Ok(()),
                Some(1) => return Err(RenderError::Cyclic(n.clone())),
                _ => {}
            }
            mark.insert(n, 1);
            // children in definition order
            let children = &uses[n];
            for f in &program.functions {
                if children.contains(&f.name) {
                    visit(&f.name, uses, program, mark, order)?;
                }
            }
            mark.insert(n, 2);
            order.push(n.clone());
            Ok(())
        }

        if self.get(&self.target).is_some() {
            visit(&self.target, &uses, self, &mut mark, &mut order)?;
        }
        for f in &self.functions {
            visit(&f.name, &uses, self, &mut mark, &mut order)?;
        }
        Ok(order)
    }

    /// One `name = body` line per function, dependencies first, target last.
    pub fn render(&self) -> Result<String, RenderError> {
        for f in &self.functions {
            if f.body.has_holes() {
                return Err(RenderError::Incomplete(f.name.clone()));
            }
        }
        for f in &self.functions {
            for n in f.body.free_names() {
                if is_invented_name(&n) && self.get(&n).is_none() {
                    return Err(RenderError::Undefined(n));
                }
            }
        }
        let order = self.topological_order()?;
        let mut out = String::new();
        for name in order {
            let f = self.get(&name).expect("ordered name is defined");
            out.push_str(&format!("{} = {}\n", f.name, f.render_body()));
        }
        Ok(out)
    }
}

/// True for names produced by the fresh-name scheme (`target`, `g2`, `g3`, ...).
pub fn is_invented_name(name: &str) -> bool {
    name == "target"
        || (name.len() > 1 && name.starts_with('g') && name[1..].bytes().all(|b| b.is_ascii_digit()))
}

/// The `k`-th invented name, counting from zero: `target`, `g2`, `g3`, ...
pub fn invented_name(k: u32) -> Ident {
    if k == 0 {
        Ident::new("target")
    } else {
        Ident::from(format!("g{}", k + 1))
    }
}
