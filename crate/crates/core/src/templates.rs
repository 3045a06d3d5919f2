//! Function templates: a combinator applied to holes.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{Declaration, Expr, HoleId, Ident, Notation, TemplateUse};
use crate::parser::combinator_arity;
use crate::types::{infer_definition, InferError, Scheme, Type, TypeEnv, VarSupply};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Classification {
    /// The hole argument types share no type variables.
    Linear,
    Branching,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TemplateKind {
    Combinator,
    /// A bare hole: the body is the filler itself.
    Identity,
}

#[derive(Clone, Debug)]
pub struct Template {
    pub name: Ident,
    pub scheme: Scheme,
    pub hole_count: usize,
    /// The first `hole_count` parameter types of the scheme, sharing its
    /// variables.
    pub hole_arg_types: Vec<Type>,
    pub classification: Classification,
    pub kind: TemplateKind,
    pub notation: Notation,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("`{0}` is not a definition")]
    NotADefinition(String),
    #[error("template `{name}` is untypable: {error}")]
    Untypable { name: Ident, error: InferError },
    #[error("template `{name}` takes {arity} parameters but its type has fewer arrows")]
    ArityExceedsType { name: Ident, arity: usize },
    #[error("template `{0}` takes no parameters")]
    Nullary(Ident),
}

/// `forall a b c. (b -> c) -> (a -> b) -> a -> c`
pub fn composition_scheme() -> Scheme {
    let (a, b, c) = (Type::var(0), Type::var(1), Type::var(2));
    Scheme::closed(Type::arrows(
        [Type::arrow(b.clone(), c.clone()), Type::arrow(a.clone(), b), a],
        c,
    ))
}

fn classify(hole_types: &[Type]) -> Classification {
    for (i, a) in hole_types.iter().enumerate() {
        let fa = a.free_vars();
        for b in &hole_types[i + 1..] {
            if b.free_vars().iter().any(|v| fa.contains(v)) {
                return Classification::Branching;
            }
        }
    }
    Classification::Linear
}

impl Template {
    /// Builds a template from a combinator scheme and its parameter count.
    pub fn from_scheme(name: Ident, scheme: Scheme, hole_count: usize) -> Result<Template, TemplateError> {
        if hole_count == 0 {
            return Err(TemplateError::Nullary(name));
        }
        let Some((args, _)) = scheme.ty.split_arrows(hole_count) else {
            return Err(TemplateError::ArityExceedsType { name, arity: hole_count });
        };
        let hole_arg_types: Vec<Type> = args.into_iter().cloned().collect();
        let classification = classify(&hole_arg_types);
        let notation = if hole_count == 2 && scheme.alpha_eq(&composition_scheme()) {
            Notation::Infix
        } else {
            Notation::Prefix
        };
        Ok(Template {
            name,
            scheme,
            hole_count,
            hole_arg_types,
            classification,
            kind: TemplateKind::Combinator,
            notation,
        })
    }

    /// Infers the combinator's scheme in `env` and builds the template.
    pub fn build(d: &Declaration, env: &TypeEnv) -> Result<Template, TemplateError> {
        let Some((name, body)) = d.definition() else {
            return Err(TemplateError::NotADefinition(format!("line {}", d.line())));
        };
        let mut supply = env.fresh_supply();
        let scheme = infer_definition(env, name, body, d.is_recursive(), &mut supply)
            .map_err(|error| TemplateError::Untypable { name: name.clone(), error })?;
        Template::from_scheme(name.clone(), scheme, combinator_arity(body))
    }

    /// The bare-hole template.
    pub fn identity() -> Template {
        let a = Type::var(0);
        Template {
            name: Ident::new("id"),
            scheme: Scheme::closed(Type::arrow(a.clone(), a.clone())),
            hole_count: 1,
            hole_arg_types: vec![a],
            classification: Classification::Linear,
            kind: TemplateKind::Identity,
            notation: Notation::Bare,
        }
    }

    pub fn usage(&self) -> TemplateUse {
        TemplateUse { name: self.name.clone(), notation: self.notation }
    }

    /// A copy of the template body with fresh holes and type variables.
    pub fn instantiate(&self, next_hole: &mut u32, supply: &mut VarSupply) -> Instance {
        let holes: Vec<HoleId> = (0..self.hole_count)
            .map(|_| {
                let h = HoleId(*next_hole);
                *next_hole += 1;
                h
            })
            .collect();
        let ty = self.scheme.instantiate(supply);
        let (args, result) = ty.split_arrows(self.hole_count).expect("checked when built");
        let hole_types = holes.iter().copied().zip(args.into_iter().cloned()).collect();
        let body_type = result.clone();
        let body = match self.kind {
            TemplateKind::Identity => Expr::Hole(holes[0]),
            TemplateKind::Combinator => {
                Expr::apply_all(Expr::Var(self.name.clone()), holes.iter().map(|h| Expr::Hole(*h)))
            }
        };
        let body_type = match self.kind {
            // the filler is the whole body
            TemplateKind::Identity => ty.split_arrows(1).unwrap().0[0].clone(),
            TemplateKind::Combinator => body_type,
        };
        Instance { body, body_type, hole_types }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub body: Expr,
    pub body_type: Type,
    pub hole_types: BTreeMap<HoleId, Type>,
}
