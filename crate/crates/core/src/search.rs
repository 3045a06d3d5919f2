//! The synthesis engine.
//!
//! A [`ProgramState`] is an induced program under construction. [`expand`]
//! either fills the first open hole ([`specialize`]) or gives the next
//! undefined invented function a template body ([`define`]). [`prog_search`]
//! runs iterative deepening over the number of invented functions, so the
//! first program that passes [`check`] has as few functions as possible.
//!
//! Two algorithms share this machinery. The linear one keeps a typing for
//! every invented function and hole and prunes fillers and templates by
//! unification as it goes. The branching one ignores types while expanding
//! and type checks whole programs, with let-polymorphism at definition
//! boundaries, only when they are complete.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::interpreter::{call, eval_expr, load_program, Budget, LoadError as RuntimeLoadError, RuntimeEnv, Value};
use crate::parser::{combinator_arity, split_knowledge, ParseError, RawExample, SourceFile};
use crate::syntax::{invented_name, is_invented_name, Declaration, Expr, HoleId, Ident, InducedFunction, InducedProgram};
use crate::templates::{Template, TemplateError};
use crate::types::{
    infer_definition, infer_expr, infer_program, primitive_env, Definition, EnvEntry, InferError, Scheme, Subst,
    Type, TypeEnv, VarSupply,
};

/// Directed "uses" edges between invented functions, kept acyclic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    edges: BTreeMap<Ident, BTreeSet<Ident>>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("`{user}` using `{used}` would close a cycle")]
pub struct CycleError {
    pub user: Ident,
    pub used: Ident,
}

impl DependencyGraph {
    pub fn new() -> Self {
        DependencyGraph::default()
    }

    pub fn add_node(&mut self, n: Ident) {
        self.edges.entry(n).or_default();
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Ident> {
        self.edges.keys()
    }

    pub fn direct_uses(&self, n: &str) -> impl Iterator<Item = &Ident> {
        self.edges.get(n).into_iter().flatten()
    }

    /// Users of `n`.
    pub fn users<'a>(&'a self, n: &'a str) -> impl Iterator<Item = &'a Ident> + 'a {
        self.edges.iter().filter(move |(_, us)| us.contains(n)).map(|(u, _)| u)
    }

    /// Whether `from` uses `to`, directly or transitively.
    pub fn uses(&self, from: &str, to: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for m in self.direct_uses(n) {
                if &**m == to {
                    return true;
                }
                if seen.insert(&**m) {
                    stack.push(m);
                }
            }
        }
        false
    }

    /// Records that `user` uses `used`, refusing edges that close a cycle.
    pub fn add_edge(&mut self, user: &Ident, used: &Ident) -> Result<(), CycleError> {
        if user == used || self.uses(used, user) {
            return Err(CycleError { user: user.clone(), used: used.clone() });
        }
        self.add_node(used.clone());
        self.edges.entry(user.clone()).or_default().insert(used.clone());
        Ok(())
    }

    /// Every node after the nodes it uses. Roots are visited in `roots`
    /// order, children in name order.
    pub fn topological_order<'a>(&self, roots: impl IntoIterator<Item = &'a Ident>) -> Vec<Ident> {
        fn visit(g: &DependencyGraph, n: &Ident, done: &mut BTreeSet<Ident>, out: &mut Vec<Ident>) {
            if !done.insert(n.clone()) {
                return;
            }
            for m in g.direct_uses(n) {
                visit(g, m, done, out);
            }
            out.push(n.clone());
        }
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for r in roots {
            visit(self, r, &mut done, &mut out);
        }
        for n in self.edges.keys() {
            visit(self, n, &mut done, &mut out);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Prune by unification while expanding.
    Linear,
    /// Type check only complete programs.
    Branching,
}

/// Order in which hole fillers are tried.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillerOrder {
    /// A fresh invention, then earlier inventions, then background functions.
    FreshFirst,
    /// Background functions, then earlier inventions, then a fresh invention.
    BackgroundFirst,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub reuse: bool,
    pub max_depth: usize,
    /// Linear only: drop states whose target type disagrees with the goal.
    pub target_type_pruning: bool,
    pub budget: Budget,
    pub identity_template: bool,
    pub timeout: Option<Duration>,
    pub filler_order: FillerOrder,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::Branching,
            reuse: true,
            max_depth: 8,
            target_type_pruning: true,
            budget: Budget::DEFAULT,
            identity_template: false,
            timeout: None,
            filler_order: FillerOrder::FreshFirst,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Example {
    pub input: Value,
    pub output: Value,
}

#[derive(Clone, Debug)]
pub struct ExampleSet {
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
    /// `input -> output`
    pub goal: Type,
}

#[derive(Error, Debug)]
pub enum ProblemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: `{name}`: {error}")]
    Definition { name: Ident, line: usize, error: InferError },
    #[error("line {line}: {error}")]
    Template { line: usize, error: TemplateError },
    #[error("line {line}: `{name}`: {error}")]
    Runtime { name: Ident, line: usize, error: RuntimeLoadError },
    #[error("line {line}: `{0}` is already defined", .name)]
    Duplicate { name: Ident, line: usize },
    #[error("line {line}: `{name}` clashes with the names given to invented functions")]
    ReservedName { name: Ident, line: usize },
    #[error("line {line}: example {message}")]
    Example { line: usize, message: String },
    #[error("no positive examples")]
    NoPositives,
}

/// Everything the search needs: templates, background knowledge and the
/// evaluated examples.
#[derive(Clone)]
pub struct Problem {
    pub templates: Vec<Template>,
    /// Background function names in file order.
    pub background: Vec<Ident>,
    /// Schemes of primitives, combinators and background functions.
    pub type_env: Arc<TypeEnv>,
    pub runtime: Arc<RuntimeEnv>,
    pub examples: ExampleSet,
}

impl Problem {
    pub fn from_source(file: &SourceFile, budget: Budget) -> Result<Problem, ProblemError> {
        let knowledge = split_knowledge(file)?;
        let mut env = primitive_env();
        let mut runtime = RuntimeEnv::with_primitives();
        let mut supply = VarSupply::new();
        let mut templates = Vec::new();
        let mut background = Vec::new();
        // definitions are loaded in file order so later ones may use earlier ones
        for d in &file.declarations {
            let Some((name, body)) = d.definition() else { continue };
            let line = d.line();
            if env.contains(name) {
                return Err(ProblemError::Duplicate { name: name.clone(), line });
            }
            if is_invented_name(name) {
                return Err(ProblemError::ReservedName { name: name.clone(), line });
            }
            let scheme = infer_definition(&env, name, body, d.is_recursive(), &mut supply)
                .map_err(|error| ProblemError::Definition { name: name.clone(), line, error })?;
            let scheme = Scheme::closed(scheme.ty);
            env.insert(name.clone(), EnvEntry::Poly(scheme.clone()));
            runtime
                .define_declaration(d, budget)
                .map_err(|error| ProblemError::Runtime { name: name.clone(), line, error })?;
            if knowledge.background.contains(d) {
                background.push(name.clone());
            } else if !knowledge.auxiliary.contains(d) {
                let t = Template::from_scheme(name.clone(), scheme, combinator_arity(body))
                    .map_err(|error| ProblemError::Template { line, error })?;
                templates.push(t);
            }
        }
        let raw = &knowledge.examples;
        let goal = raw.goal_type();
        let eval_side = |ex: &RawExample, e: &Expr, want: &Type, what: &str| -> Result<Value, ProblemError> {
            let bad = |message: String| ProblemError::Example { line: ex.line, message };
            if e.has_holes() || e.contains_lambda() {
                return Err(bad(format!("{what} must be a ground value")));
            }
            if let Some(n) = e.free_names().iter().find(|n| is_invented_name(n)) {
                return Err(bad(format!("{what} mentions `{n}`")));
            }
            let mut supply = env.fresh_supply();
            supply.avoid(&goal);
            let inf = infer_expr(&env, e, &mut supply).map_err(|err| bad(format!("{what}: {err}")))?;
            let mut s = Subst::new();
            s.unify(&inf.ty, want)
                .map_err(|_| bad(format!("{what} has type {} but the goal needs {want}", inf.ty)))?;
            let v = eval_expr(&runtime, e, budget).map_err(|err| bad(format!("{what}: {err}")))?;
            if v.is_function() {
                return Err(bad(format!("{what} is a function")));
            }
            Ok(v)
        };
        let convert = |exs: &[RawExample]| -> Result<Vec<Example>, ProblemError> {
            exs.iter()
                .map(|ex| {
                    Ok(Example {
                        input: eval_side(ex, &ex.input, &raw.input_type, "input")?,
                        output: eval_side(ex, &ex.output, &raw.output_type, "output")?,
                    })
                })
                .collect()
        };
        let positives = convert(&raw.positives)?;
        let negatives = convert(&raw.negatives)?;
        if positives.is_empty() {
            return Err(ProblemError::NoPositives);
        }
        Ok(Problem {
            templates,
            background,
            type_env: Arc::new(env),
            runtime: Arc::new(runtime),
            examples: ExampleSet { positives, negatives, goal },
        })
    }

    pub fn template(&self, name: &str) -> Option<&Template> {
        self.templates.iter().find(|t| &*t.name == name)
    }

    fn goal_instance(&self, supply: &mut VarSupply) -> Type {
        Scheme::closed(self.examples.goal.clone()).instantiate(supply)
    }
}

/// Types of invented functions and open holes, kept by the linear algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearTyping {
    pub invented: BTreeMap<Ident, Type>,
    pub holes: BTreeMap<HoleId, Type>,
}

impl LinearTyping {
    fn apply(&mut self, s: &Subst) {
        if s.is_empty() {
            return;
        }
        for t in self.invented.values_mut() {
            *t = s.apply(t);
        }
        for t in self.holes.values_mut() {
            *t = s.apply(t);
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProgramState {
    pub program: InducedProgram,
    /// Invented names in invention order; the target comes first.
    pub invented: Vec<Ident>,
    /// Invented names still waiting for a definition.
    pub queue: VecDeque<Ident>,
    pub graph: DependencyGraph,
    /// Present only under the linear algorithm.
    pub typing: Option<LinearTyping>,
    next_hole: u32,
    supply: VarSupply,
}

impl ProgramState {
    /// The typing environment of the linear algorithm: background schemes
    /// plus the unquantified types of invented functions.
    pub fn typing_env(&self, problem: &Problem) -> Option<TypeEnv> {
        let typing = self.typing.as_ref()?;
        let mut env = TypeEnv::child_of(problem.type_env.clone());
        for (n, t) in &typing.invented {
            env.insert(n.clone(), EnvEntry::Mono(t.clone()));
        }
        Some(env)
    }

    pub fn invented_type(&self, name: &str) -> Option<&Type> {
        self.typing.as_ref()?.invented.get(name)
    }

    pub fn hole_type(&self, h: HoleId) -> Option<&Type> {
        self.typing.as_ref()?.holes.get(&h)
    }

    /// The first open hole: lowest index in the earliest-invented function
    /// that has one.
    pub fn first_hole(&self) -> Option<(Ident, HoleId)> {
        self.invented.iter().find_map(|n| {
            let f = self.program.get(n)?;
            f.body.holes().into_iter().min().map(|h| (n.clone(), h))
        })
    }

    pub fn is_complete(&self) -> bool {
        self.queue.is_empty() && self.first_hole().is_none()
    }

    pub fn function_count(&self) -> usize {
        self.invented.len()
    }

    fn fresh_name(&self) -> Ident {
        invented_name(self.invented.len() as u32)
    }

    fn invent(&mut self) -> Ident {
        let name = self.fresh_name();
        self.invented.push(name.clone());
        self.queue.push_back(name.clone());
        self.graph.add_node(name.clone());
        if let Some(t) = &mut self.typing {
            t.invented.insert(name.clone(), self.supply.fresh_type());
        }
        name
    }

    /// Functions in dependency order, target last.
    pub fn definition_order(&self) -> Vec<Ident> {
        self.graph.topological_order([&self.program.target])
    }
}

pub fn initial_state(problem: &Problem, config: &SearchConfig) -> ProgramState {
    let mut supply = problem.type_env.fresh_supply();
    supply.avoid(&problem.examples.goal);
    let mut s = ProgramState {
        program: InducedProgram::new(invented_name(0)),
        invented: Vec::new(),
        queue: VecDeque::new(),
        graph: DependencyGraph::new(),
        typing: (config.algorithm == Algorithm::Linear).then(LinearTyping::default),
        next_hole: 1,
        supply,
    };
    s.invent();
    s
}

/// What goes into a hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Filler {
    Background(Ident),
    Invented(Ident),
    Fresh,
}

fn target_agrees(s: &mut ProgramState, problem: &Problem, config: &SearchConfig) -> bool {
    if config.algorithm != Algorithm::Linear || !config.target_type_pruning {
        return true;
    }
    let Some(t) = s.invented_type(&s.program.target).cloned() else { return true };
    let goal = problem.goal_instance(&mut s.supply);
    Subst::new().unify(&t, &goal).is_ok()
}

/// Fills hole `hole` of `f` with `filler`. `None` when the filler is
/// illegal there: it would make `f` use itself, or (linear algorithm) its
/// type does not unify with the hole's.
pub fn fill_hole(
    s: &ProgramState,
    problem: &Problem,
    config: &SearchConfig,
    f: &Ident,
    hole: HoleId,
    filler: &Filler,
) -> Option<ProgramState> {
    let mut next = s.clone();
    let name = match filler {
        Filler::Background(g) => g.clone(),
        Filler::Invented(g) => {
            if !s.invented.contains(g) {
                return None;
            }
            g.clone()
        }
        Filler::Fresh => next.invent(),
    };
    if !matches!(filler, Filler::Background(_)) {
        next.graph.add_edge(f, &name).ok()?;
    }
    if let Some(typing) = &next.typing {
        let hole_ty = typing.holes.get(&hole)?.clone();
        let filler_ty = match filler {
            Filler::Background(g) => problem.type_env.get(g)?.instantiate(&mut next.supply),
            _ => typing.invented.get(&name)?.clone(),
        };
        let mut subst = Subst::new();
        subst.unify(&hole_ty, &filler_ty).ok()?;
        let typing = next.typing.as_mut().unwrap();
        typing.holes.remove(&hole);
        typing.apply(&subst);
    }
    let func = next.program.functions.iter_mut().find(|g| g.name == *f)?;
    if !func.body.fill_hole(hole, &Expr::Var(name)) {
        return None;
    }
    target_agrees(&mut next, problem, config).then_some(next)
}

/// The hole-filling rule applied to the first open hole, one successor per
/// legal filler. `limit` caps the number of invented functions.
pub fn specialize(s: &ProgramState, problem: &Problem, config: &SearchConfig, limit: usize) -> Vec<ProgramState> {
    let Some((f, hole)) = s.first_hole() else { return Vec::new() };
    let fresh = (s.invented.len() < limit).then_some(Filler::Fresh);
    let reused = s
        .invented
        .iter()
        .filter(|_| config.reuse)
        .map(|g| Filler::Invented(g.clone()));
    let background = problem.background.iter().map(|g| Filler::Background(g.clone()));
    let fillers: Vec<Filler> = match config.filler_order {
        FillerOrder::FreshFirst => fresh.into_iter().chain(reused).chain(background).collect(),
        FillerOrder::BackgroundFirst => background.chain(reused).chain(fresh).collect(),
    };
    fillers
        .iter()
        .filter_map(|filler| fill_hole(s, problem, config, &f, hole, filler))
        .collect()
}

/// Gives the queued function `f` the body of `template`. `None` when `f`
/// is not waiting for a definition or (linear algorithm) the template's
/// type disagrees with `f`'s.
pub fn define_with(
    s: &ProgramState,
    problem: &Problem,
    config: &SearchConfig,
    f: &Ident,
    template: &Template,
) -> Option<ProgramState> {
    let pos = s.queue.iter().position(|n| n == f)?;
    let mut next = s.clone();
    next.queue.remove(pos);
    let inst = template.instantiate(&mut next.next_hole, &mut next.supply);
    if let Some(typing) = &mut next.typing {
        let mut subst = Subst::new();
        subst.unify(&inst.body_type, typing.invented.get(f)?).ok()?;
        typing.holes.extend(inst.hole_types);
        typing.apply(&subst);
    }
    next.program.functions.push(InducedFunction { name: f.clone(), body: inst.body, template: Some(template.usage()) });
    target_agrees(&mut next, problem, config).then_some(next)
}

fn active_templates<'a>(problem: &'a Problem, config: &SearchConfig, identity: &'a Template) -> Vec<&'a Template> {
    let mut ts: Vec<&Template> = problem.templates.iter().collect();
    if config.identity_template {
        ts.push(identity);
    }
    ts
}

/// The define rule on the head of the queue, one successor per template.
pub fn define(s: &ProgramState, problem: &Problem, config: &SearchConfig) -> Vec<ProgramState> {
    let Some(f) = s.queue.front() else { return Vec::new() };
    let identity = Template::identity();
    active_templates(problem, config, &identity)
        .into_iter()
        .filter_map(|t| define_with(s, problem, config, f, t))
        .collect()
}

/// Holes are filled before anything new is defined.
pub fn expand(s: &ProgramState, problem: &Problem, config: &SearchConfig, limit: usize) -> Vec<ProgramState> {
    if s.first_hole().is_some() {
        specialize(s, problem, config, limit)
    } else if !s.queue.is_empty() {
        define(s, problem, config)
    } else {
        Vec::new()
    }
}

/// Why a complete program was rejected, for diagnostics and tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    Incomplete,
    Untypable,
    GoalMismatch,
    EvaluationFailed,
    PositiveFailed,
    NegativeMatched,
}

/// Checks a complete state against the examples.
pub fn check_detailed(s: &ProgramState, problem: &Problem, config: &SearchConfig) -> Result<(), Rejection> {
    if !s.is_complete() {
        return Err(Rejection::Incomplete);
    }
    let order = s.definition_order();
    let mut supply = s.supply;
    let target_ty = match &s.typing {
        Some(typing) => typing.invented.get(&s.program.target).cloned().ok_or(Rejection::Untypable)?,
        None => {
            let defs = order.iter().map(|n| {
                let f = s.program.get(n).expect("ordered names are defined");
                Definition { name: &f.name, body: &f.body }
            });
            let env = infer_program(&TypeEnv::child_of(problem.type_env.clone()), defs)
                .map_err(|_| Rejection::Untypable)?;
            let mut fresh = env.fresh_supply();
            fresh.avoid(&problem.examples.goal);
            supply = fresh;
            env.get(&s.program.target).ok_or(Rejection::Untypable)?.instantiate(&mut supply)
        }
    };
    let goal = problem.goal_instance(&mut supply);
    Subst::new().unify(&target_ty, &goal).map_err(|_| Rejection::GoalMismatch)?;

    let env = load_program(&problem.runtime, &s.program, &order, config.budget)
        .map_err(|_| Rejection::EvaluationFailed)?;
    let target = &s.program.target;
    for ex in &problem.examples.positives {
        let out = call(&env, target, ex.input.clone(), config.budget).map_err(|_| Rejection::EvaluationFailed)?;
        if out != ex.output {
            return Err(Rejection::PositiveFailed);
        }
    }
    for ex in &problem.examples.negatives {
        let out = call(&env, target, ex.input.clone(), config.budget).map_err(|_| Rejection::EvaluationFailed)?;
        if out == ex.output {
            return Err(Rejection::NegativeMatched);
        }
    }
    Ok(())
}

pub fn check(s: &ProgramState, problem: &Problem, config: &SearchConfig) -> bool {
    check_detailed(s, problem, config).is_ok()
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Solved(InducedProgram),
    Exhausted,
    TimedOut,
}

impl Outcome {
    pub fn program(&self) -> Option<&InducedProgram> {
        match self {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub states_visited: u64,
    pub depth_reached: usize,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub elapsed: Duration,
}

/// Iterative deepening over the number of invented functions.
pub fn prog_search(problem: &Problem, config: &SearchConfig) -> SearchResult {
    let start = Instant::now();
    let deadline = config.timeout.map(|t| start + t);
    let mut stats = SearchStats::default();
    let init = initial_state(problem, config);
    let finish = |outcome, stats| SearchResult { outcome, stats, elapsed: start.elapsed() };
    for depth in 1..=config.max_depth {
        stats.depth_reached = depth;
        let mut stack = vec![init.clone()];
        while let Some(s) = stack.pop() {
            stats.states_visited += 1;
            if stats.states_visited % 256 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return finish(Outcome::TimedOut, stats);
                    }
                }
            }
            if s.is_complete() {
                if check(&s, problem, config) {
                    return finish(Outcome::Solved(s.program), stats);
                }
                continue;
            }
            let mut succ = expand(&s, problem, config, depth);
            succ.reverse();
            stack.extend(succ);
        }
    }
    finish(Outcome::Exhausted, stats)
}

/// Every complete state with at most `limit` functions, in search order.
/// Used by tests that need the whole space rather than the first hit.
pub fn enumerate_complete(problem: &Problem, config: &SearchConfig, limit: usize) -> Vec<ProgramState> {
    let mut out = Vec::new();
    let mut stack = vec![initial_state(problem, config)];
    while let Some(s) = stack.pop() {
        if s.is_complete() {
            out.push(s);
            continue;
        }
        let mut succ = expand(&s, problem, config, limit);
        succ.reverse();
        stack.extend(succ);
    }
    out
}

/// Resolves a definition's line for error messages.
pub fn declaration_line(file: &SourceFile, name: &str) -> Option<usize> {
    file.declarations
        .iter()
        .find(|d: &&Declaration| d.definition().is_some_and(|(n, _)| &**n == name))
        .map(|d| d.line())
}
