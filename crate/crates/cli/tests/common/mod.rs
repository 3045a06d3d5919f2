//! Oracles shared by the integration tests and the acceptance harness.
//!
//! Everything here works from the rendered program text, not from the
//! search's own data structures, so a bug in the search cannot hide itself.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use funsynth_core::interpreter::{call, RuntimeEnv};
use funsynth_core::parser::parse_expr;
use funsynth_core::search::Problem;
use funsynth_core::syntax::Notation;
use funsynth_core::types::{infer_program, Definition, Scheme, Subst, TypeEnv};
use funsynth_core::{Budget, Expr, Ident};

/// `(name, body)` pairs of a rendered program, in the order printed.
pub fn program_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (n, b) = l.split_once(" = ").unwrap_or_else(|| panic!("bad program line {l:?}"));
            (n.trim().to_string(), b.trim().to_string())
        })
        .collect()
}

fn words(body: &str) -> Vec<String> {
    body.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Canonical text of a program up to renaming of the invented functions.
/// Invented names are renumbered in breadth-first order from `target`,
/// `BK_` prefixes are dropped, and lines are sorted.
pub fn canonical(text: &str) -> String {
    let lines = program_lines(text);
    let defs: HashMap<&str, &str> = lines.iter().map(|(n, b)| (n.as_str(), b.as_str())).collect();
    let mut rename: HashMap<String, String> = HashMap::new();
    let mut queue = std::collections::VecDeque::from(["target".to_string()]);
    rename.insert("target".into(), "F0".into());
    while let Some(n) = queue.pop_front() {
        let Some(body) = defs.get(n.as_str()) else { continue };
        for w in words(body) {
            if defs.contains_key(w.as_str()) && !rename.contains_key(&w) {
                rename.insert(w.clone(), format!("F{}", rename.len()));
                queue.push_back(w);
            }
        }
    }
    let rewrite = |s: &str| -> String {
        let mut out = String::new();
        let mut word = String::new();
        let flush = |word: &mut String, out: &mut String| {
            if !word.is_empty() {
                let w = rename.get(word.as_str()).cloned().unwrap_or_else(|| {
                    word.strip_prefix("BK_").unwrap_or(word).to_string()
                });
                out.push_str(&w);
                word.clear();
            }
        };
        for c in s.chars() {
            if c.is_alphanumeric() || c == '_' {
                word.push(c);
            } else {
                flush(&mut word, &mut out);
                out.push(c);
            }
        }
        flush(&mut word, &mut out);
        out
    };
    let mut out: Vec<String> = lines.iter().map(|(n, b)| format!("{} = {}", rewrite(n), rewrite(b))).collect();
    out.sort();
    out.join("; ")
}

/// Invented names used by each invented function.
pub fn uses(text: &str) -> BTreeMap<String, BTreeSet<String>> {
    let lines = program_lines(text);
    let names: BTreeSet<String> = lines.iter().map(|(n, _)| n.clone()).collect();
    lines
        .iter()
        .map(|(n, b)| (n.clone(), words(b).into_iter().filter(|w| names.contains(w)).collect()))
        .collect()
}

/// With reuse off, every invented function other than the target has
/// exactly one user.
pub fn is_tree(text: &str) -> bool {
    let lines = program_lines(text);
    let mut users: BTreeMap<&str, usize> = lines.iter().map(|(n, _)| (n.as_str(), 0)).collect();
    for (_, body) in &lines {
        for w in words(body) {
            if let Some(c) = users.get_mut(w.as_str()) {
                *c += 1;
            }
        }
    }
    users.iter().all(|(n, c)| if *n == "target" { *c == 0 } else { *c == 1 })
}

/// Program lines with every function after the functions it uses.
pub fn dependency_order(text: &str) -> Option<Vec<(String, String)>> {
    if !acyclic(text) {
        return None;
    }
    let lines = program_lines(text);
    let u = uses(text);
    let mut placed: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < lines.len() {
        for (n, b) in &lines {
            if !placed.contains(n) && u[n].iter().all(|g| placed.contains(g)) {
                placed.insert(n.clone());
                out.push((n.clone(), b.clone()));
            }
        }
    }
    Some(out)
}

/// Re-parses the rendered program, type checks it against the goal and
/// runs it on every example.
pub fn verify(problem: &Problem, text: &str) -> Result<(), String> {
    let lines = dependency_order(text).ok_or("cyclic program")?;
    if !lines.iter().any(|(n, _)| n == "target") {
        return Err("no target".into());
    }
    let parsed: Vec<(Ident, Expr)> = lines
        .iter()
        .map(|(n, b)| parse_expr(b).map(|e| (Ident::from(n.as_str()), e)).map_err(|e| format!("{n}: {e}")))
        .collect::<Result<_, _>>()?;

    let env = TypeEnv::child_of(problem.type_env.clone());
    let typed = infer_program(&env, parsed.iter().map(|(name, body)| Definition { name, body }))
        .map_err(|e| format!("untypable: {e}"))?;
    let mut supply = typed.fresh_supply();
    supply.avoid(&problem.examples.goal);
    let target_ty = typed.get("target").ok_or("target untyped")?.instantiate(&mut supply);
    let goal = Scheme::closed(problem.examples.goal.clone()).instantiate(&mut supply);
    Subst::new().unify(&target_ty, &goal).map_err(|e| format!("goal mismatch: {e}"))?;

    let budget = Budget::DEFAULT;
    let mut rt = RuntimeEnv::child_of(Arc::clone(&problem.runtime));
    for (name, body) in &parsed {
        rt.define(name, body, budget).map_err(|e| format!("{name}: {e}"))?;
    }
    for ex in &problem.examples.positives {
        let out = call(&rt, "target", ex.input.clone(), budget).map_err(|e| e.to_string())?;
        if out != ex.output {
            return Err(format!("positive {} gave {out}, wanted {}", ex.input, ex.output));
        }
    }
    for ex in &problem.examples.negatives {
        let out = call(&rt, "target", ex.input.clone(), budget).map_err(|e| e.to_string())?;
        if out == ex.output {
            return Err(format!("negative {} => {} is produced", ex.input, ex.output));
        }
    }
    Ok(())
}

/// Body texts a function `me` can have, given the names it may mention.
fn bodies(problem: &Problem, identity: bool, names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for t in &problem.templates {
        let mut args: Vec<Vec<String>> = vec![Vec::new()];
        for _ in 0..t.hole_count {
            args = args
                .into_iter()
                .flat_map(|a| {
                    names.iter().map(move |n| {
                        let mut a = a.clone();
                        a.push(n.clone());
                        a
                    })
                })
                .collect();
        }
        for a in args {
            out.push(match t.notation {
                Notation::Infix => format!("{}.{}", a[0], a[1]),
                Notation::Prefix => format!("{} {}", t.name, a.join(" ")),
                Notation::Bare => a[0].clone(),
            });
        }
    }
    if identity {
        out.extend(names.iter().cloned());
    }
    out
}

fn reaches_all(text: &str) -> bool {
    let u = uses(text);
    let mut seen = BTreeSet::from(["target".to_string()]);
    let mut stack = vec!["target".to_string()];
    while let Some(n) = stack.pop() {
        for g in &u[&n] {
            if seen.insert(g.clone()) {
                stack.push(g.clone());
            }
        }
    }
    seen.len() == u.len()
}

fn acyclic(text: &str) -> bool {
    let u = uses(text);
    fn visit<'a>(n: &'a str, u: &'a BTreeMap<String, BTreeSet<String>>, on: &mut Vec<&'a str>, done: &mut BTreeSet<&'a str>) -> bool {
        if on.contains(&n) {
            return false;
        }
        if done.contains(n) {
            return true;
        }
        on.push(n);
        let ok = u[n].iter().all(|g| visit(g, u, on, done));
        on.pop();
        done.insert(n);
        ok
    }
    let mut done = BTreeSet::new();
    u.keys().all(|k| visit(k, &u, &mut Vec::new(), &mut done))
}

/// Every program with exactly `k` functions (all reachable from the target,
/// acyclic) built from the problem's templates and background functions.
pub fn all_programs(problem: &Problem, identity: bool, k: usize) -> Vec<String> {
    let invented: Vec<String> = (0..k).map(|i| if i == 0 { "target".into() } else { format!("f{i}") }).collect();
    let per_function: Vec<Vec<String>> = invented
        .iter()
        .map(|me| {
            let names: Vec<String> = problem
                .background
                .iter()
                .map(|b| b.to_string())
                .chain(invented.iter().filter(|n| *n != me).cloned())
                .collect();
            bodies(problem, identity, &names)
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    'outer: loop {
        let text: String = invented
            .iter()
            .zip(&choice)
            .enumerate()
            .map(|(i, (n, &c))| format!("{n} = {}\n", per_function[i][c]))
            .collect();
        if reaches_all(&text) && acyclic(&text) {
            out.push(text);
        }
        for i in (0..k).rev() {
            choice[i] += 1;
            if choice[i] < per_function[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    out
}

/// The fewest functions any solution needs, searching up to `max_k`.
pub fn brute_force_minimum(problem: &Problem, identity: bool, max_k: usize) -> Option<usize> {
    (1..=max_k).find(|&k| all_programs(problem, identity, k).iter().any(|p| verify(problem, p).is_ok()))
}
