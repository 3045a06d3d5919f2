use std::path::Path;
use std::time::Duration;

use funsynth_core::search::ProblemError;
use funsynth_core::{parse_source, prog_search, Outcome, Problem, SearchConfig};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Problem { path: String, source: ProblemError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Solved,
    Exhausted,
    TimedOut,
}

impl RunOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            RunOutcome::Solved => "solved",
            RunOutcome::Exhausted => "exhausted",
            RunOutcome::TimedOut => "timeout",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    /// Rendered program, one `name = body` line per function.
    pub program: Option<String>,
    pub function_count: usize,
    pub states_visited: u64,
    pub wall_time: Duration,
    pub depth_reached: usize,
    pub outcome: RunOutcome,
}

impl RunReport {
    /// The summary printed to stderr after a run.
    pub fn summary(&self) -> String {
        format!(
            "outcome: {}\nfunctions: {}\nstates visited: {}\ndepth reached: {}\nwall time: {:.6}s\n",
            self.outcome.as_str(),
            self.function_count,
            self.states_visited,
            self.depth_reached,
            self.wall_time.as_secs_f64(),
        )
    }
}

pub fn load_problem(src: &str, path: &str, config: &SearchConfig) -> Result<Problem, RunError> {
    let wrap = |source: ProblemError| RunError::Problem { path: path.to_string(), source };
    let file = parse_source(src, path).map_err(|e| wrap(e.into()))?;
    Problem::from_source(&file, config.budget).map_err(wrap)
}

pub fn run_problem(problem: &Problem, config: &SearchConfig) -> RunReport {
    let result = prog_search(problem, config);
    let (program, function_count, outcome) = match &result.outcome {
        Outcome::Solved(p) => {
            let text = p.render().expect("solved programs are complete and acyclic");
            (Some(text), p.len(), RunOutcome::Solved)
        }
        Outcome::Exhausted => (None, 0, RunOutcome::Exhausted),
        Outcome::TimedOut => (None, 0, RunOutcome::TimedOut),
    };
    RunReport {
        program,
        function_count,
        states_visited: result.stats.states_visited,
        wall_time: result.elapsed,
        depth_reached: result.stats.depth_reached,
        outcome,
    }
}

pub fn run_source(src: &str, path: &str, config: &SearchConfig) -> Result<RunReport, RunError> {
    let problem = load_problem(src, path, config)?;
    Ok(run_problem(&problem, config))
}

pub fn run_file(path: &Path, config: &SearchConfig) -> Result<RunReport, RunError> {
    let name = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: name.clone(), source })?;
    run_source(&src, &name, config)
}
