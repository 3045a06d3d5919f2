use std::io::Write;
use std::time::Duration;

use funsynth_core::{Algorithm, SearchConfig};
use serde::{Deserialize, Serialize};

use crate::problems::BenchProblem;
use crate::run::{load_problem, run_problem, RunError, RunOutcome, RunReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub reuse: bool,
    pub algorithm: String,
    pub mean_seconds: f64,
    pub std_error: f64,
    pub function_count: usize,
    pub states_visited: u64,
    pub outcome: String,
}

pub fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Linear => "linear",
        Algorithm::Branching => "branching",
    }
}

/// Mean and standard error (sample deviation over root n).
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `repeats` searches and summarises them. The search is deterministic,
/// so once a run times out the remaining repeats are charged the timeout
/// without being run again.
pub fn bench_one(problem: &BenchProblem, config: &SearchConfig, repeats: usize) -> Result<(BenchRow, RunReport), RunError> {
    let name = problem.to_string();
    let loaded = load_problem(&problem.source(), &name, config)?;
    let repeats = repeats.max(1);
    let mut times = Vec::with_capacity(repeats);
    let mut last = run_problem(&loaded, config);
    times.push(last.wall_time.as_secs_f64());
    while times.len() < repeats {
        if last.outcome == RunOutcome::TimedOut {
            let t = config.timeout.unwrap_or(Duration::ZERO).as_secs_f64().max(times[0]);
            times.push(t);
            continue;
        }
        last = run_problem(&loaded, config);
        times.push(last.wall_time.as_secs_f64());
    }
    let (mean_seconds, std_error) = mean_and_std_error(&times);
    // a timed-out run found nothing, which the table records as exhausted
    let outcome = match last.outcome {
        RunOutcome::Solved => "solved",
        RunOutcome::Exhausted | RunOutcome::TimedOut => "exhausted",
    };
    let row = BenchRow {
        problem: name,
        reuse: config.reuse,
        algorithm: algorithm_name(config.algorithm).to_string(),
        mean_seconds,
        std_error,
        function_count: last.function_count,
        states_visited: last.states_visited,
        outcome: outcome.to_string(),
    };
    Ok((row, last))
}

/// Benchmarks with reuse on, then off.
pub fn bench_both(problem: &BenchProblem, config: &SearchConfig, repeats: usize) -> Result<Vec<(BenchRow, RunReport)>, RunError> {
    [true, false]
        .into_iter()
        .map(|reuse| bench_one(problem, &SearchConfig { reuse, ..config.clone() }, repeats))
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<BenchRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
