use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use funsynth_cli::bench::{bench_both, write_csv};
use funsynth_cli::problems::BenchProblem;
use funsynth_cli::run::{run_file, RunOutcome};
use funsynth_core::search::FillerOrder;
use funsynth_core::{Algorithm, Budget, SearchConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    Linear,
    Branching,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FillerOrderArg {
    FreshFirst,
    BackgroundFirst,
}

/// Synthesize a modular functional program from a problem file.
#[derive(Parser, Debug)]
#[command(name = "funsynth", version)]
struct Args {
    /// Problem file (templates, background knowledge, examples, goal type).
    #[arg(required_unless_present_any = ["bench", "emit"])]
    file: Option<PathBuf>,

    /// Never fill a hole with a function invented earlier.
    #[arg(long)]
    no_reuse: bool,

    #[arg(long, value_enum, default_value = "branching")]
    algorithm: AlgorithmArg,

    /// Largest number of invented functions to try.
    #[arg(long, default_value_t = 8)]
    max_depth: usize,

    /// Evaluation steps allowed per example.
    #[arg(long, default_value_t = Budget::DEFAULT.max_steps)]
    fuel: u64,

    /// Add the identity template `id(f) = f`.
    #[arg(long)]
    identity_template: bool,

    /// Linear algorithm: prune when the target type cannot match the goal.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    target_type_pruning: bool,

    /// Order in which hole fillers are tried.
    #[arg(long, value_enum, default_value = "fresh-first")]
    filler_order: FillerOrderArg,

    /// Give up after this many seconds.
    #[arg(long, default_value_t = 600)]
    timeout: u64,

    /// Benchmark a generated problem (add<N>, filterUpNum, addRevFilter,
    /// maze<size>, droplasts<noise>) with reuse on and off.
    #[arg(long, value_name = "PROBLEM")]
    bench: Option<BenchProblem>,

    #[arg(long, default_value_t = 5)]
    repeats: usize,

    /// Write benchmark rows to this CSV file instead of stdout.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Print the source of a generated problem and exit.
    #[arg(long, value_name = "PROBLEM")]
    emit: Option<BenchProblem>,
}

impl Args {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            algorithm: match self.algorithm {
                AlgorithmArg::Linear => Algorithm::Linear,
                AlgorithmArg::Branching => Algorithm::Branching,
            },
            reuse: !self.no_reuse,
            max_depth: self.max_depth,
            target_type_pruning: self.target_type_pruning,
            budget: Budget::new(self.fuel),
            identity_template: self.identity_template,
            timeout: Some(Duration::from_secs(self.timeout)),
            filler_order: match self.filler_order {
                FillerOrderArg::FreshFirst => FillerOrder::FreshFirst,
                FillerOrderArg::BackgroundFirst => FillerOrder::BackgroundFirst,
            },
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "exhausted"
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(p) = &args.emit {
        print!("{}", p.source());
        return ExitCode::SUCCESS;
    }
    let config = args.config();
    if let Some(p) = &args.bench {
        let results = match bench_both(p, &config, args.repeats) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        };
        for (row, report) in &results {
            eprintln!("== {} reuse={}", row.problem, row.reuse);
            if let Some(prog) = &report.program {
                eprint!("{prog}");
            }
            eprint!("{}", report.summary());
        }
        let rows: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
        let written = match &args.csv {
            Some(path) => File::create(path)
                .map_err(csv::Error::from)
                .and_then(|f| write_csv(f, &rows)),
            None => write_csv(std::io::stdout().lock(), &rows),
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    }
    let path = args.file.as_ref().expect("clap requires a file");
    match run_file(path, &config) {
        Ok(report) => {
            if let Some(prog) = &report.program {
                print!("{prog}");
            }
            eprint!("{}", report.summary());
            match report.outcome {
                RunOutcome::Solved => ExitCode::SUCCESS,
                RunOutcome::Exhausted | RunOutcome::TimedOut => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
