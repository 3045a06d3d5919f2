mod common;

use funsynth_cli::problems::BenchProblem;
use funsynth_cli::run::{load_problem, run_problem, RunOutcome};
use funsynth_core::SearchConfig;

fn solve(p: &BenchProblem, reuse: bool) -> (funsynth_core::Problem, String) {
    let config = SearchConfig { reuse, ..SearchConfig::default() };
    let problem = load_problem(&p.source(), &p.to_string(), &config).unwrap();
    let report = run_problem(&problem, &config);
    assert_eq!(report.outcome, RunOutcome::Solved, "{p}");
    (problem, report.program.unwrap())
}

#[test]
fn canonical_form_ignores_names_and_order() {
    let a = "g3 = BK_add1.BK_add1\ng2 = g3.g3\ntarget = g2.g2\n";
    let b = "target = h.h\nh = k.k\nk = add1.add1\n";
    assert_eq!(common::canonical(a), common::canonical(b));
    let c = "target = h.k\nh = k.k\nk = add1.add1\n";
    assert_ne!(common::canonical(a), common::canonical(c));
}

#[test]
fn tree_detection() {
    assert!(common::is_tree("g2 = a.a\ng3 = a.a\ntarget = g2.g3\n"));
    assert!(!common::is_tree("g2 = a.a\ntarget = g2.g2\n"));
}

#[test]
fn verifier_rejects_wrong_programs() {
    let p = BenchProblem::AddN(2);
    let problem = load_problem(&p.source(), "add2", &SearchConfig::default()).unwrap();
    assert!(common::verify(&problem, "target = BK_add1.BK_add1\n").is_ok());
    assert!(common::verify(&problem, "target = map BK_add1\n").unwrap_err().contains("goal mismatch"));
    assert!(common::verify(&problem, "g2 = BK_add1.BK_add1\ntarget = g2.g2\n").is_err());
    assert!(common::verify(&problem, "target = g2.g2\ng2 = target.BK_add1\n").is_err());
}

#[test]
fn returned_programs_satisfy_their_examples() {
    let problems = [
        BenchProblem::AddN(3),
        BenchProblem::AddN(5),
        BenchProblem::AddN(8),
        BenchProblem::FilterUpNum,
        BenchProblem::Maze { size: 4, blocked: vec![] },
        BenchProblem::Maze { size: 3, blocked: vec![(1, 1)] },
        BenchProblem::DropLasts { noise: 0 },
    ];
    for p in &problems {
        let (problem, text) = solve(p, true);
        common::verify(&problem, &text).unwrap_or_else(|e| panic!("{p}: {e}\n{text}"));
    }
}

#[test]
fn programs_without_reuse_are_trees() {
    for p in [BenchProblem::AddN(4), BenchProblem::AddN(6), BenchProblem::FilterUpNum] {
        let (problem, text) = solve(&p, false);
        assert!(common::is_tree(&text), "{p}:\n{text}");
        common::verify(&problem, &text).unwrap();
    }
}

#[test]
fn search_matches_brute_force_minimum() {
    for p in [BenchProblem::AddN(2), BenchProblem::AddN(3), BenchProblem::AddN(4), BenchProblem::AddN(6)] {
        let (problem, text) = solve(&p, true);
        let found = common::program_lines(&text).len();
        assert_eq!(common::brute_force_minimum(&problem, false, found), Some(found), "{p}");
    }
}

#[test]
fn blocked_maze_detours() {
    // the direct diagonal through (1, 1) is blocked
    let p = BenchProblem::Maze { size: 3, blocked: vec![(1, 1)] };
    let (problem, text) = solve(&p, true);
    common::verify(&problem, &text).unwrap();
    let open = BenchProblem::Maze { size: 3, blocked: vec![] };
    let (_, open_text) = solve(&open, true);
    assert_ne!(text, open_text);
}
