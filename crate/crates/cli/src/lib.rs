//! Command-line front end: running problem files and the benchmark suite.

pub mod bench;
pub mod problems;
pub mod run;
