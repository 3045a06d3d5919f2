//! Synthesis of modular functional programs from input-output examples.
//!
//! Programs are built by giving invented functions template bodies (a
//! higher-order combinator applied to holes) and filling the holes with
//! background functions, earlier inventions or fresh inventions.

pub mod interpreter;
pub mod parser;
pub mod search;
pub mod syntax;
pub mod templates;
pub mod types;

pub use interpreter::{Budget, Value};
pub use parser::{parse_source, SourceFile};
pub use search::{prog_search, Algorithm, Outcome, Problem, SearchConfig, SearchResult};
pub use syntax::{Expr, Ident, InducedProgram};
