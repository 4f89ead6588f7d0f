//! Specification front-end: co-safe LTL parsing, Boolean guards, DFA
//! ingestion, and formula-progression translation.

pub mod ast;
pub mod dfa;
pub mod guard;
pub mod parser;
pub mod progress;

pub use ast::Formula;
pub use dfa::{load_dfa, load_dfa_str, Dfa, DfaDoc, DfaEdge, DfaEdgeDoc, DfaError};
pub use guard::{parse_guard, Guard, GuardError};
pub use parser::{parse_scltl, ParseError};
pub use progress::{progress, to_dfa, TranslateError};
