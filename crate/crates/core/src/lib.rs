//! Call-by-need evaluation with the Dynamic GoI Machine.
//!
//! A λ-term is translated into a well-boxed graph; a token walks the graph
//! and rewrites it as soon as its history exposes a redex. A storeless
//! abstract machine over explicit substitutions serves as the reference
//! semantics, and the two are checked against each other step by step.

pub mod conformance;
pub mod corpus;
pub mod cost;
pub mod dgoim;
pub mod graph;
pub mod parse;
pub mod sam;
pub mod sim;
pub mod stats;
pub mod term;
pub mod translate;

pub use parse::{parse, parse_term, ParseError};
pub use stats::{Label, RunStats};
pub use term::{NameSupply, Term, Var};
