//! Supported models of ground normal logic programs.
//!
//! The central piece is [`transform`], which rewrites a program so that its
//! stable models, projected back onto the original atoms, are exactly the
//! supported models of the input. Around it sit a parser and printer, a
//! brute-force reference [`semantics`], a stable-model [`search`], Clark's
//! [`completion`] with DIMACS output, pluggable solver [`backend`]s and a
//! [`bench`] harness.

pub mod backend;
pub mod bench;
pub mod completion;
pub mod parser;
pub mod process;
pub mod program;
pub mod search;
pub mod semantics;
pub mod transform;

pub use parser::{parse_program, parse_program_with, print_program, ParseError, ParseOptions};
pub use program::{AtomId, Interpretation, Program, Rule, SymbolTable};
pub use semantics::ModelSet;
pub use transform::{transform, TransformResult};
