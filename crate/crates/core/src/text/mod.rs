//! Text formats: the `.ad` source language and Graphviz export.

mod dot;
mod lexer;
mod parser;
mod writer;

pub use dot::{export_dot, export_dot_path, DotError};
pub use lexer::{tokenize, LexError, SourceSpan, Tok, Token};
pub use parser::{parse, parse_expr, ParseError};
pub use writer::serialize;
