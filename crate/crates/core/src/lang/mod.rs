//! The policy language: `Begin ... End` blocks of `Field: value` lines.
//!
//! ```text
//! Begin
//! Name: "GrantBobAccessToGuestArea"
//! Effect: allow
//! Principal: "Bob"
//! Action: read
//! Space: recreation_area Or small_bedroom_2
//! Condition: UserInside: "second_floor_all"
//!            And TODAfter: 0900
//! End
//! ```
//!
//! `Not` binds tighter than `And`, which binds tighter than `Or`; both binary
//! operators associate to the left. `#` starts a line comment.

mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

use std::fmt;

pub use ast::{Action, CondExpr, Effect, PolicyAst, SpaceExpr, TimeOfDay};
pub use parser::parse_policies;
pub use printer::pretty_print;
pub(crate) use printer::quote;
pub use validate::{validate_against_registry, Diagnostic, RefSite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

/// A positioned parse failure. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ErrorKind, line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "error",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}
