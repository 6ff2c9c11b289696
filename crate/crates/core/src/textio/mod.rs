//! Concrete syntax for programs and a coordinate file format for matrices.
//!
//! Programs:
//!
//! ```text
//! // comments run to the end of the line
//! matrix A : n x n over bool;
//! in for { X := pickany(X + A * X) } (ones(A), diag(ones(A)))
//! ```
//!
//! Matrices (1-based indices, omitted entries are the ring's zero):
//!
//! ```text
//! matrix 2 2 int_min_plus
//! % comment
//! 1 1 0
//! 2 1 3
//! ```

mod lexer;
mod matrix;
mod parser;
mod printer;

use thiserror::Error;

use crate::ir::{DialectError, Expr, Schema};
use crate::semiring::SemiringId;
use crate::typecheck::check_fn;

pub use matrix::{parse_matrix, print_matrix};
pub use parser::{parse_program, parse_schema_expr};
pub use printer::{print_expr, print_program};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("line {line}: {message}")]
    Matrix { line: usize, message: String },
    #[error(transparent)]
    Dialect(#[from] DialectError),
}

impl TextError {
    pub(crate) fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        TextError::Parse { line, col, message: message.into() }
    }
}

/// Ring of an expression under a scope, without checking shapes. Used to
/// elaborate and print the `+`/`-` matrix sugar.
pub(crate) struct RingScope<'a> {
    schema: &'a Schema,
    stack: Vec<(String, Option<SemiringId>)>,
}

impl<'a> RingScope<'a> {
    pub(crate) fn new(schema: &'a Schema) -> Self {
        RingScope { schema, stack: Vec::new() }
    }

    pub(crate) fn lookup(&self, name: &str) -> Option<SemiringId> {
        match self.stack.iter().rev().find(|(n, _)| n == name) {
            Some((_, r)) => *r,
            None => self.schema.get(name).map(|t| t.ring),
        }
    }

    pub(crate) fn depth(&self) -> usize {
        self.stack.len()
    }

    pub(crate) fn push(&mut self, name: &str, ring: Option<SemiringId>) {
        self.stack.push((name.to_string(), ring));
    }

    pub(crate) fn truncate(&mut self, depth: usize) {
        self.stack.truncate(depth);
    }

    pub(crate) fn ring_of(&mut self, e: &Expr) -> Option<SemiringId> {
        match e {
            Expr::Var(n) => self.lookup(n),
            Expr::Transpose(a) | Expr::Ones(a) | Expr::Diag(a) | Expr::PickAny(a) | Expr::MatMul(a, _) => {
                self.ring_of(a)
            }
            Expr::Apply { func, .. } => check_fn(func).ok(),
            Expr::Let { name, bound, body } => {
                let r = self.ring_of(bound);
                let d = self.depth();
                self.push(name, r);
                let out = self.ring_of(body);
                self.truncate(d);
                out
            }
            Expr::ForCanonical { inits, .. } | Expr::ForCounted { inits, .. } => {
                inits.first().and_then(|i| self.ring_of(i))
            }
        }
    }
}
