//! Front end for compact specifications: lexing, parsing, name resolution
//! and pretty-printing.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod resolve;

use thiserror::Error;

pub use ast::*;
pub use lexer::{is_keyword, tokenize, Keyword, Pos, Spanned, Token};
pub use parser::{parse_compact, parse_tokens};
pub use pretty::{pretty_formula, pretty_print};
pub use resolve::{derived_state_names, resolve, RefBinding, ResolvedCompact};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{pos}: illegal character {ch:?}")]
    IllegalCharacter { pos: Pos, ch: char },
    #[error("{pos}: expected {expected}, found {found}")]
    Syntax {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: unknown norm type `{word}`")]
    UnknownNormType { pos: Pos, word: String },
    #[error("norm `{norm}` declares state `{state}` twice")]
    DuplicateState { norm: String, state: String },
    #[error("norm `{name}` declared twice")]
    DuplicateNormName { name: String },
    #[error("norm `{norm}` must declare `created` as its first state")]
    MissingCreatedState { norm: String },
    #[error("{norm}.{state}: reference to unknown norm state `{target}:{target_state}`")]
    UnresolvedNormRef {
        norm: String,
        state: String,
        target: String,
        target_state: String,
    },
    #[error("{norm}.{state}: time variable `{var}` is used before any label binds it")]
    UnboundTimeVariable {
        norm: String,
        state: String,
        var: String,
    },
    #[error("{norm}.{state}: `now` is reserved and cannot be bound by a label")]
    ReservedTimeVariable { norm: String, state: String },
    #[error("{norm}.{state}: reference to `{target}` passes {found} parameters, expected {expected}")]
    ArityMismatch {
        norm: String,
        state: String,
        target: String,
        expected: usize,
        found: usize,
    },
}
