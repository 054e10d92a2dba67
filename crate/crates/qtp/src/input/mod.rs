//! The `.qtp` input format: quivers, formulas, morphisms and proof scripts.
//!
//! ```text
//! quiver K {
//!   vertex 1
//!   vertex 2
//!   arrow a : 1 -> 2
//!   arrow b : 1 -> 2
//! }
//!
//! formula P on K {
//!   matrix a rows(n, 1) cols(n) {
//!     block 0 0 = I
//!   }
//!   matrix b rows(1, n) cols(n) {
//!     block 1 0 = I
//!   }
//! }
//! ```
//!
//! Unlisted grid cells are zero. In a morphism, a vertex without a `map`
//! gets the zero map. A vertex that no arrow touches takes its dimension
//! from `dim v = e`, default 0.

mod ast;
mod build;
mod lex;
mod parse;
mod print;

pub use ast::*;
pub use build::build_library;
pub use parse::parse_syntax;
pub use print::{dimexpr, reference, serialize_document};

use qtp_core::verify::Library;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("{loc}: {message}")]
    Syntax { loc: Loc, message: String },
    #[error("{loc}: {entity}: {message}")]
    Semantic { loc: Loc, entity: String, message: String },
}

impl InputError {
    pub(crate) fn syntax(loc: Loc, message: impl Into<String>) -> Self {
        InputError::Syntax { loc, message: message.into() }
    }

    pub(crate) fn semantic(loc: Loc, entity: impl Into<String>, message: impl Into<String>) -> Self {
        InputError::Semantic { loc, entity: entity.into(), message: message.into() }
    }

    pub fn loc(&self) -> Loc {
        match self {
            InputError::Syntax { loc, .. } | InputError::Semantic { loc, .. } => *loc,
        }
    }
}

/// Parses and validates a document.
pub fn parse_document(text: &str) -> Result<Document, InputError> {
    let d = parse_syntax(text)?;
    build_library(&d)?;
    Ok(d)
}

/// Parses, validates and resolves a document.
pub fn load(text: &str) -> Result<(Document, Library), InputError> {
    let d = parse_syntax(text)?;
    let lib = build_library(&d)?;
    Ok((d, lib))
}
