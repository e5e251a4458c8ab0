//! Syntactically co-safe LTL: parsing and compilation into co-safety automata
//! annotated with distance-to-accept.

mod compile;
mod dfa;
mod formula;
mod parse;

pub use compile::compile;
pub use dfa::Dfa;
pub use formula::{Expr, Formula, Letter, Props, MAX_PROPS};
pub use parse::parse;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScltlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("negation applied to a non-atomic formula at byte {pos}")]
    NegatedNonAtom { pos: usize },
    #[error("invalid proposition name `{0}`")]
    InvalidPropName(String),
    #[error("proposition `{0}` listed twice")]
    DuplicateProp(String),
    #[error("{count} propositions exceed the limit of {max}")]
    TooManyProps { count: usize, max: usize },
    #[error("atom index {index} outside a proposition set of size {props}")]
    AtomOutOfRange { index: usize, props: usize },
}

/// Parses and compiles in one go.
pub fn compile_str(text: &str, props: &Props) -> Result<Dfa, ScltlError> {
    compile(&parse(text, props)?)
}
