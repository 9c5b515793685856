//! Expression trees over the protected operator set.

mod eval;
mod ops;
mod parse;
mod tree;

pub use eval::{eval_batch, eval_row};
pub use ops::*;
pub use parse::{parse_expression, serialize};
pub use tree::{
    default_feature_names, ExprNode, ExpressionTree, FeatureFrequency, NodeLocator,
    DEFAULT_FEATURE_NAMES,
};

/// Text of the published 158-node model for `Y = -ln(BLER)` over
/// [`DEFAULT_FEATURE_NAMES`].
pub const LISTING_1: &str = include_str!("../../fixtures/listing1.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("lexing error at byte {pos}: {message}")]
    Lex { pos: usize, message: String },
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unbalanced parentheses at byte {pos}")]
    Unbalanced { pos: usize },
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable X{index} outside schema of {features} feature(s)")]
    VariableOutOfRange { index: usize, features: usize },
    #[error("constants must be finite")]
    NonFiniteConstant,
    #[error("row has {found} entries, schema has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite input at row {row}, column {column}")]
    NonFiniteInput { row: usize, column: usize },
    #[error("locator {index} does not address a node of a {size}-node tree")]
    StaleLocator { index: usize, size: usize },
}
