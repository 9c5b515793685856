//! Symbolic regression of block-error-rate (BLER) models.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] expression trees over a numerically protected operator set,
//!   a text parser/serializer and row/batch evaluation;
//! * [`data`] CSV ingestion, the `Y = -ln(BLER)` target transform,
//!   standardization and train/test splitting;
//! * [`synth`] a physical oracle for generating ground-truth datasets;
//! * [`gp`] the genetic-programming search with a parsimony penalty;
//! * [`analysis`] metrics, baselines, sensitivities, curve sweeps and
//!   feature-frequency tables.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

pub mod analysis;
pub mod data;
pub mod expr;
pub mod gp;
mod scalar;
pub mod synth;

pub use scalar::Scalar;

pub type Tree = expr::ExpressionTree<f64>;
pub type Tree32 = expr::ExpressionTree<f32>;
pub type Node = expr::ExprNode<f64>;
pub type Dataset = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Standardizer = data::Standardizer<f64>;
pub type Individual = gp::Individual<f64>;
pub type PolyModel = analysis::PolyModel<f64>;
