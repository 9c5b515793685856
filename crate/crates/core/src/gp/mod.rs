//! Genetic-programming search over protected expression trees.
//!
//! Fitness is the mean squared error on the transformed target plus a
//! parsimony penalty `lambda * node_count`. Every random decision is drawn
//! from a generator keyed by `(seed, generation, individual index)`, so a
//! run is reproducible regardless of how many worker threads evaluate it.

mod build;
mod config;
mod engine;
mod select;
mod variation;

pub use build::TreeBuilder;
pub use config::{GpConfig, WorkerCount};
pub use engine::{describe, evolve, init_population, EvolutionLog, GenerationRecord};
pub use select::{compare_individuals, tournament_select, tournament_select_index};
pub use variation::{crossover, hoist_mutation, point_mutation, subtree_mutation, SizeLimits};

use crate::data::Dataset;
use crate::expr::{ExprError, ExprNode, ExpressionTree};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GpError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("population is empty")]
    EmptyPopulation,
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A tree with its cached error and penalized fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub tree: ExpressionTree<T>,
    pub mse: T,
    /// `mse + lambda * node_count`.
    pub fitness: T,
    pub node_count: usize,
}

impl<T: Scalar> Individual<T> {
    pub fn evaluate(
        tree: ExpressionTree<T>,
        data: &Dataset<T>,
        lambda: f64,
    ) -> Result<Self, GpError> {
        let (mse, fitness) = fitness(&tree, data, lambda)?;
        let node_count = tree.node_count();
        Ok(Individual {
            tree,
            mse,
            fitness,
            node_count,
        })
    }
}

/// Mean squared error of `node` over the dataset. Overflowing sums
/// saturate to the largest finite value.
pub(crate) fn mse_of<T: Scalar>(node: &ExprNode<T>, data: &Dataset<T>) -> T {
    let n = data.len();
    let pred = node.eval_columns(n, &|j| data.column(j));
    let sum = pred
        .iter()
        .zip(&data.y)
        .map(|(&p, &y)| (p - y) * (p - y))
        .sum::<T>();
    let mse = sum / T::lit(n as f64);
    if mse.is_finite() {
        mse
    } else {
        T::max_value()
    }
}

/// Returns `(mse, mse + lambda * node_count)` on the dataset's target.
pub fn fitness<T: Scalar>(
    tree: &ExpressionTree<T>,
    data: &Dataset<T>,
    lambda: f64,
) -> Result<(T, T), GpError> {
    if data.is_empty() {
        return Err(GpError::EmptyDataset);
    }
    if tree.feature_count() != data.feature_count() {
        return Err(GpError::Schema(format!(
            "tree has {} features, dataset has {}",
            tree.feature_count(),
            data.feature_count()
        )));
    }
    let mse = mse_of(tree.root(), data);
    Ok((mse, penalized(mse, lambda, tree.node_count())))
}

#[inline]
pub(crate) fn penalized<T: Scalar>(mse: T, lambda: f64, nodes: usize) -> T {
    mse + T::lit(lambda) * T::lit(nodes as f64)
}
