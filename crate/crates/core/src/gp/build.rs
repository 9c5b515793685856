use rand::Rng;

use crate::expr::{ExprNode, OperatorKind};
use crate::Scalar;

/// Random tree generation over a function set and `n_features` variables
/// plus ephemeral constants.
#[derive(Debug, Clone)]
pub struct TreeBuilder<'a> {
    pub functions: &'a [OperatorKind],
    pub n_features: usize,
    pub constant_range: [f64; 2],
}

impl<'a> TreeBuilder<'a> {
    pub fn new(functions: &'a [OperatorKind], n_features: usize, constant_range: [f64; 2]) -> Self {
        TreeBuilder {
            functions,
            n_features,
            constant_range,
        }
    }

    /// A variable (each with probability `1 / (F + 1)`) or a fresh constant.
    pub fn terminal<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> ExprNode<T> {
        let slot = rng.random_range(0..=self.n_features);
        if slot < self.n_features {
            ExprNode::Variable(slot)
        } else {
            self.constant(rng)
        }
    }

    pub fn constant<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> ExprNode<T> {
        let [lo, hi] = self.constant_range;
        ExprNode::Constant(T::lit(rng.random_range(lo..hi)))
    }

    pub fn operator<R: Rng + ?Sized>(&self, rng: &mut R) -> OperatorKind {
        self.functions[rng.random_range(0..self.functions.len())]
    }

    /// Every path has exactly `depth` levels.
    pub fn full<T: Scalar, R: Rng + ?Sized>(&self, depth: usize, rng: &mut R) -> ExprNode<T> {
        if depth <= 1 {
            return self.terminal(rng);
        }
        let kind = self.operator(rng);
        let children = (0..kind.arity())
            .map(|_| self.full(depth - 1, rng))
            .collect();
        ExprNode::Operator { kind, children }
    }

    /// Depth at most `max_depth`; nodes above level `min_depth` are forced
    /// to be operators so no leaf sits shallower than `min_depth`. Below
    /// that, each node is an operator with probability
    /// `|functions| / (|functions| + F + 1)`.
    pub fn grow<T: Scalar, R: Rng + ?Sized>(
        &self,
        min_depth: usize,
        max_depth: usize,
        rng: &mut R,
    ) -> ExprNode<T> {
        self.grow_at(1, min_depth, max_depth, rng)
    }

    fn grow_at<T: Scalar, R: Rng + ?Sized>(
        &self,
        level: usize,
        min_depth: usize,
        max_depth: usize,
        rng: &mut R,
    ) -> ExprNode<T> {
        if level >= max_depth {
            return self.terminal(rng);
        }
        let force_op = level < min_depth;
        let n_ops = self.functions.len();
        let pick = rng.random_range(0..n_ops + self.n_features + 1);
        if !force_op && pick >= n_ops {
            return self.terminal(rng);
        }
        let kind = self.operator(rng);
        let children = (0..kind.arity())
            .map(|_| self.grow_at(level + 1, min_depth, max_depth, rng))
            .collect();
        ExprNode::Operator { kind, children }
    }
}
