use ndarray::ArrayView2;

use super::{ExprError, ExprNode, ExpressionTree};
use crate::Scalar;

impl<T: Scalar> ExprNode<T> {
    /// Evaluates without validating `row`; variable indices must be in
    /// bounds.
    #[inline]
    pub fn eval_unchecked(&self, row: &[T]) -> T {
        match self {
            ExprNode::Constant(c) => *c,
            ExprNode::Variable(i) => row[*i],
            ExprNode::Operator { kind, children } => match children.as_slice() {
                [a] => kind.apply1(a.eval_unchecked(row)),
                [a, b] => kind.apply2(a.eval_unchecked(row), b.eval_unchecked(row)),
                _ => unreachable!("arity checked at construction"),
            },
        }
    }

    /// Column-at-a-time evaluation over `n` rows, where `column(j)` yields
    /// feature `j`. Each element goes through exactly the same scalar
    /// operations as [`eval_unchecked`](Self::eval_unchecked).
    pub fn eval_columns<'c, C>(&self, n: usize, column: &C) -> Vec<T>
    where
        C: Fn(usize) -> &'c [T],
        T: 'c,
    {
        match self {
            ExprNode::Constant(c) => vec![*c; n],
            ExprNode::Variable(i) => column(*i).to_vec(),
            ExprNode::Operator { kind, children } => match children.as_slice() {
                [a] => {
                    let mut out = a.eval_columns(n, column);
                    for v in &mut out {
                        *v = kind.apply1(*v);
                    }
                    out
                }
                [a, b] => {
                    let mut out = a.eval_columns(n, column);
                    let rhs = b.eval_columns(n, column);
                    for (v, r) in out.iter_mut().zip(rhs) {
                        *v = kind.apply2(*v, r);
                    }
                    out
                }
                _ => unreachable!("arity checked at construction"),
            },
        }
    }
}

fn check_row<T: Scalar>(
    tree: &ExpressionTree<T>,
    row: &[T],
    row_index: usize,
) -> Result<(), ExprError> {
    if row.len() != tree.feature_count() {
        return Err(ExprError::Dimension {
            expected: tree.feature_count(),
            found: row.len(),
        });
    }
    if let Some(column) = row.iter().position(|v| !v.is_finite()) {
        return Err(ExprError::NonFiniteInput {
            row: row_index,
            column,
        });
    }
    Ok(())
}

/// Evaluates the tree on one feature row. The result is finite for every
/// finite row.
pub fn eval_row<T: Scalar>(tree: &ExpressionTree<T>, row: &[T]) -> Result<T, ExprError> {
    check_row(tree, row, 0)?;
    if let Some(i) = tree.root().max_variable_index() {
        if i >= row.len() {
            return Err(ExprError::VariableOutOfRange {
                index: i,
                features: row.len(),
            });
        }
    }
    Ok(tree.root().eval_unchecked(row))
}

/// Evaluates every row of an `N x F` matrix; bit-identical to calling
/// [`eval_row`] on each row.
pub fn eval_batch<T: Scalar>(
    tree: &ExpressionTree<T>,
    rows: ArrayView2<'_, T>,
) -> Result<Vec<T>, ExprError> {
    let (n, f) = rows.dim();
    if f != tree.feature_count() {
        return Err(ExprError::Dimension {
            expected: tree.feature_count(),
            found: f,
        });
    }
    for (r, row) in rows.outer_iter().enumerate() {
        if let Some(column) = row.iter().position(|v| !v.is_finite()) {
            return Err(ExprError::NonFiniteInput { row: r, column });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let columns: Vec<Vec<T>> = rows.columns().into_iter().map(|c| c.to_vec()).collect();
    Ok(tree.root().eval_columns(n, &|j| columns[j].as_slice()))
}

impl<T: Scalar> ExpressionTree<T> {
    pub fn eval_row(&self, row: &[T]) -> Result<T, ExprError> {
        eval_row(self, row)
    }

    pub fn eval_batch(&self, rows: ArrayView2<'_, T>) -> Result<Vec<T>, ExprError> {
        eval_batch(self, rows)
    }
}
