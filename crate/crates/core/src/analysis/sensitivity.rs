use super::{AnalysisError, PolyModel};
use crate::expr::ExpressionTree;
use crate::Scalar;

/// Finite-difference step in standardized units.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Anything that maps a standardized feature row to a `Y`-domain value.
pub trait YModel<T> {
    fn feature_count(&self) -> usize;
    fn predict_y(&self, row: &[T]) -> T;
}

impl<T: Scalar> YModel<T> for ExpressionTree<T> {
    fn feature_count(&self) -> usize {
        ExpressionTree::feature_count(self)
    }

    fn predict_y(&self, row: &[T]) -> T {
        self.root().eval_unchecked(row)
    }
}

impl<T: Scalar> YModel<T> for PolyModel<T> {
    fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    fn predict_y(&self, row: &[T]) -> T {
        self.predict_row(row)
    }
}

/// `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn central_difference<T: Scalar, M: YModel<T> + ?Sized>(
    model: &M,
    base_row: &[T],
    feature: usize,
    h: T,
) -> Result<T, AnalysisError> {
    if base_row.len() != model.feature_count() {
        return Err(AnalysisError::LengthMismatch {
            left: base_row.len(),
            right: model.feature_count(),
        });
    }
    if feature >= base_row.len() {
        return Err(AnalysisError::FeatureIndex {
            index: feature,
            features: base_row.len(),
        });
    }
    if !(h > T::zero()) || !h.is_finite() {
        return Err(AnalysisError::Model(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut row = base_row.to_vec();
    row[feature] = base_row[feature] + h;
    let up = model.predict_y(&row);
    row[feature] = base_row[feature] - h;
    let down = model.predict_y(&row);
    Ok((up - down) / (h + h))
}

/// Central differences for every feature.
pub fn gradient<T: Scalar, M: YModel<T> + ?Sized>(
    model: &M,
    base_row: &[T],
    h: T,
) -> Result<Vec<T>, AnalysisError> {
    (0..base_row.len())
        .map(|j| central_difference(model, base_row, j, h))
        .collect()
}
