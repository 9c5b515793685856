//! Model diagnostics: fit metrics, residuals, polynomial baselines,
//! sensitivities, response curves and feature-frequency tables.

mod baseline;
mod curves;
mod frequency;
mod metrics;
mod sensitivity;

pub use baseline::{fit_linear_baseline, fit_polynomial_baseline, monomial_terms, PolyModel};
pub use curves::{
    sweep_curve, CurvePoint, CurveResult, CurveSpec, Monotonicity, OracleModel, MONOTONE_EPS,
};
pub use frequency::{feature_frequency_report, FrequencyReport};
pub use metrics::{
    log10_residuals, metrics_report, mse, r_squared, residual_stats, Histogram, MetricsReport,
    ResidualStats,
};
pub use sensitivity::{central_difference, gradient, YModel, DEFAULT_STEP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("need at least two samples, got {0}")]
    TooShort(usize),
    #[error("target is constant; R^2 is undefined")]
    ConstantTarget,
    #[error("need more samples ({samples}) than basis terms ({terms})")]
    Underdetermined { samples: usize, terms: usize },
    #[error("normal equations are rank deficient")]
    RankDeficient,
    #[error("feature index {index} out of range for {features} features")]
    FeatureIndex { index: usize, features: usize },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("{0}")]
    Model(String),
}
