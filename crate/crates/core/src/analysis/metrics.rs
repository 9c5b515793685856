use super::AnalysisError;
use crate::data::{inverse_transform, BLER_FLOOR};
use crate::Scalar;

fn check_pair<T>(y_true: &[T], y_pred: &[T]) -> Result<(), AnalysisError> {
    if y_true.len() != y_pred.len() {
        return Err(AnalysisError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(AnalysisError::Empty);
    }
    Ok(())
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<T, AnalysisError> {
    check_pair(y_true, y_pred)?;
    if y_true.len() < 2 {
        return Err(AnalysisError::TooShort(y_true.len()));
    }
    let n = T::lit(y_true.len() as f64);
    let mean = y_true.iter().copied().sum::<T>() / n;
    let ss_tot = y_true.iter().map(|&y| (y - mean) * (y - mean)).sum::<T>();
    if ss_tot == T::zero() {
        return Err(AnalysisError::ConstantTarget);
    }
    let ss_res = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| (y - p) * (y - p))
        .sum::<T>();
    Ok(T::one() - ss_res / ss_tot)
}

pub fn mse<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<T, AnalysisError> {
    check_pair(y_true, y_pred)?;
    let sum = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| (y - p) * (y - p))
        .sum::<T>();
    Ok(sum / T::lit(y_true.len() as f64))
}

/// Fit quality in the transformed (`Y`) and original (BLER) domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub r2_y: f64,
    pub mse_y: f64,
    pub r2_bler: f64,
    pub mse_bler: f64,
    pub n_test: usize,
}

/// Both BLER series are obtained through [`inverse_transform`], so
/// predictions are clamped to `[0, 1]` before scoring.
pub fn metrics_report<T: Scalar>(
    y_true: &[T],
    y_pred: &[T],
) -> Result<MetricsReport, AnalysisError> {
    let bt: Vec<T> = y_true.iter().map(|&y| inverse_transform(y)).collect();
    let bp: Vec<T> = y_pred.iter().map(|&y| inverse_transform(y)).collect();
    Ok(MetricsReport {
        r2_y: r_squared(y_true, y_pred)?.as_f64(),
        mse_y: mse(y_true, y_pred)?.as_f64(),
        r2_bler: r_squared(&bt, &bp)?.as_f64(),
        mse_bler: mse(&bt, &bp)?.as_f64(),
        n_test: y_true.len(),
    })
}

impl MetricsReport {
    /// `key = value` lines; reals always carry a decimal point.
    pub fn to_text(&self) -> String {
        format!(
            "n_test = {}\nr2_y = {:?}\nmse_y = {:?}\nr2_bler = {:?}\nmse_bler = {:?}\n",
            self.n_test, self.r2_y, self.mse_y, self.r2_bler, self.mse_bler
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed.
    pub fn new(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if values.is_empty() {
            lo = 0.0;
            hi = 0.0;
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }
}

/// Distribution of `log10(pred) - log10(true)`, both clipped below at 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStats {
    pub mean_log10: f64,
    /// Population standard deviation.
    pub std_log10: f64,
    pub histogram: Histogram,
}

pub fn log10_residuals<T: Scalar>(
    bler_true: &[T],
    bler_pred: &[T],
) -> Result<Vec<f64>, AnalysisError> {
    check_pair(bler_true, bler_pred)?;
    Ok(bler_true
        .iter()
        .zip(bler_pred)
        .map(|(&t, &p)| p.as_f64().max(BLER_FLOOR).log10() - t.as_f64().max(BLER_FLOOR).log10())
        .collect())
}

pub fn residual_stats<T: Scalar>(
    bler_true: &[T],
    bler_pred: &[T],
    bins: usize,
) -> Result<ResidualStats, AnalysisError> {
    let r = log10_residuals(bler_true, bler_pred)?;
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(ResidualStats {
        mean_log10: mean,
        std_log10: var.sqrt(),
        histogram: Histogram::new(&r, bins),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::transform_target;

    #[test]
    fn r2_examples() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // SS_res = 1, SS_tot = 2
        assert_eq!(r_squared(&y, &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(
            r_squared(&[1.0, 1.0], &[1.0, 2.0]),
            Err(AnalysisError::ConstantTarget)
        );
        assert!(matches!(
            r_squared(&y, &[1.0]),
            Err(AnalysisError::LengthMismatch { .. })
        ));
        assert_eq!(r_squared(&[1.0], &[1.0]), Err(AnalysisError::TooShort(1)));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        // (1 + 4) / 2
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
        assert_eq!(mse::<f64>(&[], &[]), Err(AnalysisError::Empty));
    }

    #[test]
    fn residual_examples() {
        let t = [0.1, 0.01, 1e-5, 0.05];
        let same = residual_stats(&t, &t, 10).unwrap();
        assert_eq!((same.mean_log10, same.std_log10), (0.0, 0.0));
        let scaled: Vec<f64> = t.iter().map(|v| v * 10.0).collect();
        let s = residual_stats(&t, &scaled, 10).unwrap();
        assert!((s.mean_log10 - 1.0).abs() < 1e-12);
        assert!(s.std_log10 < 1e-12);
        assert_eq!(s.histogram.counts.iter().sum::<usize>(), 4);
    }

    #[test]
    fn residual_mixed_fixture() {
        let t = [0.5, 1e-3, 1e-13, 0.2];
        let p = [0.25, 4e-3, 1e-12, 0.2];
        // Scripted loop oracle.
        let mut r = Vec::new();
        for i in 0..4 {
            let a: f64 = if p[i] < 1e-12 { 1e-12 } else { p[i] };
            let b: f64 = if t[i] < 1e-12 { 1e-12 } else { t[i] };
            r.push(a.log10() - b.log10());
        }
        let mean = (r[0] + r[1] + r[2] + r[3]) / 4.0;
        let mut var = 0.0;
        for v in &r {
            var += (v - mean) * (v - mean);
        }
        let std = (var / 4.0).sqrt();
        let s = residual_stats(&t, &p, 4).unwrap();
        assert!((s.mean_log10 - mean).abs() < 1e-14);
        assert!((s.std_log10 - std).abs() < 1e-14);
        assert_eq!(
            residual_stats::<f64>(&[], &[], 4).map(|_| ()),
            Err(AnalysisError::Empty)
        );
    }

    #[test]
    fn bler_domain_r2_matches_independent_loop() {
        let bler: Vec<f64> = (0..50).map(|i| 10f64.powf(-(i as f64) / 8.0)).collect();
        let y: Vec<f64> = bler.iter().map(|&b| transform_target(b).unwrap()).collect();
        let pred: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.3 * ((i as f64) * 1.3).sin() - 0.05)
            .collect();
        let report = metrics_report(&y, &pred).unwrap();
        let mut bt = Vec::new();
        let mut bp = Vec::new();
        for i in 0..y.len() {
            bt.push((-y[i]).exp());
            let p = (-pred[i]).exp();
            bp.push(if p > 1.0 { 1.0 } else { p });
        }
        let m = bt.iter().sum::<f64>() / bt.len() as f64;
        let mut ss_tot = 0.0;
        let mut ss_res = 0.0;
        for i in 0..bt.len() {
            ss_tot += (bt[i] - m) * (bt[i] - m);
            ss_res += (bt[i] - bp[i]) * (bt[i] - bp[i]);
        }
        assert!((report.r2_bler - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
        assert!(report.r2_y <= 1.0 && report.mse_y >= 0.0 && report.mse_bler >= 0.0);
    }

    #[test]
    fn histogram_of_constant_values() {
        let h = Histogram::new(&[2.0, 2.0], 3);
        assert_eq!(h.counts.iter().sum::<usize>(), 2);
        assert_eq!(h.edges.len(), 4);
    }
}
