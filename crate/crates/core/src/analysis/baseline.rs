use ndarray::{Array2, ArrayView2};

use super::AnalysisError;
use crate::Scalar;

/// Least-squares polynomial in the standardized features. Each term is a
/// multiset of feature indices (`[]` is the intercept, `[0, 0, 3]` is
/// `x0^2 * x3`).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyModel<T> {
    pub feature_names: Vec<String>,
    pub terms: Vec<Vec<usize>>,
    pub coefs: Vec<T>,
}

/// All monomials of total degree `1..=degree` in `n` variables, graded
/// then lexicographic. The intercept is not included.
pub fn monomial_terms(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn extend(
        start: usize,
        n: usize,
        left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            extend(j, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 1..=degree {
        extend(0, n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

fn term_value(term: &[usize], row: &[f64]) -> f64 {
    term.iter().map(|&j| row[j]).product()
}

impl<T: Scalar> PolyModel<T> {
    /// Number of basis terms including the intercept.
    pub fn basis_size(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        let r: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
        let s: f64 = self
            .terms
            .iter()
            .zip(&self.coefs)
            .map(|(t, c)| c.as_f64() * term_value(t, &r))
            .sum();
        T::lit(s)
    }

    pub fn predict(&self, rows: ArrayView2<'_, T>) -> Result<Vec<T>, AnalysisError> {
        if rows.ncols() != self.feature_names.len() {
            return Err(AnalysisError::LengthMismatch {
                left: rows.ncols(),
                right: self.feature_names.len(),
            });
        }
        Ok(rows
            .rows()
            .into_iter()
            .map(|r| self.predict_row(&r.to_vec()))
            .collect())
    }
}

/// Ordinary least squares on `[1, x]`.
pub fn fit_linear_baseline<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    feature_names: &[String],
) -> Result<PolyModel<T>, AnalysisError> {
    fit_polynomial_baseline(x, y, feature_names, 1)
}

/// Least squares on the intercept plus every monomial up to `degree`,
/// solved through the normal equations with a Cholesky factorization in
/// `f64`. A tiny ridge `1e-10 * max(1, mean diag(A^T A))` keeps the
/// factorization stable when columns are nearly collinear.
pub fn fit_polynomial_baseline<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    feature_names: &[String],
    degree: usize,
) -> Result<PolyModel<T>, AnalysisError> {
    let (n, f) = x.dim();
    if y.len() != n {
        return Err(AnalysisError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if feature_names.len() != f {
        return Err(AnalysisError::LengthMismatch {
            left: f,
            right: feature_names.len(),
        });
    }
    let mut terms = vec![Vec::new()];
    terms.extend(monomial_terms(f, degree));
    let p = terms.len();
    if n <= p {
        return Err(AnalysisError::Underdetermined {
            samples: n,
            terms: p,
        });
    }

    let mut design = Array2::<f64>::zeros((n, p));
    for (i, row) in x.rows().into_iter().enumerate() {
        let r: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
        for (k, t) in terms.iter().enumerate() {
            design[[i, k]] = term_value(t, &r);
        }
    }
    let yv: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let mut gram = design.t().dot(&design);
    let rhs = design.t().dot(&ndarray::Array1::from(yv));

    let mean_diag = (0..p).map(|k| gram[[k, k]]).sum::<f64>() / p as f64;
    let jitter = 1e-10 * mean_diag.max(1.0);
    for k in 0..p {
        gram[[k, k]] += jitter;
    }
    let coefs = cholesky_solve(gram, rhs.to_vec())?;
    Ok(PolyModel {
        feature_names: feature_names.to_vec(),
        terms,
        coefs: coefs.into_iter().map(T::lit).collect(),
    })
}

/// Solves `A x = b` for symmetric positive definite `A`.
fn cholesky_solve(mut a: Array2<f64>, mut b: Vec<f64>) -> Result<Vec<f64>, AnalysisError> {
    let p = b.len();
    // In-place lower factor.
    for j in 0..p {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(AnalysisError::RankDeficient);
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in j + 1..p {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = s / d;
        }
    }
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= a[[i, k]] * b[k];
        }
        b[i] = s / a[[i, i]];
    }
    for i in (0..p).rev() {
        let mut s = b[i];
        for k in i + 1..p {
            s -= a[[k, i]] * b[k];
        }
        b[i] = s / a[[i, i]];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("X{i}")).collect()
    }

    #[test]
    fn basis_sizes() {
        // C(9 + 3, 3) - 1 monomials.
        assert_eq!(monomial_terms(9, 3).len(), 219);
        assert_eq!(monomial_terms(8, 3).len(), 164);
        assert_eq!(
            monomial_terms(2, 2),
            vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn linear_recovers_exact_plane() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 3.0], [-1.0, 2.0], [0.5, -0.5]];
        let y: Vec<f64> = x
            .rows()
            .into_iter()
            .map(|r| 1.5 + 2.0 * r[0] - 0.25 * r[1])
            .collect();
        let m = fit_linear_baseline(x.view(), &y, &names(2)).unwrap();
        for (c, e) in m.coefs.iter().zip([1.5, 2.0, -0.25]) {
            assert!((c - e).abs() < 1e-8, "{:?}", m.coefs);
        }
        let p = m.predict(x.view()).unwrap();
        for (a, b) in p.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn five_point_closed_form() {
        // x = 0..4, y = (1, 3, 2, 5, 4): Sxy = 8, Sxx = 10, so slope 0.8 and
        // intercept 3 - 0.8 * 2 = 1.4. The ridge jitter shifts both by ~1e-9.
        let x = Array2::from_shape_fn((5, 1), |(i, _)| i as f64);
        let m = fit_linear_baseline(x.view(), &[1.0, 3.0, 2.0, 5.0, 4.0], &names(1)).unwrap();
        assert!(
            (m.coefs[0] - 1.4).abs() < 1e-8 && (m.coefs[1] - 0.8).abs() < 1e-8,
            "{:?}",
            m.coefs
        );
    }

    #[test]
    fn linear_misfits_quadratic() {
        let x = Array2::from_shape_fn((21, 1), |(i, _)| -1.0 + 0.1 * i as f64);
        let y: Vec<f64> = x.column(0).iter().map(|t| t * t).collect();
        let lin = fit_linear_baseline(x.view(), &y, &names(1)).unwrap();
        let quad = fit_polynomial_baseline(x.view(), &y, &names(1), 2).unwrap();
        let r_lin = crate::analysis::r_squared(&y, &lin.predict(x.view()).unwrap()).unwrap();
        let r_quad = crate::analysis::r_squared(&y, &quad.predict(x.view()).unwrap()).unwrap();
        assert!(r_lin < 0.5);
        assert!((r_quad - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cubic_recovers_cubic() {
        let pts: Vec<f64> = (0..30).map(|i| -1.5 + 0.1 * i as f64).collect();
        let x = Array2::from_shape_fn((30, 1), |(i, _)| pts[i]);
        let y: Vec<f64> = pts
            .iter()
            .map(|t| 0.3 - t + 0.5 * t * t - 2.0 * t * t * t)
            .collect();
        let m = fit_polynomial_baseline(x.view(), &y, &names(1), 3).unwrap();
        assert_eq!(m.basis_size(), 4);
        assert_eq!(m.degree(), 3);
        for (c, e) in m.coefs.iter().zip([0.3, -1.0, 0.5, -2.0]) {
            assert!((c - e).abs() < 1e-6, "{:?}", m.coefs);
        }
    }

    #[test]
    fn rejects_too_few_rows() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let err = fit_polynomial_baseline(x.view(), &[1.0, 2.0], &names(2), 1).unwrap_err();
        assert_eq!(
            err,
            AnalysisError::Underdetermined {
                samples: 2,
                terms: 3
            }
        );
    }

    #[test]
    fn duplicate_column_is_handled_by_jitter() {
        let x = Array2::from_shape_fn((10, 2), |(i, _)| i as f64);
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = fit_linear_baseline(x.view(), &y, &names(2)).unwrap();
        let p = m.predict(x.view()).unwrap();
        for (a, b) in p.iter().zip(&y) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn all_zero_design_is_rank_deficient_free() {
        // Jitter keeps a zero column solvable; its coefficient is zero.
        let x = Array2::<f64>::zeros((5, 1));
        let m = fit_linear_baseline(x.view(), &[1.0, 2.0, 3.0, 4.0, 5.0], &names(1)).unwrap();
        assert!((m.coefs[0] - 3.0).abs() < 1e-6);
        assert!(m.coefs[1].abs() < 1e-6);
    }

    #[test]
    fn nan_input_is_reported() {
        let mut x = Array2::<f64>::zeros((5, 1));
        x[[0, 0]] = f64::NAN;
        assert_eq!(
            fit_linear_baseline(x.view(), &[1.0; 5], &names(1)).unwrap_err(),
            AnalysisError::RankDeficient
        );
    }
}
