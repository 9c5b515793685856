use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Axis};

use super::DataError;
use crate::Scalar;

/// Per-feature z-score map `(x - mean) / std` with population std.
/// Zero-variance features keep `std = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer<T> {
    pub names: Vec<String>,
    pub means: Vec<T>,
    pub stds: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(rows: &Array2<T>, names: Vec<String>) -> Result<Self, DataError> {
        let n = rows.nrows();
        if n == 0 {
            return Err(DataError::Input(
                "cannot fit a standardizer on zero rows".into(),
            ));
        }
        if names.len() != rows.ncols() {
            return Err(DataError::Input(format!(
                "{} names for {} columns",
                names.len(),
                rows.ncols()
            )));
        }
        let nt = T::lit(n as f64);
        let mut means = Vec::with_capacity(rows.ncols());
        let mut stds = Vec::with_capacity(rows.ncols());
        for col in rows.axis_iter(Axis(1)) {
            let mean = col.iter().copied().sum::<T>() / nt;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nt;
            let std = var.sqrt();
            means.push(mean);
            stds.push(if std > T::zero() && std.is_finite() {
                std
            } else {
                T::one()
            });
        }
        Ok(Standardizer { names, means, stds })
    }

    pub fn identity(names: Vec<String>) -> Self {
        let n = names.len();
        Standardizer {
            names,
            means: vec![T::zero(); n],
            stds: vec![T::one(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn apply(&self, rows: &Array2<T>) -> Result<Array2<T>, DataError> {
        self.check_width(rows.ncols())?;
        let mut out = rows.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn invert(&self, rows: &Array2<T>) -> Result<Array2<T>, DataError> {
        self.check_width(rows.ncols())?;
        let mut out = rows.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        Ok(out)
    }

    pub fn apply_row(&self, row: &[T]) -> Result<Vec<T>, DataError> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| (v - self.means[j]) / self.stds[j])
            .collect())
    }

    pub fn invert_row(&self, row: &[T]) -> Result<Vec<T>, DataError> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| v * self.stds[j] + self.means[j])
            .collect())
    }

    fn check_width(&self, width: usize) -> Result<(), DataError> {
        if width != self.len() {
            return Err(DataError::Input(format!(
                "{width} columns, standardizer has {}",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Standardizer<U> {
        Standardizer {
            names: self.names.clone(),
            means: self.means.iter().map(|v| U::lit(v.as_f64())).collect(),
            stds: self.stds.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }

    /// `feature,mean,std` lines under a header; values in shortest
    /// round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut s = String::from("feature,mean,std\n");
        for j in 0..self.len() {
            let _ = writeln!(s, "{},{},{}", self.names[j], self.means[j], self.stds[j]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let mut out = Standardizer {
            names: Vec::new(),
            means: Vec::new(),
            stds: Vec::new(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(DataError::Invalid {
                    row: i + 1,
                    message: "expected feature,mean,std".into(),
                });
            }
            let parse = |k: usize, col: &str| -> Result<T, DataError> {
                rec[k]
                    .trim()
                    .parse::<T>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| DataError::Parse {
                        row: i + 1,
                        column: col.to_string(),
                        value: rec[k].to_string(),
                    })
            };
            let mean = parse(1, "mean")?;
            let std = parse(2, "std")?;
            if std <= T::zero() {
                return Err(DataError::Invalid {
                    row: i + 1,
                    message: "std must be positive".into(),
                });
            }
            out.names.push(rec[0].trim().to_string());
            out.means.push(mean);
            out.stds.push(std);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        std::fs::write(path, self.to_text()).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }
}
