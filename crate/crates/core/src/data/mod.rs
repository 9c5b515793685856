//! BLER samples, feature engineering, target transform and datasets.

mod csv_io;
mod split;
mod standardize;

use std::path::PathBuf;

use ndarray::Array2;

pub use csv_io::{load_csv, read_csv, write_csv, ColumnMap, CsvTable, LoadOptions};
pub use split::split_indices;
pub use standardize::Standardizer;

use crate::expr::DEFAULT_FEATURE_NAMES;
use crate::Scalar;

/// Lower clip applied to BLER before `-ln`; `-ln(1e-12) ~= 27.631`.
pub const BLER_FLOOR: f64 = 1e-12;

/// Name of the engineered bits-per-channel-use column.
pub const BPCU_NAME: &str = "BPCU";

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: {message}")]
    Invalid { row: usize, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
}

/// One simulated link-level record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub snr_tb_db: f64,
    pub mcs_code_rate: f64,
    pub mcs_modulation_index: u32,
    pub v_rel_kmph: f64,
    pub n_sub: u32,
    pub n_dmrs: u32,
    pub flag_urban: u8,
    pub flag_nlos: u8,
    pub bler: f64,
}

impl RawSample {
    /// Checks every field invariant; `bler` is checked only when
    /// `check_bler` is set (prediction inputs may omit it).
    pub fn validate(&self, check_bler: bool) -> Result<(), String> {
        let finite = [self.snr_tb_db, self.mcs_code_rate, self.v_rel_kmph];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("non-finite feature value".into());
        }
        if !(self.mcs_code_rate > 0.0 && self.mcs_code_rate <= 1.0) {
            return Err(format!("code rate {} outside (0, 1]", self.mcs_code_rate));
        }
        if self.mcs_modulation_index == 0 {
            return Err("modulation index must be positive".into());
        }
        if self.v_rel_kmph < 0.0 {
            return Err(format!("negative velocity {}", self.v_rel_kmph));
        }
        if self.n_sub == 0 || self.n_dmrs == 0 {
            return Err("n_sub and n_dmrs must be at least 1".into());
        }
        if self.flag_urban > 1 || self.flag_nlos > 1 {
            return Err("flags must be 0 or 1".into());
        }
        if check_bler && !(0.0..=1.0).contains(&self.bler) {
            return Err(format!("bler {} outside [0, 1]", self.bler));
        }
        Ok(())
    }

    pub fn bpcu(&self) -> f64 {
        self.mcs_modulation_index as f64 * self.mcs_code_rate / self.n_sub as f64
    }

    /// Raw value of a named feature (the eight measured features, `BPCU`
    /// or `BLER`).
    pub fn feature(&self, name: &str) -> Option<f64> {
        let v = match name {
            "SNR_TB_dB" => self.snr_tb_db,
            "MCS_Code_Rate" => self.mcs_code_rate,
            "MCS_Modulation_Index" => self.mcs_modulation_index as f64,
            "v_rel_kmph" => self.v_rel_kmph,
            "N_sub" => self.n_sub as f64,
            "N_DMRS" => self.n_dmrs as f64,
            "Flag_Urban" => self.flag_urban as f64,
            "Flag_NLOS" => self.flag_nlos as f64,
            BPCU_NAME => self.bpcu(),
            "BLER" => self.bler,
            _ => return None,
        };
        Some(v)
    }

    /// Sets a named raw feature; integer-valued fields are rounded.
    pub fn set_feature(&mut self, name: &str, value: f64) -> Result<(), DataError> {
        match name {
            "SNR_TB_dB" => self.snr_tb_db = value,
            "MCS_Code_Rate" => self.mcs_code_rate = value,
            "MCS_Modulation_Index" => self.mcs_modulation_index = value.round() as u32,
            "v_rel_kmph" => self.v_rel_kmph = value,
            "N_sub" => self.n_sub = value.round() as u32,
            "N_DMRS" => self.n_dmrs = value.round() as u32,
            "Flag_Urban" => self.flag_urban = value.round() as u8,
            "Flag_NLOS" => self.flag_nlos = value.round() as u8,
            _ => return Err(DataError::UnknownFeature(name.to_string())),
        }
        Ok(())
    }
}

impl Default for RawSample {
    fn default() -> Self {
        RawSample {
            snr_tb_db: 0.0,
            mcs_code_rate: 0.5,
            mcs_modulation_index: 2,
            v_rel_kmph: 0.0,
            n_sub: 1,
            n_dmrs: 1,
            flag_urban: 0,
            flag_nlos: 0,
            bler: 1.0,
        }
    }
}

/// `modulation_index * code_rate / n_sub`.
pub fn compute_bpcu(modulation_index: u32, code_rate: f64, n_sub: u32) -> Result<f64, DataError> {
    if n_sub == 0 {
        return Err(DataError::Input("n_sub must be at least 1".into()));
    }
    Ok(modulation_index as f64 * code_rate / n_sub as f64)
}

/// `Y = -ln(max(bler, 1e-12))`.
pub fn transform_target(bler: f64) -> Result<f64, DataError> {
    if !(0.0..=1.0).contains(&bler) {
        return Err(DataError::Input(format!("bler {bler} outside [0, 1]")));
    }
    Ok(-bler.max(BLER_FLOOR).ln())
}

/// `BLER = exp(-Y)`, clamped to `[0, 1]`.
pub fn inverse_transform<T: Scalar>(y: T) -> T {
    (-y).exp().max(T::zero()).min(T::one())
}

/// Feature names of the training schema: the eight measured features,
/// optionally followed by `BPCU`.
pub fn schema_names(include_bpcu: bool) -> Vec<String> {
    let mut names: Vec<String> = DEFAULT_FEATURE_NAMES
        .iter()
        .map(|s| s.to_string())
        .collect();
    if include_bpcu {
        names.push(BPCU_NAME.to_string());
    }
    names
}

/// Raw (unstandardized) feature matrix for `names`.
pub fn feature_matrix(samples: &[RawSample], names: &[String]) -> Result<Array2<f64>, DataError> {
    let mut m = Array2::zeros((samples.len(), names.len()));
    for (j, name) in names.iter().enumerate() {
        if RawSample::default().feature(name).is_none() || name == "BLER" {
            return Err(DataError::UnknownFeature(name.clone()));
        }
        for (i, s) in samples.iter().enumerate() {
            m[[i, j]] = s.feature(name).expect("name checked");
        }
    }
    Ok(m)
}

/// Standardized feature matrix with its transformed target.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub x: Array2<T>,
    pub y: Vec<T>,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer<T>,
    pub split_seed: u64,
    /// Feature columns, contiguous, for column-wise evaluation.
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        x: Array2<T>,
        y: Vec<T>,
        feature_names: Vec<String>,
        standardizer: Standardizer<T>,
        split_seed: u64,
    ) -> Result<Self, DataError> {
        if x.nrows() != y.len() {
            return Err(DataError::Input(format!(
                "{} rows but {} targets",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != feature_names.len() || standardizer.len() != feature_names.len() {
            return Err(DataError::Input(
                "feature count mismatch between matrix, names and standardizer".into(),
            ));
        }
        if let Some(((r, c), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(DataError::Invalid {
                row: r,
                message: format!("non-finite feature in column {c}"),
            });
        }
        if let Some(r) = y.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invalid {
                row: r,
                message: "non-finite target".into(),
            });
        }
        let columns = x.columns().into_iter().map(|c| c.to_vec()).collect();
        Ok(Dataset {
            x,
            y,
            feature_names,
            standardizer,
            split_seed,
            columns,
        })
    }

    /// Dataset whose features are used as-is (identity standardizer).
    pub fn from_standardized(
        x: Array2<T>,
        y: Vec<T>,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let std = Standardizer::identity(feature_names.clone());
        Self::new(x, y, feature_names, std, 0)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, DataError> {
        let x = self.x.select(ndarray::Axis(0), rows);
        let y = rows.iter().map(|&r| self.y[r]).collect();
        Self::new(
            x,
            y,
            self.feature_names.clone(),
            self.standardizer.clone(),
            self.split_seed,
        )
    }

    /// Deterministic shuffled partition into `(train, test)`.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Self, Self), DataError> {
        let (train, test) = split_indices(self.len(), test_fraction, seed)?;
        let mut a = self.select_rows(&train)?;
        let mut b = self.select_rows(&test)?;
        a.split_seed = seed;
        b.split_seed = seed;
        Ok((a, b))
    }
}

/// Options for turning raw samples into train/test datasets.
#[derive(Debug, Clone)]
pub struct PrepareOptions {
    pub include_bpcu: bool,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            include_bpcu: true,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Builds features and targets, splits by seed, fits the standardizer on
/// the training part only and applies it to both parts.
pub fn prepare<T: Scalar>(
    samples: &[RawSample],
    opts: &PrepareOptions,
) -> Result<(Dataset<T>, Dataset<T>), DataError> {
    let names = schema_names(opts.include_bpcu);
    let raw = feature_matrix(samples, &names)?;
    let y = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            transform_target(s.bler).map_err(|e| DataError::Invalid {
                row: i,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (train_idx, test_idx) = split_indices(samples.len(), opts.test_fraction, opts.seed)?;
    let raw_train = raw.select(ndarray::Axis(0), &train_idx);
    let raw_test = raw.select(ndarray::Axis(0), &test_idx);
    let std64 = Standardizer::fit(&raw_train, names.clone())?;
    let std: Standardizer<T> = std64.cast();
    let build = |m: &Array2<f64>, idx: &[usize]| -> Result<Dataset<T>, DataError> {
        let z = std64.apply(m)?.mapv(T::lit);
        let ys = idx.iter().map(|&i| T::lit(y[i])).collect();
        Dataset::new(z, ys, names.clone(), std.clone(), opts.seed)
    };
    Ok((build(&raw_train, &train_idx)?, build(&raw_test, &test_idx)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpcu_examples() {
        assert!((compute_bpcu(2, 0.5, 10).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(compute_bpcu(1, 1.0, 1).unwrap(), 1.0);
        assert!((compute_bpcu(6, 0.8, 12).unwrap() - 0.4).abs() < 1e-15);
        assert!(compute_bpcu(6, 0.8, 0).is_err());
    }

    #[test]
    fn target_transform_examples() {
        assert_eq!(transform_target(1.0).unwrap(), 0.0);
        // -ln(1e-12) = 12 ln 10 = 27.631021115928547
        assert!((transform_target(0.0).unwrap() - 27.631021115928547).abs() < 1e-12);
        assert!((transform_target((-2.0f64).exp()).unwrap() - 2.0).abs() < 1e-15);
        assert!(transform_target(1.5).is_err());
        assert!(transform_target(-0.1).is_err());
    }

    #[test]
    fn inverse_transform_examples() {
        assert_eq!(inverse_transform(0.0), 1.0);
        assert_eq!(inverse_transform(-0.1), 1.0);
        for b in [1e-12, 3.7e-9, 1e-4, 0.25, 0.999, 1.0] {
            let back = inverse_transform(transform_target(b).unwrap());
            assert!(((back - b) / b).abs() < 1e-12, "{b} -> {back}");
        }
    }

    #[test]
    fn validation() {
        let ok = RawSample::default();
        assert!(ok.validate(true).is_ok());
        assert!(RawSample { bler: 1.5, ..ok }.validate(true).is_err());
        assert!(RawSample { bler: 1.5, ..ok }.validate(false).is_ok());
        assert!(RawSample { flag_nlos: 2, ..ok }.validate(true).is_err());
        assert!(RawSample { n_dmrs: 0, ..ok }.validate(true).is_err());
        assert!(RawSample {
            mcs_code_rate: 0.0,
            ..ok
        }
        .validate(true)
        .is_err());
    }

    #[test]
    fn bpcu_column_matches_rowwise_formula() {
        let samples: Vec<RawSample> = (0..20)
            .map(|i| RawSample {
                mcs_modulation_index: 1 + (i % 4) * 2,
                mcs_code_rate: 0.1 + 0.04 * i as f64,
                n_sub: 1 + i * 3,
                ..RawSample::default()
            })
            .collect();
        let m = feature_matrix(&samples, &schema_names(true)).unwrap();
        for (i, s) in samples.iter().enumerate() {
            let expected = (s.mcs_modulation_index as f64 * s.mcs_code_rate) / s.n_sub as f64;
            assert_eq!(m[[i, 8]], expected);
        }
    }

    #[test]
    fn prepare_fits_on_train_only() {
        let samples: Vec<RawSample> = (0..50)
            .map(|i| RawSample {
                snr_tb_db: i as f64,
                bler: 0.5f64.powi(i % 10),
                ..RawSample::default()
            })
            .collect();
        let opts = PrepareOptions {
            test_fraction: 0.2,
            seed: 3,
            include_bpcu: true,
        };
        let (train, test) = prepare::<f64>(&samples, &opts).unwrap();
        assert_eq!((train.len(), test.len()), (40, 10));
        assert_eq!(train.feature_count(), 9);
        let col = train.column(0);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-9);
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!((var.sqrt() - 1.0).abs() < 1e-9);
        // Constant columns standardize to zero.
        assert!(train.column(6).iter().all(|&v| v == 0.0));
    }
}
