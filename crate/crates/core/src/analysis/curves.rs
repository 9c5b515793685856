use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, YModel};
use crate::data::{inverse_transform, RawSample, Standardizer, BPCU_NAME};
use crate::synth::{clean_bler, OracleParams};

/// Tolerance on successive differences when classifying a curve.
pub const MONOTONE_EPS: f64 = 1e-12;

/// One swept feature against fixed values for the rest, all in raw units.
/// Features that are neither swept nor fixed take their
/// [`RawSample::default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(default)]
    pub name: String,
    pub feature: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let probe = RawSample::default();
        if self.feature == BPCU_NAME
            || probe.feature(&self.feature).is_none()
            || self.feature == "BLER"
        {
            return Err(AnalysisError::UnknownFeature(self.feature.clone()));
        }
        for name in self.fixed.keys() {
            if name == BPCU_NAME || name == "BLER" || probe.feature(name).is_none() {
                return Err(AnalysisError::UnknownFeature(name.clone()));
            }
        }
        if self.fixed.contains_key(&self.feature) {
            return Err(AnalysisError::Model(format!(
                "`{}` is both swept and fixed",
                self.feature
            )));
        }
        if self.values.is_empty() {
            return Err(AnalysisError::Empty);
        }
        if self
            .values
            .iter()
            .chain(self.fixed.values())
            .any(|v| !v.is_finite())
        {
            return Err(AnalysisError::Model("curve values must be finite".into()));
        }
        Ok(())
    }

    /// Raw sample for one sweep value.
    pub fn sample_at(&self, value: f64) -> Result<RawSample, AnalysisError> {
        let mut s = RawSample::default();
        for (name, v) in &self.fixed {
            s.set_feature(name, *v)
                .map_err(|_| AnalysisError::UnknownFeature(name.clone()))?;
        }
        s.set_feature(&self.feature, value)
            .map_err(|_| AnalysisError::UnknownFeature(self.feature.clone()))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Constant,
    NonIncreasing,
    NonDecreasing,
    Neither,
}

impl Monotonicity {
    pub fn classify(values: &[f64], eps: f64) -> Self {
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if diffs.iter().all(|d| d.abs() <= eps) {
            Monotonicity::Constant
        } else if diffs.iter().all(|&d| d <= eps) {
            Monotonicity::NonIncreasing
        } else if diffs.iter().all(|&d| d >= -eps) {
            Monotonicity::NonDecreasing
        } else {
            Monotonicity::Neither
        }
    }

    /// A constant curve is both nonincreasing and nondecreasing.
    pub fn is_nonincreasing(self) -> bool {
        matches!(self, Monotonicity::Constant | Monotonicity::NonIncreasing)
    }

    pub fn is_nondecreasing(self) -> bool {
        matches!(self, Monotonicity::Constant | Monotonicity::NonDecreasing)
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Constant => "constant",
            Monotonicity::NonIncreasing => "nonincreasing",
            Monotonicity::NonDecreasing => "nondecreasing",
            Monotonicity::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub value: f64,
    pub y: f64,
    pub bler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub name: String,
    pub feature: String,
    pub points: Vec<CurvePoint>,
    pub monotonicity: Monotonicity,
}

impl CurveResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},Y,BLER\n", self.feature);
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.value, p.y, p.bler));
        }
        out
    }
}

/// Evaluates `model` along the sweep. Raw rows are built from the curve definition,
/// mapped through `standardizer` (whose names define the feature order,
/// so an engineered `BPCU` column is recomputed per point) and the
/// prediction is returned in both domains.
pub fn sweep_curve<M: YModel<f64> + ?Sized>(
    model: &M,
    standardizer: &Standardizer<f64>,
    spec: &CurveSpec,
) -> Result<CurveResult, AnalysisError> {
    spec.validate()?;
    if standardizer.len() != model.feature_count() {
        return Err(AnalysisError::LengthMismatch {
            left: standardizer.len(),
            right: model.feature_count(),
        });
    }
    let mut points = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let sample = spec.sample_at(value)?;
        let raw = standardizer
            .names
            .iter()
            .map(|n| {
                sample
                    .feature(n)
                    .ok_or_else(|| AnalysisError::UnknownFeature(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let z = standardizer
            .apply_row(&raw)
            .map_err(|e| AnalysisError::Model(e.to_string()))?;
        let y = model.predict_y(&z);
        points.push(CurvePoint {
            value,
            y,
            bler: inverse_transform(y),
        });
    }
    let blers: Vec<f64> = points.iter().map(|p| p.bler).collect();
    Ok(CurveResult {
        name: spec.name.clone(),
        feature: spec.feature.clone(),
        monotonicity: Monotonicity::classify(&blers, MONOTONE_EPS),
        points,
    })
}

/// The synthetic generator viewed as a `Y`-domain model over standardized
/// rows. Integer-valued features are rounded when the row is mapped back
/// to raw units.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleModel {
    pub params: OracleParams,
    pub standardizer: Standardizer<f64>,
}

impl OracleModel {
    pub fn new(
        params: OracleParams,
        standardizer: Standardizer<f64>,
    ) -> Result<Self, AnalysisError> {
        params
            .validate()
            .map_err(|e| AnalysisError::Model(e.to_string()))?;
        let probe = RawSample::default();
        for n in &standardizer.names {
            if probe.feature(n).is_none() || n == "BLER" {
                return Err(AnalysisError::UnknownFeature(n.clone()));
            }
        }
        Ok(OracleModel {
            params,
            standardizer,
        })
    }

    fn raw_sample(&self, row: &[f64]) -> RawSample {
        let raw = self
            .standardizer
            .invert_row(row)
            .expect("width checked by caller");
        let mut s = RawSample::default();
        for (name, v) in self.standardizer.names.iter().zip(raw) {
            if name != BPCU_NAME {
                s.set_feature(name, v)
                    .expect("names checked at construction");
            }
        }
        s
    }
}

impl YModel<f64> for OracleModel {
    fn feature_count(&self) -> usize {
        self.standardizer.len()
    }

    /// Rows that map to an invalid sample predict `Y = 0` (BLER 1).
    fn predict_y(&self, row: &[f64]) -> f64 {
        match clean_bler(&self.params, &self.raw_sample(row)) {
            Ok(b) => -b.ln(),
            Err(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema_names;
    use crate::expr::{parse_expression, LISTING_1};

    fn snr_spec() -> CurveSpec {
        CurveSpec {
            name: "waterfall".into(),
            feature: "SNR_TB_dB".into(),
            values: (-10..=15).map(f64::from).collect(),
            fixed: BTreeMap::from([("v_rel_kmph".into(), 60.0), ("N_DMRS".into(), 2.0)]),
        }
    }

    fn oracle(floor: f64) -> OracleModel {
        let params = OracleParams {
            floor_coeff: floor,
            ..OracleParams::default()
        };
        OracleModel::new(params, Standardizer::identity(schema_names(true))).unwrap()
    }

    #[test]
    fn classify() {
        assert_eq!(
            Monotonicity::classify(&[1.0, 1.0], MONOTONE_EPS),
            Monotonicity::Constant
        );
        assert_eq!(
            Monotonicity::classify(&[3.0, 2.0, 2.0], MONOTONE_EPS),
            Monotonicity::NonIncreasing
        );
        assert_eq!(
            Monotonicity::classify(&[1.0, 2.0, 2.0], MONOTONE_EPS),
            Monotonicity::NonDecreasing
        );
        assert_eq!(
            Monotonicity::classify(&[1.0, 2.0, 1.0], MONOTONE_EPS),
            Monotonicity::Neither
        );
        assert_eq!(
            Monotonicity::classify(&[0.5], MONOTONE_EPS),
            Monotonicity::Constant
        );
        assert_eq!(Monotonicity::NonIncreasing.to_string(), "nonincreasing");
    }

    #[test]
    fn oracle_snr_sweep_is_nonincreasing() {
        let r = sweep_curve(
            &oracle(0.0),
            &Standardizer::identity(schema_names(true)),
            &snr_spec(),
        )
        .unwrap();
        assert_eq!(r.points.len(), 26);
        assert_eq!(r.monotonicity, Monotonicity::NonIncreasing);
        for p in &r.points {
            assert!((0.0..=1.0).contains(&p.bler));
        }
    }

    #[test]
    fn oracle_velocity_sweep_is_nondecreasing() {
        let spec = CurveSpec {
            name: "mobility".into(),
            feature: "v_rel_kmph".into(),
            values: (0..=12).map(|i| 20.0 * i as f64).collect(),
            fixed: BTreeMap::from([("SNR_TB_dB".into(), 10.0)]),
        };
        let r = sweep_curve(
            &oracle(1e-6),
            &Standardizer::identity(schema_names(true)),
            &spec,
        )
        .unwrap();
        assert_eq!(r.monotonicity, Monotonicity::NonDecreasing);
    }

    #[test]
    fn oracle_under_fitted_standardizer() {
        // Non-identity scaling must not change the curve.
        let names = schema_names(false);
        let std = Standardizer {
            names: names.clone(),
            means: vec![3.0; 8],
            stds: vec![2.0; 8],
        };
        let model = OracleModel::new(OracleParams::default(), std.clone()).unwrap();
        let a = sweep_curve(&model, &std, &snr_spec()).unwrap();
        let b = sweep_curve(
            &oracle(0.0),
            &Standardizer::identity(schema_names(true)),
            &snr_spec(),
        )
        .unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.bler - q.bler).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_is_pure() {
        let tree =
            parse_expression::<f64>(LISTING_1, &crate::expr::default_feature_names()).unwrap();
        let std = Standardizer::identity(crate::expr::default_feature_names());
        let spec = CurveSpec {
            name: "listing".into(),
            feature: "SNR_TB_dB".into(),
            values: (0..=15).map(f64::from).collect(),
            fixed: BTreeMap::from([
                ("MCS_Modulation_Index".into(), 6.0),
                ("MCS_Code_Rate".into(), 0.8),
            ]),
        };
        let a = sweep_curve(&tree, &std, &spec).unwrap();
        let b = sweep_curve(&tree, &std, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 16);
        assert!(a.to_csv().starts_with("SNR_TB_dB,Y,BLER\n"));
    }

    #[test]
    fn spec_errors() {
        let mut s = snr_spec();
        s.feature = "Speed".into();
        assert_eq!(
            s.validate(),
            Err(AnalysisError::UnknownFeature("Speed".into()))
        );
        let mut s = snr_spec();
        s.fixed.insert("SNR_TB_dB".into(), 1.0);
        assert!(matches!(s.validate(), Err(AnalysisError::Model(_))));
        let mut s = snr_spec();
        s.values.push(f64::NAN);
        assert!(s.validate().is_err());
        let mut s = snr_spec();
        s.feature = BPCU_NAME.into();
        assert!(s.validate().is_err());
    }
}
