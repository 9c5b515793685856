//! TOML run configuration. A file has optional sections; the resolved
//! form has every value filled in and is echoed into each output
//! directory.

use std::path::{Path, PathBuf};

use blersr::analysis::CurveSpec;
use blersr::data::ColumnMap;
use blersr::gp::GpConfig;
use blersr::synth::{OracleParams, SweepSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Input CSV for `fit` and `analyze`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub test_fraction: f64,
    pub drop_zero_bler: bool,
    /// Append the engineered bits-per-channel-use feature.
    pub include_bpcu: bool,
    pub columns: ColumnMap,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            test_fraction: 0.2,
            drop_zero_bler: true,
            include_bpcu: true,
            columns: ColumnMap::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub params: OracleParams,
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub histogram_bins: usize,
    /// Finite-difference step in standardized units.
    pub sensitivity_step: f64,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        AnalyzeSection {
            model: None,
            data: None,
            histogram_bins: 20,
            sensitivity_step: blersr::analysis::DEFAULT_STEP,
        }
    }
}

/// A curve sweep and the model it runs on: `"oracle"` for the synthetic
/// generator, a model directory, or absent to use `--model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(flatten)]
    pub spec: CurveSpec,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    profile: Option<String>,
    data: DataSection,
    gp: toml::Table,
    synth: SynthSection,
    analyze: AnalyzeSection,
    curves: Vec<CurveEntry>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// The single source of randomness for splits, synthesis and search.
    pub seed: u64,
    pub profile: String,
    pub data: DataSection,
    pub gp: GpConfig,
    pub synth: SynthSection,
    pub analyze: AnalyzeSection,
    pub curves: Vec<CurveEntry>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub profile: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let seed = overrides.seed.or(file.seed).unwrap_or(0);
        let profile = overrides
            .profile
            .clone()
            .or(file.profile)
            .unwrap_or_else(|| "small".into());
        let base = GpConfig::profile(&profile).ok_or_else(|| {
            CliError::Config(format!(
                "unknown profile `{profile}` (expected small or paper)"
            ))
        })?;
        let mut table =
            toml::Table::try_from(&base).map_err(|e| CliError::Internal(e.to_string()))?;
        for (k, v) in file.gp {
            // The echoed config carries the resolved seed in [gp] too.
            if k == "seed" && v.as_integer().map(|s| s as u64) != Some(seed) {
                return Err(CliError::Config(
                    "[gp] seed disagrees with the run seed; set it at top level".into(),
                ));
            }
            table.insert(k, v);
        }
        let mut gp: GpConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("[gp]: {e}")))?;
        gp.seed = seed;
        gp.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(file.data.test_fraction > 0.0 && file.data.test_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "test_fraction {} must be in (0, 1)",
                file.data.test_fraction
            )));
        }
        file.synth
            .params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        for c in &file.curves {
            c.spec
                .validate()
                .map_err(|e| CliError::Config(format!("curve `{}`: {e}", c.spec.name)))?;
        }
        Ok(RunConfig {
            seed,
            profile,
            data: file.data,
            gp,
            synth: file.synth,
            analyze: file.analyze,
            curves: file.curves,
        })
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }
}
