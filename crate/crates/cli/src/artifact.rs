//! On-disk model: `expression.txt`, `standardizer.csv` and
//! `manifest.toml` in one directory.

use std::path::Path;

use blersr::expr::{parse_expression, serialize};
use blersr::{Standardizer, Tree};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const EXPRESSION_FILE: &str = "expression.txt";
pub const STANDARDIZER_FILE: &str = "standardizer.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub include_bpcu: bool,
    pub seed: u64,
    pub profile: String,
    pub node_count: usize,
    pub operator_count: usize,
    pub depth: usize,
    pub train_mse: f64,
    pub train_fitness: f64,
    pub parsimony_lambda: f64,
}

#[derive(Debug, Clone)]
pub struct ModelArtifact {
    pub tree: Tree,
    pub standardizer: Standardizer,
    pub manifest: Manifest,
}

impl ModelArtifact {
    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        crate::write_file(&dir.join(EXPRESSION_FILE), &(serialize(&self.tree) + "\n"))?;
        crate::write_file(&dir.join(STANDARDIZER_FILE), &self.standardizer.to_text())?;
        let manifest =
            toml::to_string(&self.manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        crate::write_file(&dir.join(MANIFEST_FILE), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| {
                CliError::Data(format!("cannot read {}: {e}", dir.join(name).display()))
            })
        };
        let manifest: Manifest = toml::from_str(&read(MANIFEST_FILE)?)
            .map_err(|e| CliError::Data(format!("{MANIFEST_FILE}: {e}")))?;
        let tree = parse_expression(read(EXPRESSION_FILE)?.trim(), &manifest.feature_names)
            .map_err(|e| CliError::Data(format!("{EXPRESSION_FILE}: {e}")))?;
        let standardizer = Standardizer::from_text(&read(STANDARDIZER_FILE)?)
            .map_err(|e| CliError::Data(format!("{STANDARDIZER_FILE}: {e}")))?;
        if standardizer.names != manifest.feature_names {
            return Err(CliError::Data(
                "standardizer features do not match the manifest schema".into(),
            ));
        }
        Ok(ModelArtifact {
            tree,
            standardizer,
            manifest,
        })
    }
}
