//! Runtime configuration: size limits, tolerances, output options. A JSON
//! config file is optional; every field has a baked-in default, and the
//! path can come from the `GTENSOR_CONFIG` environment variable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exponents::{DecomposeConfig, OmegaTable};
use crate::{Error, Result};

pub const CONFIG_ENV_VAR: &str = "GTENSOR_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Optional exponent-table file; the shipped defaults otherwise.
    pub omega_table_path: Option<PathBuf>,
    pub tensor_nonzero_limit: usize,
    pub isomorphism_vertex_limit: usize,
    pub decompose_max_vertices: usize,
    pub decompose_max_leftover_edges: usize,
    pub decompose_max_treewidth_edges: usize,
    /// γ-grid size for the entropy sweeps.
    pub sweep_grid: usize,
    /// Entropy comparison tolerance.
    pub entropy_tolerance: f64,
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker cap for the parallel searches; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega_table_path: None,
            tensor_nonzero_limit: crate::tensors::DEFAULT_NONZERO_LIMIT,
            isomorphism_vertex_limit: crate::graphs::ISOMORPHISM_VERTEX_LIMIT,
            decompose_max_vertices: 6,
            decompose_max_leftover_edges: 2,
            decompose_max_treewidth_edges: 5,
            sweep_grid: 1000,
            entropy_tolerance: 1e-9,
            output_dir: None,
            format: OutputFormat::Text,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tensor_nonzero_limit == 0
            || self.isomorphism_vertex_limit == 0
            || self.decompose_max_vertices == 0
            || self.sweep_grid < 2
        {
            return Err(Error::InvalidArgument("limits must be positive".into()));
        }
        if self.entropy_tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config {path:?}: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Explicit path, then the environment variable, then defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<RunConfig> {
        if let Some(p) = explicit {
            return RunConfig::load(p);
        }
        if let Ok(p) = std::env::var(CONFIG_ENV_VAR) {
            return RunConfig::load(Path::new(&p));
        }
        Ok(RunConfig::default())
    }

    pub fn omega_table(&self) -> Result<OmegaTable> {
        match &self.omega_table_path {
            Some(p) => crate::exponents::parse_omega_table(&std::fs::read_to_string(p)?),
            None => Ok(OmegaTable::shipped_default()),
        }
    }

    pub fn decompose_config(&self) -> DecomposeConfig {
        DecomposeConfig {
            max_vertices: self.decompose_max_vertices,
            max_leftover_edges: self.decompose_max_leftover_edges,
            max_treewidth_edges: self.decompose_max_treewidth_edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.sweep_grid, c.sweep_grid);
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let back: RunConfig = serde_json::from_str(r#"{"sweep_grid": 50}"#).unwrap();
        assert_eq!(back.sweep_grid, 50);
        assert_eq!(back.decompose_max_vertices, 6);
        let bad: RunConfig = serde_json::from_str(r#"{"sweep_grid": 1}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
