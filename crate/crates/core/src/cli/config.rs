//! Experiment configuration files.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Sector;
use crate::model::{ChainParams, DotParams, Model};
use crate::spectral::{DeformationPath, MIN_FLOW_GRID};
use crate::topology::DEFAULT_N_GRID;

/// Sectors larger than this need `--allow-heavy`.
pub const HEAVY_DIM: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dot,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Flow,
    Winding,
    Skin,
    Deform,
    OracleCheck,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Flow => "flow",
            Task::Winding => "winding",
            Task::Skin => "skin",
            Task::Deform => "deform",
            Task::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformSpec {
    pub path: DeformationPath,
    #[serde(default = "default_path_points")]
    pub points: usize,
}

fn default_path_points() -> usize {
    33
}

fn default_n_grid() -> usize {
    DEFAULT_N_GRID
}

/// A run description as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelKind,
    pub params: serde_json::Value,
    /// `[N, P]`; absent means the one-body problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<[i64; 2]>,
    pub task: Task,
    #[serde(default)]
    pub e_ref: [f64; 2],
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deform: Option<DeformSpec>,
}

/// A config that passed every check that does not need a diagonalization.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: ExperimentConfig,
    pub model: Model,
    pub sector: Option<Sector>,
    pub e_ref: Complex64,
    /// Dimension of the requested sector, if any.
    pub sector_dim: Option<usize>,
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Builds a config around a typed model.
    pub fn for_model(model: &Model, task: Task, output_dir: impl Into<PathBuf>) -> Self {
        let (kind, params) = match model {
            Model::Dot(p) => (ModelKind::Dot, serde_json::to_value(p)),
            Model::Chain(p) => (ModelKind::Chain, serde_json::to_value(p)),
        };
        ExperimentConfig {
            name: None,
            model: kind,
            params: params.expect("params serialize"),
            sector: None,
            task,
            e_ref: [0.0, 0.0],
            n_grid: DEFAULT_N_GRID,
            output_dir: output_dir.into(),
            deform: None,
        }
    }

    pub fn typed_model(&self) -> Result<Model> {
        let model = match self.model {
            ModelKind::Dot => Model::Dot(
                DotParams::deserialize(&self.params).map_err(|e| cfg(format!("dot params: {e}")))?,
            ),
            ModelKind::Chain => Model::Chain(
                ChainParams::deserialize(&self.params).map_err(|e| cfg(format!("chain params: {e}")))?,
            ),
        };
        model.validate().map_err(|e| cfg(e.to_string()))?;
        Ok(model)
    }

    pub fn validate(&self, allow_heavy: bool) -> Result<ValidatedConfig> {
        let model = self.typed_model()?;
        if self.n_grid < MIN_FLOW_GRID {
            return Err(cfg(format!("n_grid must be at least {MIN_FLOW_GRID}, got {}", self.n_grid)));
        }
        if !self.e_ref.iter().all(|x| x.is_finite()) {
            return Err(cfg("e_ref must be finite"));
        }
        let sector = match self.sector {
            None => None,
            Some([n, p]) => {
                let n = u32::try_from(n).map_err(|_| cfg(format!("sector particle number {n} is invalid")))?;
                let p = i8::try_from(p).ok().filter(|p| *p == 1 || *p == -1);
                Some(Sector::new(n, p.ok_or_else(|| cfg("sector parity must be 1 or -1"))?)?)
            }
        };
        match (self.task, self.deform.is_some()) {
            (Task::Deform, false) => return Err(cfg("task deform needs a \"deform\" block")),
            (Task::Deform, true) => {}
            (_, true) => return Err(cfg("\"deform\" is only valid for task deform")),
            _ => {}
        }
        match self.task {
            Task::Skin if self.model != ModelKind::Chain => return Err(cfg("task skin needs a chain model")),
            Task::Deform if self.model != ModelKind::Dot => return Err(cfg("task deform needs a dot model")),
            Task::Skin | Task::Deform if sector.is_none() => {
                return Err(cfg(format!("task {} needs a sector", self.task.as_str())))
            }
            _ => {}
        }
        if let Some(d) = self.deform {
            if d.points < 2 {
                return Err(cfg("a deformation path needs at least 2 points"));
            }
        }
        if self.task == Task::OracleCheck && self.model == ModelKind::Chain {
            if let Some(s) = sector {
                if s != Sector::new(3, -1)? {
                    return Err(cfg("first-order chain check is defined for sector [3, -1] only"));
                }
            }
        }
        let sector_dim = match sector {
            Some(s) => Some(model.sector_basis(s).map_err(|e| cfg(e.to_string()))?.dim()),
            None => None,
        };
        if let Some(d) = sector_dim {
            if d > HEAVY_DIM && !allow_heavy {
                return Err(cfg(format!("sector dimension {d} exceeds {HEAVY_DIM}; pass --allow-heavy to run it")));
            }
        }
        Ok(ValidatedConfig {
            raw: self.clone(),
            model,
            sector,
            e_ref: Complex64::new(self.e_ref[0], self.e_ref[1]),
            sector_dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"{
        "model": "chain",
        "params": {"sites": 7, "hopping": 1.0},
        "sector": [3, -1],
        "task": "winding",
        "output_dir": "out"
    }"#;

    #[test]
    fn minimal_chain_config() {
        let c = ExperimentConfig::from_json(CHAIN).unwrap().validate(false).unwrap();
        assert_eq!(c.sector, Some(Sector::new(3, -1).unwrap()));
        assert_eq!(c.sector_dim, Some(28));
        assert_eq!(c.raw.n_grid, DEFAULT_N_GRID);
        assert_eq!(c.e_ref, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let extra = CHAIN.replace("\"task\"", "\"colour\": 1, \"task\"");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::Config(_))));
        let inner = CHAIN.replace("\"hopping\": 1.0", "\"hopping\": 1.0, \"mass\": 2");
        let c = ExperimentConfig::from_json(&inner).unwrap();
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
    }

    #[test]
    fn bad_values_are_config_errors() {
        for (from, to) in [
            ("[3, -1]", "[3, 0]"),
            ("[3, -1]", "[-3, 1]"),
            ("[3, -1]", "[1, -1]"),
            ("\"winding\"", "\"deform\""),
            ("\"winding\"", "\"skin\", \"n_grid\": 8"),
        ] {
            let text = CHAIN.replace(from, to);
            let r = ExperimentConfig::from_json(&text).and_then(|c| c.validate(false));
            assert!(matches!(r, Err(Error::Config(_))), "{to}");
        }
    }

    #[test]
    fn heavy_sector_needs_opt_in() {
        let text = CHAIN.replace("[3, -1]", "[9, -1]");
        let c = ExperimentConfig::from_json(&text).unwrap();
        assert!(c.validate(false).is_err());
        assert_eq!(c.validate(true).unwrap().sector_dim, Some(6864));
    }

    #[test]
    fn typed_round_trip() {
        let model = Model::Chain(ChainParams::new(5, 0.5).with_interaction(1.0, 2.0));
        let c = ExperimentConfig::for_model(&model, Task::Flow, "x");
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.typed_model().unwrap(), model);
    }
}
