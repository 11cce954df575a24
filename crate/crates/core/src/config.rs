//! Declarative experiment configuration.
//!
//! Experiments are described by a TOML file rather than flag soup: the ~15
//! coupled parameters must be archivable in the run manifest. Unknown keys
//! are rejected so typos fail loudly before any run starts.
//!
//! ```toml
//! [dataset]
//! case = "linear"
//! n = 500
//! seed = 42
//!
//! [run]
//! initial = 10        # labeled candidates before the first iteration
//! iterations = 60     # acquisitions per run
//! runs = 30           # ensemble repetitions
//! master_seed = 7
//! shell_depth = 2
//! output_dir = "results"
//!
//! [[strategies]]
//! kind = "random"
//!
//! [[strategies]]
//! kind = "pnd"
//! mc_samples = 1000
//! ```
//!
//! A CSV-backed dataset replaces the synthetic block:
//!
//! ```toml
//! [dataset.csv]
//! path = "thermoelectric.csv"
//! name = "thermoelectric"
//! features = ["mean_AtomicWeight", "mean_Electronegativity"]
//!
//! [[dataset.csv.outputs]]
//! column = "kappa"
//! direction = "minimize"
//!
//! [[dataset.csv.outputs]]
//! column = "rho"
//! direction = "minimize"
//!
//! [[dataset.csv.outputs]]
//! column = "seebeck"
//! direction = "maximize"
//! transform = "square"
//! name = "seebeck_sq"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::datasets::{self, CsvPoolSpec, LabeledPool, PoolSource, SyntheticKind};
use crate::error::{Error, Result};
use crate::simulate::RunSpec;
use crate::surrogate::SurrogateConfig;

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Either a synthetic case (`case`, `n`, `seed`) or a CSV table (`csv`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<SyntheticKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvPoolSpec>,
}

impl DatasetConfig {
    pub fn synthetic(case: SyntheticKind, n: usize, seed: u64) -> Self {
        DatasetConfig {
            case: Some(case),
            n: Some(n),
            seed: Some(seed),
            csv: None,
        }
    }

    fn validate(&self) -> Result<()> {
        match (&self.case, &self.csv) {
            (Some(_), Some(_)) => Err(config_err(
                "dataset",
                "give either a synthetic case or a csv table, not both",
            )),
            (None, None) => Err(config_err(
                "dataset",
                "either `case`/`n`/`seed` or a `csv` table is required",
            )),
            (Some(_), None) => {
                if self.n.is_none() {
                    return Err(config_err("dataset.n", "required for synthetic cases"));
                }
                if self.seed.is_none() {
                    return Err(config_err("dataset.seed", "required for synthetic cases"));
                }
                Ok(())
            }
            (None, Some(_)) => {
                if self.n.is_some() || self.seed.is_some() {
                    return Err(config_err(
                        "dataset",
                        "`n`/`seed` only apply to synthetic cases",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Materialize the pool. Relative CSV paths resolve against `base_dir`.
    pub fn build_pool(&self, base_dir: &Path) -> Result<(LabeledPool, PoolSource)> {
        self.validate()?;
        if let Some(case) = self.case {
            let n = self.n.unwrap();
            let seed = self.seed.unwrap();
            let pool = datasets::generate(case, n, seed)?;
            Ok((pool, PoolSource::Synthetic { case, seed }))
        } else {
            let spec = self.csv.as_ref().unwrap();
            let path = PathBuf::from(&spec.path);
            let path = if path.is_absolute() {
                path
            } else {
                base_dir.join(path)
            };
            let pool = datasets::load_csv_pool(&path, spec)?;
            Ok((pool, PoolSource::Csv { path: spec.path.clone() }))
        }
    }
}

/// Run-shape parameters shared by every strategy in the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Size of the random initial labeled subset (C).
    pub initial: usize,
    /// Acquisitions per run (K).
    pub iterations: usize,
    /// Ensemble repetitions (R).
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default = "default_shell_depth")]
    pub shell_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_shell_depth() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub run: RunSection,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    pub strategies: Vec<AcquisitionConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| config_err("config", e.to_string()))?;
        cfg.validate_structure()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Structural validation that does not need the pool.
    pub fn validate_structure(&self) -> Result<()> {
        self.dataset.validate()?;
        if self.strategies.is_empty() {
            return Err(config_err("strategies", "at least one strategy required"));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            s.validate()
                .map_err(|e| config_err(&format!("strategies[{i}]"), e.to_string()))?;
            if self.strategies[..i].iter().any(|o| o.kind == s.kind) {
                return Err(config_err(
                    &format!("strategies[{i}]"),
                    format!("strategy `{}` listed twice", s.kind),
                ));
            }
        }
        self.surrogate
            .validate()
            .map_err(|e| config_err("surrogate", e.to_string()))?;
        if self.run.runs < 1 {
            return Err(config_err("run.runs", "must be at least 1"));
        }
        if self.run.shell_depth < 1 {
            return Err(config_err("run.shell_depth", "must be at least 1"));
        }
        Ok(())
    }

    /// Validation against a concrete pool (C and K bounds).
    pub fn validate_for_pool(&self, pool: &LabeledPool) -> Result<()> {
        let n = pool.len();
        if self.run.initial < 2 || self.run.initial >= n {
            return Err(config_err(
                "run.initial",
                format!("must satisfy 2 <= initial < n (initial={}, n={n})", self.run.initial),
            ));
        }
        if self.run.iterations < 1 || self.run.iterations > n - self.run.initial {
            return Err(config_err(
                "run.iterations",
                format!(
                    "must satisfy 1 <= iterations <= n - initial (iterations={}, n={n}, initial={})",
                    self.run.iterations, self.run.initial
                ),
            ));
        }
        Ok(())
    }

    /// The per-strategy run spec (the strategy's seed is derived per run by
    /// the simulation engine, never taken from the file).
    pub fn run_spec(&self, strategy: &AcquisitionConfig) -> RunSpec {
        RunSpec {
            acquisition: strategy.clone(),
            surrogate: self.surrogate.clone(),
            initial_count: self.run.initial,
            iterations: self.run.iterations,
            shell_depth: self.run.shell_depth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::AcquisitionKind;

    const MINIMAL: &str = r#"
        [dataset]
        case = "linear"
        n = 50
        seed = 1

        [run]
        initial = 5
        iterations = 10
        runs = 2
        master_seed = 3

        [[strategies]]
        kind = "random"
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.run.shell_depth, 2);
        assert_eq!(cfg.surrogate.n_trees, 64);
        assert_eq!(cfg.strategies[0].kind, AcquisitionKind::Random);
        assert_eq!(cfg.strategies[0].mc_samples, 1000);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("master_seed = 3", "master_seed = 3\nbogus = 1");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(err.is_usage(), "unexpected error kind: {err:?}");
    }

    #[test]
    fn duplicate_strategies_rejected() {
        let bad = format!("{MINIMAL}\n[[strategies]]\nkind = \"random\"\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn dataset_forms_are_mutually_exclusive() {
        let bad = MINIMAL.replace(
            "case = \"linear\"",
            "case = \"linear\"\n[dataset.csv]\npath = \"x.csv\"\nfeatures = [\"a\"]\noutputs = []",
        );
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn pool_bounds_checked() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let (pool, _) = cfg.dataset.build_pool(Path::new(".")).unwrap();
        assert!(cfg.validate_for_pool(&pool).is_ok());
        let mut big = cfg.clone();
        big.run.iterations = 46; // n - initial = 45
        assert!(matches!(
            big.validate_for_pool(&pool),
            Err(Error::Config { .. })
        ));
    }
}
