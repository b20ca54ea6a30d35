//! Declarative run configuration. Defaults are the standard operating
//! values (0.95 gating, top-100 listings, 9-day cooldown, 3-of-7 activity,
//! 138-day trial); an empty file yields a fully valid full-scale run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boost::GbdtHyper;
use crate::error::{Error, Result};
use crate::gat::TrainHyper;
use crate::sim::SimParams;
use crate::stats::WindowSpec;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GatConfig {
    pub heads: usize,
    pub d_out: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub negative_ratio: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for GatConfig {
    fn default() -> Self {
        GatConfig {
            heads: 2,
            d_out: 8,
            learning_rate: 0.05,
            epochs: 200,
            negative_ratio: 5,
            weight_decay: 1e-4,
            seed: 7,
        }
    }
}

impl GatConfig {
    pub fn hyper(&self) -> TrainHyper {
        TrainHyper {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            negative_ratio: self.negative_ratio,
            weight_decay: self.weight_decay,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub lambda: f64,
    /// Negatives per positive when sampling the stacked training rows.
    pub negative_ratio: usize,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        let h = GbdtHyper::default();
        GbdtConfig {
            rounds: h.rounds,
            max_depth: h.max_depth,
            learning_rate: h.learning_rate,
            min_leaf: h.min_leaf,
            lambda: h.lambda,
            negative_ratio: 2,
        }
    }
}

impl GbdtConfig {
    pub fn hyper(&self) -> GbdtHyper {
        GbdtHyper {
            rounds: self.rounds,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_leaf: self.min_leaf,
            lambda: self.lambda,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub gat: GatConfig,
    pub gbdt: GbdtConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            gat: GatConfig::default(),
            gbdt: GbdtConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Relationship probabilities strictly above this sum into risk scores.
    pub threshold: f64,
    /// Daily listing cap per risk kind per arm.
    pub top_k: usize,
    /// Players listed within this many past days are excluded.
    pub cooldown_days: u32,
    /// Minimum login days in the past seven.
    pub min_login_days: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: 0.95,
            top_k: 100,
            cooldown_days: 9,
            min_login_days: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    /// First trial day; everything before is burn-in used for training.
    pub start_day: u32,
    /// Trial length in days.
    pub duration_days: u32,
    pub trial_seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            start_day: 45,
            duration_days: 138,
            trial_seed: 61,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Post-listing windows as inclusive day-offset pairs.
    pub windows: Vec<[u32; 2]>,
    pub night_period_days: u32,
    pub alpha: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            windows: vec![
                [1, 14],
                [15, 28],
                [29, 56],
                [57, 84],
                [85, 112],
                [113, 140],
                [141, 168],
            ],
            night_period_days: 84,
            alpha: 0.05,
        }
    }
}

impl AnalysisConfig {
    pub fn window_specs(&self) -> Vec<WindowSpec> {
        self.windows
            .iter()
            .map(|&[lo, hi]| WindowSpec { lo, hi })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimParams,
    pub model: ModelConfig,
    pub pipeline: PipelineConfig,
    pub trial: TrialConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Loads and validates a TOML config; unset fields take the defaults,
    /// unknown keys are rejected.
    pub fn load(path: &Path) -> Result<RunConfig> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::config("config", format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialized form; stamped into artifact
    /// headers so later stages can refuse mismatched inputs.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Earliest inference days used for training, relative to trial start.
    pub fn train_inference_days(&self) -> Vec<u32> {
        let s = self.trial.start_day;
        vec![s - 23, s - 16, s - 9]
    }

    pub fn eval_inference_day(&self) -> u32 {
        self.trial.start_day
    }

    pub fn max_window_end(&self) -> u32 {
        self.analysis
            .windows
            .iter()
            .map(|w| w[1])
            .max()
            .unwrap_or(0)
            .max(self.analysis.night_period_days)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if !(self.pipeline.threshold > 0.0 && self.pipeline.threshold < 1.0) {
            return Err(Error::config(
                "pipeline.threshold",
                format!("{} outside the open interval (0, 1)", self.pipeline.threshold),
            ));
        }
        if self.pipeline.top_k == 0 {
            return Err(Error::config("pipeline.top_k", "must be at least 1"));
        }
        if self.trial.start_day < 37 {
            return Err(Error::config(
                "trial.start_day",
                "must be at least 37 so training windows fit before the trial",
            ));
        }
        if self.trial.duration_days == 0 {
            return Err(Error::config("trial.duration_days", "must be at least 1"));
        }
        if self.analysis.windows.is_empty() {
            return Err(Error::config("analysis.windows", "need at least one window"));
        }
        for w in &self.analysis.windows {
            if w[0] == 0 || w[1] < w[0] {
                return Err(Error::config(
                    "analysis.windows",
                    format!("window [{}, {}] must satisfy 1 <= lo <= hi", w[0], w[1]),
                ));
            }
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return Err(Error::config(
                "analysis.alpha",
                format!("{} outside the open interval (0, 1)", self.analysis.alpha),
            ));
        }
        let required = self.trial.start_day + self.trial.duration_days + self.max_window_end();
        if self.sim.horizon_days < required {
            return Err(Error::config(
                "sim.horizon_days",
                format!(
                    "{} is too short: trial start {} + duration {} + follow-up {} needs {}",
                    self.sim.horizon_days,
                    self.trial.start_day,
                    self.trial.duration_days,
                    self.max_window_end(),
                    required
                ),
            ));
        }
        Ok(())
    }
}
