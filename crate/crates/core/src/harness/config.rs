use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::{ModelParams, ParamValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Baseline,
    Shocks,
    WeightSensitivity,
    NoiseRobustness,
    EventDetection,
    CrossPlatform,
    Sweep,
    PolicyComparison,
    RobustSelect,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::Baseline,
        ExperimentId::Shocks,
        ExperimentId::WeightSensitivity,
        ExperimentId::NoiseRobustness,
        ExperimentId::EventDetection,
        ExperimentId::CrossPlatform,
        ExperimentId::Sweep,
        ExperimentId::PolicyComparison,
        ExperimentId::RobustSelect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Baseline => "baseline",
            ExperimentId::Shocks => "shocks",
            ExperimentId::WeightSensitivity => "weight_sensitivity",
            ExperimentId::NoiseRobustness => "noise_robustness",
            ExperimentId::EventDetection => "event_detection",
            ExperimentId::CrossPlatform => "cross_platform",
            ExperimentId::Sweep => "sweep",
            ExperimentId::PolicyComparison => "policy_comparison",
            ExperimentId::RobustSelect => "robust_select",
        }
    }

    /// Horizon and population sizes each procedure uses unless overridden.
    pub fn defaults(self) -> (usize, usize, usize) {
        match self {
            ExperimentId::WeightSensitivity => (100, 80, 200),
            ExperimentId::CrossPlatform => (120, 80, 200),
            ExperimentId::Sweep => (120, 100, 300),
            ExperimentId::PolicyComparison | ExperimentId::RobustSelect => (150, 100, 300),
            _ => (150, 80, 200),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('-', "_");
        let t = if t == "run" { "baseline".to_string() } else { t };
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == t)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

pub const DEFAULT_SEED: u64 = 42;

/// Keys outside the model parameter set.
pub const RUN_KEYS: [&str; 4] = ["run.seed", "run.ticks", "run.out", "run.jobs"];

/// Fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub ticks: usize,
    pub params: ModelParams,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl ExperimentConfig {
    /// Defaults overlaid with the experiment's own horizon and sizes.
    pub fn new(experiment: ExperimentId) -> Self {
        let (ticks, n_p, n_c) = experiment.defaults();
        let mut params = ModelParams::default();
        params.agents.n_producers = n_p;
        params.agents.n_consumers = n_c;
        Self {
            experiment,
            seed: DEFAULT_SEED,
            ticks,
            params,
            out_dir: PathBuf::from("results").join(experiment.name()),
            jobs: 0,
        }
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "run.seed" => self.seed = u64::parse_param(key, raw)?,
            "run.ticks" => self.ticks = usize::parse_param(key, raw)?,
            "run.out" => self.out_dir = PathBuf::from(raw.trim()),
            "run.jobs" => self.jobs = usize::parse_param(key, raw)?,
            _ => self.params.set(key, raw)?,
        }
        Ok(())
    }

    /// Apply a flat `key = value` document. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, e.root())))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed == 0 {
            return Err(Error::invalid("run.seed", "must be positive"));
        }
        self.params.validate()
    }

    /// Every key with its resolved value, run keys first.
    pub fn resolved(&self) -> String {
        let mut s = format!(
            "# experiment: {}\nrun.seed = {}\nrun.ticks = {}\nrun.out = {}\nrun.jobs = {}\n",
            self.experiment,
            self.seed,
            self.ticks,
            self.out_dir.display(),
            self.jobs
        );
        s.push_str(&self.params.to_string());
        s
    }

    /// Hash of everything that determines results (the output directory and
    /// worker count do not).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}\n{}\n{}\n", self.experiment, self.seed, self.ticks));
        h.update(self.params.to_string());
        hex::encode(h.finalize())
    }
}
