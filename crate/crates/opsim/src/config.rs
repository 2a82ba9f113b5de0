//! Simulation configuration: one JSON document naming the system descriptor,
//! the model sequence, feedforwards, span, store and failure policy.
//!
//! Durations are given in minutes and times as ISO-8601 strings. The
//! resolved form written next to the results has every default filled in
//! and an absolute system path, so replaying it reproduces the run.

use std::path::{Path, PathBuf};

use opsim_core::engine::FailurePolicy;
use opsim_core::feedforward::FeedforwardSpec;
use opsim_core::formulations::ProblemTemplate;
use opsim_core::sequence::{Chronology, DecisionModelSpec, EmulatorSpec, SimulationSequence, Span};
use opsim_core::solver::SolverOptions;
use opsim_core::store::StoreConfig;
use opsim_core::time::Duration;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::{format_time, parse_time};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub template: ProblemTemplate,
    pub horizon_steps: usize,
    pub resolution_minutes: i64,
    pub interval_minutes: i64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronology: Option<Chronology>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmulatorConfig {
    pub name: String,
    pub template: ProblemTemplate,
    pub resolution_minutes: i64,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanConfig {
    pub start: String,
    /// Number of outermost intervals.
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Descriptor path, relative to the config file.
    pub system: PathBuf,
    pub models: Vec<ModelConfig>,
    #[serde(default)]
    pub emulator: Option<EmulatorConfig>,
    #[serde(default)]
    pub feedforwards: Vec<FeedforwardSpec>,
    #[serde(default)]
    pub chronology: Chronology,
    pub span: SpanConfig,
    #[serde(default = "file_store")]
    pub store: StoreConfig,
    #[serde(default)]
    pub failure_policy: FailurePolicy,
    /// Default output directory, relative to the config file.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_name() -> String {
    "simulation".into()
}

fn file_store() -> StoreConfig {
    StoreConfig { backend: opsim_core::store::Backend::File, ..StoreConfig::default() }
}

fn minutes(m: i64, what: &str) -> Result<Duration> {
    if m <= 0 {
        return Err(Error::Config(format!("{what} must be a positive number of minutes, got {m}")));
    }
    Ok(Duration::minutes(m))
}

impl SimulationConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json { path: origin.to_path_buf(), source: e })
    }

    /// Reads a config and makes its relative paths absolute against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text, path)?;
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let dir = std::fs::canonicalize(dir).map_err(|e| Error::io(dir, e))?;
        if cfg.system.is_relative() {
            cfg.system = dir.join(&cfg.system);
        }
        if let Some(o) = &cfg.output {
            if o.is_relative() {
                cfg.output = Some(dir.join(o));
            }
        }
        Ok(cfg)
    }

    pub fn sequence(&self) -> Result<SimulationSequence> {
        let mut models = Vec::new();
        for m in &self.models {
            models.push(DecisionModelSpec {
                name: m.name.clone(),
                template: m.template.clone(),
                horizon_steps: m.horizon_steps,
                resolution: minutes(m.resolution_minutes, &format!("{}: resolution", m.name))?,
                interval: minutes(m.interval_minutes, &format!("{}: interval", m.name))?,
                solver: m.solver.clone(),
                chronology: m.chronology,
            });
        }
        let emulator = match &self.emulator {
            Some(e) => Some(EmulatorSpec {
                name: e.name.clone(),
                template: e.template.clone(),
                resolution: minutes(e.resolution_minutes, &format!("{}: resolution", e.name))?,
                solver: e.solver.clone(),
            }),
            None => None,
        };
        Ok(SimulationSequence {
            models,
            emulator,
            feedforwards: self.feedforwards.clone(),
            chronology: self.chronology,
        })
    }

    pub fn span(&self) -> Result<Span> {
        let start = parse_time(&self.span.start)
            .ok_or_else(|| Error::Config(format!("span.start: bad timestamp `{}`", self.span.start)))?;
        if self.span.steps == 0 {
            return Err(Error::Config("span.steps must be positive".into()));
        }
        Ok(Span { start, steps: self.span.steps })
    }

    /// The canonical form written as `config_resolved.json`.
    pub fn resolved(&self) -> Result<Self> {
        let mut r = self.clone();
        r.span.start = format_time(self.span()?.start);
        r.store.compress = Some(self.store.compresses());
        if let Ok(p) = std::fs::canonicalize(&self.system) {
            r.system = p;
        }
        // The output location is a property of the invocation, not of the run.
        r.output = None;
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
