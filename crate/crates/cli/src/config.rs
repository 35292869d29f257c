//! Run configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use topovqe_core::ansatz::{AnsatzFamily, AnsatzSpec};
use topovqe_core::hamiltonians::DEFAULT_EXACT_CAP;
use topovqe_core::vqe::{CheckThresholds, ModelSpec, OptimizerSettings, Strategy, SweepPlan};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

impl From<topovqe_core::Error> for ConfigError {
    fn from(e: topovqe_core::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Ssh { n_sites: usize },
    Kitaev { n_sites: usize, t: f64, delta_pair: f64 },
}

impl ModelSection {
    pub fn spec(&self) -> ModelSpec {
        match *self {
            ModelSection::Ssh { n_sites } => ModelSpec::Ssh { n_sites },
            ModelSection::Kitaev { n_sites, t, delta_pair } => ModelSpec::Kitaev { n_sites, t, delta_pair },
        }
    }
}

/// Either explicit `values` or an inclusive `start`/`stop`/`step` range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(GridValues),
    Range(GridRange),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridValues {
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, ConfigError> {
        match *self {
            GridSpec::Values(ref v) => Ok(v.values.clone()),
            GridSpec::Range(GridRange { start, stop, step }) => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
                    return Err(ConfigError::Invalid("grid range needs finite start/stop and non-zero step".into()));
                }
                let span = (stop - start) / step;
                if span < -1e-9 {
                    return Err(ConfigError::Invalid("grid step points away from stop".into()));
                }
                let n = (span + 1e-9).floor() as usize;
                // snap to 1e-10 so 0.1-type steps print cleanly
                Ok((0..=n).map(|k| ((start + step * k as f64) * 1e10).round() / 1e10).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    Count(usize),
    Keyword(LayersKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayersKeyword {
    Auto,
}

impl Default for Layers {
    fn default() -> Self {
        Layers::Keyword(LayersKeyword::Auto)
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub family: AnsatzFamily,
    #[serde(default)]
    pub layers: Layers,
    #[serde(default = "yes")]
    pub edge_link: bool,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self { family: AnsatzFamily::ProblemInspired, layers: Layers::default(), edge_link: true }
    }
}

impl AnsatzSection {
    pub fn spec(&self, n_qubits: usize) -> AnsatzSpec {
        let layers = match self.layers {
            Layers::Count(d) => d,
            Layers::Keyword(LayersKeyword::Auto) => self.family.default_layers(n_qubits),
        };
        AnsatzSpec { family: self.family, n_qubits, layers, edge_link: self.edge_link }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub kind: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_first_guesses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<CheckThresholds>,
}

impl Default for StrategySection {
    fn default() -> Self {
        Self {
            kind: Strategy::Chained,
            eta_schedule: None,
            tau: None,
            n_first_guesses: None,
            chain: None,
            checks: None,
            retry_cap: None,
            thresholds: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_bounds: Option<[f64; 2]>,
}

impl OptimizerSection {
    pub fn settings(&self, seed: u64) -> OptimizerSettings {
        let d = OptimizerSettings::default();
        OptimizerSettings {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            gradient_step: self.gradient_step.unwrap_or(d.gradient_step),
            cost_tolerance: self.cost_tolerance.unwrap_or(d.cost_tolerance),
            gradient_tolerance: self.gradient_tolerance.unwrap_or(d.gradient_tolerance),
            memory: self.memory.unwrap_or(d.memory),
            param_bounds: self.param_bounds.map(|[lo, hi]| (lo, hi)),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Base name for `<name>.csv` and `<name>.json`.
    pub name: String,
    /// Maximum qubit count accepted for exact references.
    pub exact_cap: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { name: "run".into(), exact_cap: DEFAULT_EXACT_CAP }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate_basic()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate_basic(&self) -> Result<(), ConfigError> {
        let n = self.model.spec().n_sites();
        if n > self.output.exact_cap || self.output.exact_cap > DEFAULT_EXACT_CAP {
            return Err(ConfigError::Invalid(format!(
                "{n} sites exceeds the exact-reference cap of {}",
                self.output.exact_cap.min(DEFAULT_EXACT_CAP)
            )));
        }
        self.model.spec().validate()?;
        let grid = self.grid.points()?;
        if grid.is_empty() {
            return Err(ConfigError::Invalid("empty sweep grid".into()));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(ConfigError::Invalid("output name must be a plain file stem".into()));
        }
        Ok(())
    }

    /// Sweep plan with defaults filled in; `seed` overrides the file's seed.
    pub fn plan(&self, seed: Option<u64>) -> Result<SweepPlan, ConfigError> {
        let model = self.model.spec();
        let ansatz = self.ansatz.unwrap_or_default().spec(model.n_sites());
        let s = self.strategy.clone().unwrap_or_default();
        let mut plan = SweepPlan::new(model, self.grid.points()?, ansatz, s.kind);
        if let Some(v) = s.eta_schedule {
            plan.eta_schedule = v;
        }
        if let Some(v) = s.tau {
            plan.tau = v;
        }
        if let Some(v) = s.n_first_guesses {
            plan.n_first_guesses = v;
        }
        if let Some(v) = s.chain {
            plan.chain = v;
        }
        if let Some(v) = s.checks {
            plan.checks = v;
        }
        if let Some(v) = s.retry_cap {
            plan.retry_cap = v;
        }
        if let Some(v) = s.thresholds {
            plan.thresholds = v;
        }
        plan.seed = seed.unwrap_or(self.seed);
        plan.validate()?;
        Ok(plan)
    }

    pub fn settings(&self, seed: Option<u64>) -> Result<OptimizerSettings, ConfigError> {
        let s = self.optimizer.clone().unwrap_or_default().settings(seed.unwrap_or(self.seed));
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
kind = "ssh"
n_sites = 4

[grid]
start = -1.0
stop = 1.0
step = 0.5
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.grid.points().unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let plan = cfg.plan(None).unwrap();
        assert_eq!(plan.strategy, Strategy::Chained);
        assert_eq!(plan.ansatz.layers, 3);
        assert_eq!(plan.n_first_guesses, 10);
    }

    #[test]
    fn auto_layers() {
        let sec = AnsatzSection { family: AnsatzFamily::ProblemInspired, ..Default::default() };
        assert_eq!(sec.spec(12).layers, 5);
        let sec = AnsatzSection { family: AnsatzFamily::HardwareEfficient, ..Default::default() };
        assert_eq!(sec.spec(12).layers, 3);
        let sec = AnsatzSection { layers: Layers::Count(2), ..sec };
        assert_eq!(sec.spec(12).layers, 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let typo = MINIMAL.replace("n_sites", "n_site");
        assert!(RunConfig::from_toml(&typo).is_err());
        let extra = format!("{MINIMAL}\n[optimizer]\nmax_iter = 5\n");
        assert!(RunConfig::from_toml(&extra).is_err());
        let top = format!("sede = 3\n{MINIMAL}");
        assert!(RunConfig::from_toml(&top).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn bad_grids() {
        let empty = MINIMAL.replace("start = -1.0\nstop = 1.0\nstep = 0.5", "values = []");
        assert!(RunConfig::from_toml(&empty).is_err());
        let backwards = MINIMAL.replace("step = 0.5", "step = -0.5");
        assert!(RunConfig::from_toml(&backwards).is_err());
    }
}
