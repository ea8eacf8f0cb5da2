use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::env::{BandwidthProcess, BandwidthSpec, EnvConfig, Scenario};
use crate::model::{ActionGrid, DeviceSpec, GridSpec, SystemModel, WorkloadSpec};
use crate::{Error, Result};

/// Environment variable naming the default config file.
pub const CONFIG_ENV_VAR: &str = "DVFO_CONFIG";

/// Task-stream settings that are not part of the cost weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    pub episode_len: usize,
    pub pool_size: usize,
    pub reduction: usize,
    pub skew: Option<f64>,
}

impl Default for EnvSection {
    fn default() -> Self {
        let d = EnvConfig::default();
        Self { episode_len: d.episode_len, pool_size: d.pool_size, reduction: d.reduction, skew: d.skew }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub device: String,
    pub cloud: String,
    pub workload: String,
    pub eta: f64,
    pub lambda: f64,
    pub seeds: Vec<u64>,
    /// Training steps per seed.
    pub steps: u64,
    /// Greedy evaluation episodes per seed.
    pub eval_episodes: usize,
    pub tas_ratio: f64,
    pub out: PathBuf,
    pub bandwidth: BandwidthSpec,
    pub grid: GridSpec,
    pub agent: AgentConfig,
    pub env: EnvSection,
    /// Extra device definitions, looked up before the built-in table.
    pub devices: Vec<DeviceSpec>,
    pub workloads: Vec<WorkloadSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            device: "xavier-nx".into(),
            cloud: "rtx3080".into(),
            workload: "effnet-like".into(),
            eta: 0.5,
            lambda: 0.5,
            seeds: vec![1],
            steps: 50_000,
            eval_episodes: 32,
            tas_ratio: 0.25,
            out: PathBuf::from("runs"),
            bandwidth: BandwidthSpec::default(),
            grid: GridSpec::default(),
            agent: AgentConfig::default(),
            env: EnvSection::default(),
            devices: Vec::new(),
            workloads: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if !(self.tas_ratio > 0.0 && self.tas_ratio <= 1.0) {
            return Err(Error::config(format!("tas_ratio {} outside (0, 1]", self.tas_ratio)));
        }
        if self.eval_episodes == 0 {
            return Err(Error::config("eval_episodes must be positive"));
        }
        self.scenario(self.grid)?;
        self.env_config().validate()?;
        self.agent.validate()
    }

    fn find_device(&self, name: &str) -> Result<DeviceSpec> {
        let d = self
            .devices
            .iter()
            .find(|d| d.name == name)
            .cloned()
            .or_else(|| DeviceSpec::by_name(name))
            .ok_or_else(|| Error::config(format!("unknown device `{name}`")))?;
        d.validate()?;
        Ok(d)
    }

    pub fn edge_device(&self) -> Result<DeviceSpec> {
        self.find_device(&self.device)
    }

    pub fn cloud_device(&self) -> Result<DeviceSpec> {
        self.find_device(&self.cloud)
    }

    pub fn workload_spec(&self) -> Result<WorkloadSpec> {
        let w = self
            .workloads
            .iter()
            .find(|w| w.name == self.workload)
            .cloned()
            .or_else(|| WorkloadSpec::by_name(&self.workload))
            .ok_or_else(|| Error::config(format!("unknown workload `{}`", self.workload)))?;
        w.validate()?;
        Ok(w)
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            eta: self.eta,
            lambda: self.lambda,
            episode_len: self.env.episode_len,
            pool_size: self.env.pool_size,
            reduction: self.env.reduction,
            skew: self.env.skew,
        }
    }

    pub fn scenario(&self, grid: GridSpec) -> Result<Scenario> {
        let system = SystemModel::new(&self.edge_device()?, &self.cloud_device()?)?;
        let grid = ActionGrid::new(grid, system.edge())?;
        Ok(Scenario { system, workload: self.workload_spec()?, grid, config: self.env_config() })
    }

    pub fn bandwidth_process(&self, seed: u64) -> Result<BandwidthProcess> {
        BandwidthProcess::from_spec(&self.bandwidth, seed)
    }
}

/// Command-line values that replace config fields when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub device: Option<String>,
    pub workload: Option<String>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub tas_ratio: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        if let Some(d) = &self.device {
            cfg.device.clone_from(d);
        }
        if let Some(w) = &self.workload {
            cfg.workload.clone_from(w);
        }
        if let Some(o) = &self.out {
            cfg.out.clone_from(o);
        }
        if let Some(t) = &self.trace {
            cfg.bandwidth = BandwidthSpec::TraceFile { path: t.clone() };
        }
        if let Some(e) = self.eta {
            cfg.eta = e;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(r) = self.tas_ratio {
            cfg.tas_ratio = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.eta, 0.5);
        assert_eq!(cfg.lambda, 0.5);
    }

    #[test]
    fn serialized_config_parses_back() {
        let cfg = ExperimentConfig { seeds: vec![3, 4], grid: GridSpec::new(4, 3), ..ExperimentConfig::default() };
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn bad_configs_are_rejected() {
        for text in [
            "device = \"pi-zero\"",
            "workload = \"resnet\"",
            "seeds = []",
            "eta = 1.5",
            "tas_ratio = 0.0",
            "colour = \"blue\"",
            "[grid]\nlevels_per_freq = 1",
            "[agent]\ngamma = 1.0",
            "[bandwidth]\nmode = \"carrier-pigeon\"",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn custom_devices_and_workloads_resolve() {
        let text = r#"
            device = "bench-board"
            workload = "tiny"
            [[devices]]
            name = "bench-board"
            f_min = { f_c = 100.0, f_g = 100.0, f_m = 100.0 }
            f_max = { f_c = 1000.0, f_g = 800.0, f_m = 1600.0 }
            max_power = 8.0
            v_min = [0.8, 0.8, 0.8]
            v_max = [1.2, 1.2, 1.2]
            p_static = 0.8
            [[workloads]]
            name = "tiny"
            gpu_work = 1000.0
            mem_traffic = 2000.0
            cpu_work = 10.0
            feature_bits = 8192.0
            channels = 8
            height = 4
            width = 8
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.edge_device().unwrap().max_power, 8.0);
        assert_eq!(cfg.workload_spec().unwrap().channels, 8);
    }

    #[test]
    fn overrides_replace_fields() {
        let o = Overrides { seed: Some(9), eta: Some(1.0), device: Some("jetson-tx2".into()), ..Overrides::default() };
        let cfg = o.apply(ExperimentConfig::default()).unwrap();
        assert_eq!(cfg.seeds, vec![9]);
        assert_eq!(cfg.eta, 1.0);
        assert_eq!(cfg.edge_device().unwrap().name, "jetson-tx2");
        let bad = Overrides { lambda: Some(0.0), ..Overrides::default() };
        assert!(bad.apply(ExperimentConfig::default()).is_err());
    }
}
