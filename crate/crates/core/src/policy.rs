//! Comparison policies and weighted fusion of local and remote outputs.

use std::fmt;
use std::str::FromStr;

use crate::env::{ConcurrentEnv, Environment};
use crate::model::EnvAction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    EdgeOnly,
    CloudOnly,
    BinaryOffload,
    /// DQN restricted to CPU frequency and offload proportion.
    CpuOnlyDvfs,
    /// DQN over the full joint grid.
    Dvfo,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] =
        [PolicyKind::EdgeOnly, PolicyKind::CloudOnly, PolicyKind::BinaryOffload, PolicyKind::CpuOnlyDvfs, PolicyKind::Dvfo];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::EdgeOnly => "edge_only",
            PolicyKind::CloudOnly => "cloud_only",
            PolicyKind::BinaryOffload => "binary_offload",
            PolicyKind::CpuOnlyDvfs => "cpu_only_dvfs",
            PolicyKind::Dvfo => "dvfo",
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, PolicyKind::CpuOnlyDvfs | PolicyKind::Dvfo)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::config(format!("unknown policy `{s}`")))
    }
}

/// Everything local at full clocks.
pub fn edge_only_action(env: &Environment) -> EnvAction {
    EnvAction { freq: env.scenario().system.edge().f_max, xi: 0.0 }
}

/// Everything offloaded; the edge only quantizes and transmits, so its
/// clocks sit at their minimum.
pub fn cloud_only_action(env: &Environment) -> EnvAction {
    EnvAction { freq: env.scenario().system.edge().f_min, xi: 1.0 }
}

/// Cheaper of edge-only and cloud-only at the observed bandwidth; ties go to
/// the edge.
pub fn binary_offload_action(env: &Environment) -> Result<EnvAction> {
    let b = env.state().bandwidth;
    let edge = edge_only_action(env);
    let cloud = cloud_only_action(env);
    if env.evaluate(&cloud, b)?.cost < env.evaluate(&edge, b)?.cost {
        Ok(cloud)
    } else {
        Ok(edge)
    }
}

/// Action of a fixed (non-learned) policy in the current state.
pub fn baseline_action(kind: PolicyKind, env: &Environment) -> Result<EnvAction> {
    match kind {
        PolicyKind::EdgeOnly => Ok(edge_only_action(env)),
        PolicyKind::CloudOnly => Ok(cloud_only_action(env)),
        PolicyKind::BinaryOffload => binary_offload_action(env),
        k => Err(Error::config(format!("policy `{k}` needs a trained agent"))),
    }
}

/// `lambda * local + (1 - lambda) * remote`, element-wise.
pub fn fuse_weighted(local: &[f64], remote: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if local.len() != remote.len() {
        return Err(Error::domain(format!("cannot fuse lengths {} and {}", local.len(), remote.len())));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("fusion weight {lambda} outside [0, 1]")));
    }
    Ok(local.iter().zip(remote).map(|(l, r)| lambda * l + (1.0 - lambda) * r).collect())
}
