use serde::{Deserialize, Serialize};

use super::device::{DeviceSpec, Domain, FrequencyVector};
use crate::{Error, Result};

/// A frequency setting plus the offloaded share of the feature map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvAction {
    pub freq: FrequencyVector,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_levels")]
    pub levels_per_freq: usize,
    #[serde(default = "default_xi_levels")]
    pub xi_levels: usize,
    /// Pin GPU and memory at their maximum and only scale the CPU clock.
    #[serde(default)]
    pub cpu_only: bool,
}

fn default_levels() -> usize {
    10
}

fn default_xi_levels() -> usize {
    11
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { levels_per_freq: default_levels(), xi_levels: default_xi_levels(), cpu_only: false }
    }
}

impl GridSpec {
    pub fn new(levels_per_freq: usize, xi_levels: usize) -> Self {
        Self { levels_per_freq, xi_levels, cpu_only: false }
    }

    pub fn cpu_only(levels_per_freq: usize, xi_levels: usize) -> Self {
        Self { levels_per_freq, xi_levels, cpu_only: true }
    }
}

/// Discrete joint action space: evenly spaced clock levels per domain times
/// evenly spaced offload proportions in `[0, 1]`.
///
/// Index order is lexicographic in `(cpu, gpu, mem, xi)` with `xi` varying
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    spec: GridSpec,
    levels: [Vec<f64>; 3],
    xi_values: Vec<f64>,
}

const MATCH_TOLERANCE: f64 = 1e-9;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    // Endpoints are exact so the min/max baselines always land on the grid.
    v[0] = lo;
    v[n - 1] = hi;
    v
}

fn find_level(levels: &[f64], x: f64) -> Option<usize> {
    let scale = levels.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    levels.iter().position(|v| (v - x).abs() <= MATCH_TOLERANCE * scale)
}

impl ActionGrid {
    pub fn new(spec: GridSpec, device: &DeviceSpec) -> Result<Self> {
        if spec.levels_per_freq < 2 || spec.xi_levels < 2 {
            return Err(Error::config(format!(
                "grid needs at least two levels per axis, got {} x {}",
                spec.levels_per_freq, spec.xi_levels
            )));
        }
        let levels = Domain::ALL.map(|d| {
            let (lo, hi) = (device.f_min.get(d), device.f_max.get(d));
            if spec.cpu_only && d != Domain::Cpu {
                vec![hi]
            } else {
                linspace(lo, hi, spec.levels_per_freq)
            }
        });
        Ok(Self { spec, levels, xi_values: linspace(0.0, 1.0, spec.xi_levels) })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).product::<usize>() * self.xi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn levels(&self, d: Domain) -> &[f64] {
        &self.levels[d.index()]
    }

    pub fn xi_values(&self) -> &[f64] {
        &self.xi_values
    }

    pub fn decode(&self, index: usize) -> Result<EnvAction> {
        if index >= self.len() {
            return Err(Error::domain(format!("action index {index} outside grid of {}", self.len())));
        }
        let nx = self.xi_values.len();
        let [nc, ng, nm] = [0, 1, 2].map(|i| self.levels[i].len());
        let ix = index % nx;
        let im = (index / nx) % nm;
        let ig = (index / (nx * nm)) % ng;
        let ic = index / (nx * nm * ng);
        debug_assert!(ic < nc);
        Ok(EnvAction {
            freq: FrequencyVector::new(self.levels[0][ic], self.levels[1][ig], self.levels[2][im]),
            xi: self.xi_values[ix],
        })
    }

    pub fn index_of(&self, a: &EnvAction) -> Result<usize> {
        let off_grid = || Error::domain(format!("action {a:?} is not on the grid"));
        let ic = find_level(&self.levels[0], a.freq.f_c).ok_or_else(off_grid)?;
        let ig = find_level(&self.levels[1], a.freq.f_g).ok_or_else(off_grid)?;
        let im = find_level(&self.levels[2], a.freq.f_m).ok_or_else(off_grid)?;
        let ix = find_level(&self.xi_values, a.xi).ok_or_else(off_grid)?;
        let (ng, nm, nx) = (self.levels[1].len(), self.levels[2].len(), self.xi_values.len());
        Ok(((ic * ng + ig) * nm + im) * nx + ix)
    }

    pub fn iter(&self) -> impl Iterator<Item = EnvAction> + '_ {
        (0..self.len()).map(|i| self.decode(i).expect("index in range"))
    }
}
