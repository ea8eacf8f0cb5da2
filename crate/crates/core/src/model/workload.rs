use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Compute and memory demand of one inference task plus the geometry of the
/// intermediate feature map that may be offloaded.
///
/// Work fields are expressed so that `work / (MHz * throughput)` is in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub name: String,
    pub gpu_work: f64,
    pub mem_traffic: f64,
    pub cpu_work: f64,
    /// Raw float32 feature-map size in bits.
    pub feature_bits: f64,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl WorkloadSpec {
    pub fn new(
        name: &str,
        gpu_work: f64,
        mem_traffic: f64,
        cpu_work: f64,
        (channels, height, width): (usize, usize, usize),
    ) -> Self {
        Self {
            name: name.to_string(),
            gpu_work,
            mem_traffic,
            cpu_work,
            feature_bits: (channels * height * width * 32) as f64,
            channels,
            height,
            width,
        }
    }

    /// Memory-bound reference task: an 8 Mbit (16x125x125 float32) feature
    /// map and a roofline dominated by memory traffic.
    pub fn effnet_like() -> Self {
        Self::new("effnet-like", 80_000.0, 600_000.0, 6_000.0, (16, 125, 125))
    }

    /// Compute-bound reference task with a smaller 64x28x28 feature map.
    pub fn vit_like() -> Self {
        Self::new("vit-like", 400_000.0, 300_000.0, 6_000.0, (64, 28, 28))
    }

    pub fn presets() -> Vec<WorkloadSpec> {
        vec![Self::effnet_like(), Self::vit_like()]
    }

    pub fn by_name(name: &str) -> Option<WorkloadSpec> {
        Self::presets().into_iter().find(|w| w.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.gpu_work, self.mem_traffic, self.cpu_work, self.feature_bits];
        if fields.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::config(format!("workload {}: work fields must be positive", self.name)));
        }
        if self.channels == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::config(format!("workload {}: empty feature geometry", self.name)));
        }
        let expect = (self.channels * self.height * self.width * 32) as f64;
        if self.feature_bits != expect {
            return Err(Error::config(format!(
                "workload {}: feature_bits {} != C*H*W*32 = {expect}",
                self.name, self.feature_bits
            )));
        }
        Ok(())
    }
}
