use serde::Serialize;

use super::cost::{cost, eti_total, CostParams, EnergyBreakdown};
use super::device::DeviceSpec;
use super::grid::EnvAction;
use super::power::{calibrate_power_model, compute_power, offload_power, PowerModel, DEFAULT_ENERGY_SPLIT};
use super::timing::{tti_total, LatencyBreakdown, DEFAULT_QUANTIZER_THROUGHPUT};
use super::workload::WorkloadSpec;
use crate::Result;

/// An edge device with its calibrated power model, paired with a cloud
/// server that always runs at its maximum clocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub power: PowerModel,
    pub cloud: DeviceSpec,
    pub quantizer_throughput: f64,
}

/// Full outcome of running one task under one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub latency: LatencyBreakdown,
    pub energy: EnergyBreakdown,
    pub cost: f64,
}

impl SystemModel {
    pub fn new(edge: &DeviceSpec, cloud: &DeviceSpec) -> Result<Self> {
        cloud.validate()?;
        Ok(Self {
            power: calibrate_power_model(edge, DEFAULT_ENERGY_SPLIT)?,
            cloud: cloud.clone(),
            quantizer_throughput: DEFAULT_QUANTIZER_THROUGHPUT,
        })
    }

    /// Xavier NX paired with the RTX 3080 server.
    pub fn reference() -> Self {
        Self::new(&DeviceSpec::xavier_nx(), &DeviceSpec::rtx3080()).expect("presets are valid")
    }

    pub fn edge(&self) -> &DeviceSpec {
        &self.power.device
    }

    pub fn evaluate(
        &self,
        w: &WorkloadSpec,
        action: &EnvAction,
        bandwidth: f64,
        cp: &CostParams,
    ) -> Result<Evaluation> {
        let latency = tti_total(self, w, &action.freq, action.xi, bandwidth)?;
        let p_c = compute_power(&self.power, &action.freq)?;
        let p_o = offload_power(&self.power, &action.freq)?;
        let energy = eti_total(&latency, p_c, p_o);
        let cost = cost(&latency, &energy, cp);
        Ok(Evaluation { latency, energy, cost })
    }
}
