use serde::{Deserialize, Serialize};

use super::timing::LatencyBreakdown;
use crate::{Error, Result};

/// Edge energy of one task in mJ. Cloud-side energy is not accounted; the
/// edge idles while the cloud computes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyBreakdown {
    pub compute: f64,
    pub offload: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub eta: f64,
    pub max_power: f64,
}

impl CostParams {
    pub fn new(eta: f64, max_power: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("eta {eta} outside [0, 1]")));
        }
        if !(max_power > 0.0 && max_power.is_finite()) {
            return Err(Error::domain(format!("max power must be positive, got {max_power}")));
        }
        Ok(Self { eta, max_power })
    }
}

/// Compute energy covers local inference and quantization at `p_compute`;
/// offload energy covers transmission at `p_offload`.
pub fn eti_total(lat: &LatencyBreakdown, p_compute: f64, p_offload: f64) -> EnergyBreakdown {
    let compute = (lat.local + lat.comp) * p_compute;
    let offload = lat.off * p_offload;
    EnergyBreakdown { compute, offload, total: compute + offload }
}

/// `eta * ETI + (1 - eta) * MaxPower * TTI`, in mJ.
pub fn cost(lat: &LatencyBreakdown, eti: &EnergyBreakdown, cp: &CostParams) -> f64 {
    cp.eta * eti.total + (1.0 - cp.eta) * cp.max_power * lat.total
}
