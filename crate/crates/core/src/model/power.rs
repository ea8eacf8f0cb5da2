use serde::{Deserialize, Serialize};

use super::device::{voltage_at, DeviceSpec, Domain, FrequencyVector};
use crate::{Error, Result};

/// CPU/GPU/memory share of dynamic power at maximum frequency.
pub const DEFAULT_ENERGY_SPLIT: [f64; 3] = [0.2, 0.66, 0.14];

/// Dynamic offload (radio + copy) power at maximum CPU clock, as a fraction
/// of the device's max power.
pub const DEFAULT_OFFLOAD_SHARE: f64 = 0.15;

/// `p = sum_x kappa_x * V_x^2 * f_x + p_static` for computing, and the same
/// form over the CPU domain alone for offloading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub kappa: [f64; 3],
    pub kappa_offload: f64,
    pub device: DeviceSpec,
}

pub fn compute_power(model: &PowerModel, f: &FrequencyVector) -> Result<f64> {
    let v = voltage_at(&model.device, f)?;
    let dynamic: f64 = Domain::ALL
        .iter()
        .map(|&d| model.kappa[d.index()] * v[d.index()].powi(2) * f.get(d))
        .sum();
    Ok(dynamic + model.device.p_static)
}

pub fn offload_power(model: &PowerModel, f: &FrequencyVector) -> Result<f64> {
    let v = voltage_at(&model.device, f)?;
    Ok(model.kappa_offload * v[0].powi(2) * f.f_c + model.device.p_static)
}

/// Solves the kappa coefficients so that compute power at `f_max` equals the
/// device's max power, with the dynamic part divided according to `split`.
pub fn calibrate_power_model(spec: &DeviceSpec, split: [f64; 3]) -> Result<PowerModel> {
    spec.validate()?;
    let total: f64 = split.iter().sum();
    if (total - 1.0).abs() > 1e-9 || split.iter().any(|s| *s < 0.0) {
        return Err(Error::config(format!("energy split {split:?} must be non-negative and sum to 1")));
    }
    let dynamic = spec.max_power - spec.p_static;
    let mut kappa = [0.0; 3];
    for d in Domain::ALL {
        let i = d.index();
        kappa[i] = split[i] * dynamic / (spec.v_max[i].powi(2) * spec.f_max.get(d));
    }
    let kappa_offload = DEFAULT_OFFLOAD_SHARE * spec.max_power / (spec.v_max[0].powi(2) * spec.f_max.f_c);
    Ok(PowerModel { kappa, kappa_offload, device: spec.clone() })
}
