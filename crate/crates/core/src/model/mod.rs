//! Device, workload, power, latency, energy and cost models.
//!
//! Units are fixed across the crate: MHz, ms, W, mJ, Mbps and bits.
//! Energy in mJ is power in W times time in ms.

mod cost;
mod device;
mod grid;
mod optimum;
mod power;
mod system;
mod timing;
mod workload;

pub use cost::{cost, eti_total, CostParams, EnergyBreakdown};
pub use device::{voltage_at, DeviceSpec, Domain, FrequencyVector};
pub use grid::{ActionGrid, EnvAction, GridSpec};
pub use optimum::{brute_force_optimum, Optimum, MAX_ENUMERATION};
pub use power::{
    calibrate_power_model, compute_power, offload_power, PowerModel, DEFAULT_ENERGY_SPLIT,
    DEFAULT_OFFLOAD_SHARE,
};
pub use system::{Evaluation, SystemModel};
pub use timing::{
    tti_cloud, tti_comp, tti_local, tti_off, tti_total, LatencyBreakdown,
    DEFAULT_QUANTIZER_THROUGHPUT, INT8_COMPRESSION_RATIO,
};
pub use workload::WorkloadSpec;

pub(crate) use timing::check_proportion;
