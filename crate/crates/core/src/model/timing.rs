//! Time-to-inference terms. All results are in ms.

use serde::Serialize;

use super::device::{DeviceSpec, FrequencyVector};
use super::system::SystemModel;
use super::workload::WorkloadSpec;
use crate::{Error, Result};

/// Quantizer throughput at maximum CPU clock, bits per ms.
pub const DEFAULT_QUANTIZER_THROUGHPUT: f64 = 1.0e6;

/// float32 -> int8.
pub const INT8_COMPRESSION_RATIO: f64 = 4.0;

/// The four additive latency terms of one task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LatencyBreakdown {
    pub local: f64,
    pub comp: f64,
    pub off: f64,
    pub cloud: f64,
    pub total: f64,
}

impl LatencyBreakdown {
    pub fn new(local: f64, comp: f64, off: f64, cloud: f64) -> Self {
        Self { local, comp, off, cloud, total: local + comp + off + cloud }
    }
}

pub(crate) fn check_proportion(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::domain(format!("offload proportion {xi} outside [0, 1]")))
    }
}

/// Roofline time: the slower of GPU compute and memory traffic, plus a
/// serial CPU dispatch term.
fn roofline_ms(w: &WorkloadSpec, f: &FrequencyVector, u: &[f64; 3]) -> f64 {
    let gpu = w.gpu_work / (f.f_g * u[1]);
    let mem = w.mem_traffic / (f.f_m * u[2]);
    gpu.max(mem) + w.cpu_work / (f.f_c * u[0])
}

/// Edge compute time for the `1 - xi` share kept locally.
pub fn tti_local(w: &WorkloadSpec, edge: &DeviceSpec, f: &FrequencyVector, xi: f64) -> Result<f64> {
    check_proportion(xi)?;
    if xi == 1.0 {
        return Ok(0.0);
    }
    Ok(roofline_ms(w, f, &edge.throughput) * (1.0 - xi))
}

/// Cloud compute time for the offloaded `xi` share.
pub fn tti_cloud(w: &WorkloadSpec, cloud: &DeviceSpec, cloud_f: &FrequencyVector, xi: f64) -> Result<f64> {
    check_proportion(xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(roofline_ms(w, cloud_f, &cloud.throughput) * xi)
}

/// Quantization time on the edge; the quantizer runs on the CPU, so its
/// throughput scales with `f_c / f_c_max`.
pub fn tti_comp(w: &WorkloadSpec, f_c: f64, f_c_max: f64, xi: f64, quantizer_throughput: f64) -> Result<f64> {
    check_proportion(xi)?;
    if !(quantizer_throughput > 0.0 && f_c > 0.0) {
        return Err(Error::domain("quantizer throughput and CPU clock must be positive"));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(xi * w.feature_bits / (quantizer_throughput * f_c / f_c_max))
}

/// Transmission time of the int8 payload over `bandwidth` Mbps.
pub fn tti_off(w: &WorkloadSpec, xi: f64, bandwidth: f64) -> Result<f64> {
    check_proportion(xi)?;
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let payload_bits = xi * w.feature_bits / INT8_COMPRESSION_RATIO;
    Ok(payload_bits / (bandwidth * 1000.0))
}

pub fn tti_total(
    sys: &SystemModel,
    w: &WorkloadSpec,
    f: &FrequencyVector,
    xi: f64,
    bandwidth: f64,
) -> Result<LatencyBreakdown> {
    sys.edge().check_bounds(f)?;
    let local = tti_local(w, sys.edge(), f, xi)?;
    let comp = tti_comp(w, f.f_c, sys.edge().f_max.f_c, xi, sys.quantizer_throughput)?;
    let off = tti_off(w, xi, bandwidth)?;
    let cloud = tti_cloud(w, &sys.cloud, &sys.cloud.f_max, xi)?;
    Ok(LatencyBreakdown::new(local, comp, off, cloud))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// GPU-dominated toy workload: memory term below the GPU term, no CPU.
    fn toy() -> WorkloadSpec {
        let mut w = WorkloadSpec::effnet_like();
        w.gpu_work = 1000.0;
        w.mem_traffic = 100.0;
        w.cpu_work = 0.0;
        w
    }

    fn unit_device() -> DeviceSpec {
        let mut d = DeviceSpec::xavier_nx();
        d.throughput = [1.0; 3];
        d
    }

    #[test]
    fn local_time_worked_value() {
        let f = FrequencyVector::new(1000.0, 500.0, 1000.0);
        assert!((tti_local(&toy(), &unit_device(), &f, 0.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn local_time_vanishes_when_everything_is_offloaded() {
        let f = FrequencyVector::new(1000.0, 500.0, 1000.0);
        assert_eq!(tti_local(&WorkloadSpec::effnet_like(), &unit_device(), &f, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn doubling_frequencies_halves_local_time() {
        let w = WorkloadSpec::effnet_like();
        let d = unit_device();
        let f = FrequencyVector::new(500.0, 300.0, 700.0);
        let a = tti_local(&w, &d, &f, 0.3).unwrap();
        let b = tti_local(&w, &d, &f.scaled(2.0), 0.3).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cloud_time_worked_value_and_symmetry() {
        let mut cloud = DeviceSpec::rtx3080();
        cloud.throughput = [1.0; 3];
        let cf = FrequencyVector::new(2900.0, 1440.0, 2933.0);
        let t = tti_cloud(&toy(), &cloud, &cf, 1.0).unwrap();
        assert!((t - 1000.0 / 1440.0).abs() < 1e-12);
        assert!((t - 0.694).abs() < 1e-3);
        assert_eq!(tti_cloud(&toy(), &cloud, &cf, 0.0).unwrap(), 0.0);
        // xi = 1 on the cloud equals the local formula evaluated at cloud clocks.
        assert_eq!(t, tti_local(&toy(), &cloud, &cf, 0.0).unwrap());
    }

    #[test]
    fn compression_time() {
        let w = WorkloadSpec::effnet_like();
        assert_eq!(tti_comp(&w, 1900.0, 1900.0, 0.0, 1e6).unwrap(), 0.0);
        assert!((tti_comp(&w, 1900.0, 1900.0, 0.5, 1e6).unwrap() - 4.0).abs() < 1e-12);
        let full = tti_comp(&w, 1900.0, 1900.0, 0.5, 1e6).unwrap();
        let half = tti_comp(&w, 950.0, 1900.0, 0.5, 1e6).unwrap();
        assert!((half / full - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_time() {
        let w = WorkloadSpec::effnet_like();
        assert_eq!(tti_off(&w, 0.0, 5.0).unwrap(), 0.0);
        assert!((tti_off(&w, 0.5, 5.0).unwrap() - 200.0).abs() < 1e-12);
        let a = tti_off(&w, 0.5, 4.0).unwrap();
        let b = tti_off(&w, 0.5, 8.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(matches!(tti_off(&w, 0.5, 0.0), Err(Error::Domain(_))));
        assert!(tti_off(&w, 0.5, -1.0).is_err());
    }

    #[test]
    fn breakdown_sums_components() {
        let b = LatencyBreakdown::new(2.0, 4.0, 200.0, 0.694);
        assert!((b.total - 206.694).abs() < 1e-9);
        assert_eq!(LatencyBreakdown::new(0.0, 0.0, 0.0, 0.0).total, 0.0);
    }

    #[test]
    fn proportion_out_of_range_is_rejected() {
        let w = WorkloadSpec::effnet_like();
        let d = unit_device();
        assert!(tti_local(&w, &d, &d.f_max, 1.5).is_err());
        assert!(tti_off(&w, -0.1, 5.0).is_err());
    }
}
