use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One of the three frequency domains an edge device exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Cpu,
    Gpu,
    Mem,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Cpu, Domain::Gpu, Domain::Mem];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// CPU, GPU and memory clock in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub f_c: f64,
    pub f_g: f64,
    pub f_m: f64,
}

impl FrequencyVector {
    pub const fn new(f_c: f64, f_g: f64, f_m: f64) -> Self {
        Self { f_c, f_g, f_m }
    }

    pub fn get(&self, d: Domain) -> f64 {
        match d {
            Domain::Cpu => self.f_c,
            Domain::Gpu => self.f_g,
            Domain::Mem => self.f_m,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.f_c * k, self.f_g * k, self.f_m * k)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.f_c, self.f_g, self.f_m]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Frequency, voltage and power envelope of one device.
///
/// `throughput` holds the per-domain work rate used by the roofline latency
/// model (work units per MHz per ms), indexed by [`Domain::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub name: String,
    pub f_min: FrequencyVector,
    pub f_max: FrequencyVector,
    pub max_power: f64,
    pub v_min: [f64; 3],
    pub v_max: [f64; 3],
    pub p_static: f64,
    #[serde(default = "unit_throughput")]
    pub throughput: [f64; 3],
}

fn unit_throughput() -> [f64; 3] {
    [1.0; 3]
}

const DEFAULT_V_MIN: f64 = 0.8;
const DEFAULT_V_MAX: f64 = 1.2;
const STATIC_POWER_FRACTION: f64 = 0.1;

/// Relative slack when checking a frequency against device bounds, so that
/// grid levels computed by interpolation are never rejected.
const BOUND_SLACK: f64 = 1e-9;

impl DeviceSpec {
    fn preset(name: &str, f_min: [f64; 3], f_max: [f64; 3], max_power: f64) -> Self {
        Self {
            name: name.to_string(),
            f_min: FrequencyVector::from_array(f_min),
            f_max: FrequencyVector::from_array(f_max),
            max_power,
            v_min: [DEFAULT_V_MIN; 3],
            v_max: [DEFAULT_V_MAX; 3],
            p_static: STATIC_POWER_FRACTION * max_power,
            throughput: unit_throughput(),
        }
    }

    pub fn jetson_nano() -> Self {
        Self::preset("jetson-nano", [102.0, 76.8, 204.0], [1479.0, 921.6, 1600.0], 10.0)
    }

    pub fn jetson_tx2() -> Self {
        Self::preset("jetson-tx2", [345.6, 114.75, 204.0], [2000.0, 1300.0, 1866.0], 15.0)
    }

    pub fn xavier_nx() -> Self {
        Self::preset("xavier-nx", [115.2, 114.75, 204.0], [1900.0, 1100.0, 1866.0], 20.0)
    }

    /// Cloud server. Its throughput reflects the far larger core count
    /// relative to the edge GPUs.
    pub fn rtx3080() -> Self {
        let mut d = Self::preset("rtx3080", [1000.0, 210.0, 405.0], [2900.0, 1440.0, 2933.0], 320.0);
        d.throughput = [4.0, 16.0, 16.0];
        d
    }

    pub fn edge_presets() -> Vec<DeviceSpec> {
        vec![Self::jetson_nano(), Self::jetson_tx2(), Self::xavier_nx()]
    }

    pub fn by_name(name: &str) -> Option<DeviceSpec> {
        match name {
            "jetson-nano" => Some(Self::jetson_nano()),
            "jetson-tx2" => Some(Self::jetson_tx2()),
            "xavier-nx" => Some(Self::xavier_nx()),
            "rtx3080" => Some(Self::rtx3080()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(format!("device {}: {m}", self.name)));
        for d in Domain::ALL {
            let (lo, hi) = (self.f_min.get(d), self.f_max.get(d));
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return bad(format!("need 0 < f_min < f_max in {d:?}, got {lo}..{hi}"));
            }
            let i = d.index();
            if !(self.v_min[i] > 0.0 && self.v_min[i] <= self.v_max[i]) {
                return bad(format!("need 0 < v_min <= v_max in {d:?}"));
            }
            if !(self.throughput[i] > 0.0 && self.throughput[i].is_finite()) {
                return bad(format!("throughput in {d:?} must be positive"));
            }
        }
        if !(self.p_static > 0.0 && self.max_power > self.p_static && self.max_power.is_finite()) {
            return bad(format!(
                "need max_power > p_static > 0, got {} and {}",
                self.max_power, self.p_static
            ));
        }
        Ok(())
    }

    pub fn check_bounds(&self, f: &FrequencyVector) -> Result<()> {
        for d in Domain::ALL {
            let (lo, hi, x) = (self.f_min.get(d), self.f_max.get(d), f.get(d));
            let slack = BOUND_SLACK * hi;
            if !(x >= lo - slack && x <= hi + slack) {
                return Err(Error::domain(format!(
                    "{d:?} frequency {x} MHz outside [{lo}, {hi}] of {}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Supply voltage per domain, linear in frequency between the device's
/// `(f_min, v_min)` and `(f_max, v_max)` corners.
pub fn voltage_at(spec: &DeviceSpec, f: &FrequencyVector) -> Result<[f64; 3]> {
    spec.check_bounds(f)?;
    let mut v = [0.0; 3];
    for d in Domain::ALL {
        let i = d.index();
        let (lo, hi) = (spec.f_min.get(d), spec.f_max.get(d));
        let t = ((f.get(d) - lo) / (hi - lo)).clamp(0.0, 1.0);
        v[i] = spec.v_min[i] + (spec.v_max[i] - spec.v_min[i]) * t;
    }
    Ok(v)
}
