//! Bandwidth dynamics: trace replay or a reflected random walk, plus a
//! continuous clock that interpolates between consecutive samples.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, STREAM_BANDWIDTH};
use crate::{Error, Result};

pub const WALK_LOWER_MBPS: f64 = 2.0;
pub const WALK_UPPER_MBPS: f64 = 8.0;

/// Configuration form of a [`BandwidthProcess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BandwidthSpec {
    Trace { values: Vec<f64> },
    /// `step,mbps` CSV read at construction time.
    TraceFile { path: std::path::PathBuf },
    RandomWalk {
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
}

fn default_lo() -> f64 {
    WALK_LOWER_MBPS
}

fn default_hi() -> f64 {
    WALK_UPPER_MBPS
}

fn default_step() -> f64 {
    0.5
}

impl Default for BandwidthSpec {
    fn default() -> Self {
        BandwidthSpec::RandomWalk { lo: default_lo(), hi: default_hi(), step: default_step() }
    }
}

impl BandwidthSpec {
    pub fn constant(mbps: f64) -> Self {
        BandwidthSpec::Trace { values: vec![mbps] }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Trace { values: Vec<f64>, pos: usize },
    Walk { lo: f64, hi: f64, step: f64, current: f64, rng: Box<ChaCha8Rng> },
}

#[derive(Debug, Clone)]
pub struct BandwidthProcess {
    source: Source,
}

impl BandwidthProcess {
    pub fn trace(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("bandwidth trace is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::config(format!("bandwidth trace value {v} must be positive")));
        }
        Ok(Self { source: Source::Trace { values, pos: 0 } })
    }

    /// Walk starting at a seeded uniform point of `[lo, hi]` and moving by a
    /// uniform increment in `[-step, step]` per sample.
    pub fn random_walk(lo: f64, hi: f64, step: f64, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::config(format!("walk bounds [{lo}, {hi}] are invalid")));
        }
        if !(step > 0.0 && step < hi - lo) {
            return Err(Error::config(format!("walk step {step} must lie in (0, {})", hi - lo)));
        }
        let mut rng = substream(seed, STREAM_BANDWIDTH);
        let current = rng.random_range(lo..=hi);
        Ok(Self { source: Source::Walk { lo, hi, step, current, rng: Box::new(rng) } })
    }

    pub fn from_spec(spec: &BandwidthSpec, seed: u64) -> Result<Self> {
        match spec {
            BandwidthSpec::Trace { values } => Self::trace(values.clone()),
            BandwidthSpec::TraceFile { path } => Self::trace(read_trace_csv(path)?),
            BandwidthSpec::RandomWalk { lo, hi, step } => Self::random_walk(*lo, *hi, *step, seed),
        }
    }

    /// Next sample in Mbps.
    pub fn bandwidth_next(&mut self) -> f64 {
        match &mut self.source {
            Source::Trace { values, pos } => {
                let v = values[*pos];
                *pos = (*pos + 1) % values.len();
                v
            }
            Source::Walk { lo, hi, step, current, rng } => {
                let v = *current;
                let mut x = v + rng.random_range(-*step..=*step);
                if x > *hi {
                    x = 2.0 * *hi - x;
                } else if x < *lo {
                    x = 2.0 * *lo - x;
                }
                *current = x;
                v
            }
        }
    }
}

/// Parses a `step,mbps` CSV trace and returns the bandwidth column.
pub fn parse_trace_csv(text: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "step" || &headers[1] != "mbps" {
        return Err(Error::parse(1, format!("trace header must be `step,mbps`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::parse(line, "expected two columns"));
        }
        rec[0].parse::<u64>().map_err(|_| Error::parse(line, format!("bad step {:?}", &rec[0])))?;
        let v: f64 = rec[1].parse().map_err(|_| Error::parse(line, format!("bad bandwidth {:?}", &rec[1])))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::parse(line, format!("bandwidth {v} must be positive")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::parse(1, "trace has no rows"));
    }
    Ok(values)
}

pub fn read_trace_csv(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    parse_trace_csv(&text)
}

/// Position on the bandwidth timeline, measured in process samples.
#[derive(Debug, Clone)]
pub struct BandwidthClock {
    process: BandwidthProcess,
    prev: f64,
    next: f64,
    frac: f64,
}

impl BandwidthClock {
    pub fn new(mut process: BandwidthProcess) -> Self {
        let prev = process.bandwidth_next();
        let next = process.bandwidth_next();
        Self { process, prev, next, frac: 0.0 }
    }

    pub fn value(&self) -> f64 {
        if self.frac == 0.0 {
            self.prev
        } else {
            self.prev + self.frac * (self.next - self.prev)
        }
    }

    /// Moves the clock forward by `samples` (fractional) steps.
    pub fn advance(&mut self, samples: f64) {
        self.frac += samples;
        while self.frac >= 1.0 - 1e-12 {
            self.prev = self.next;
            self.next = self.process.bandwidth_next();
            self.frac = (self.frac - 1.0).max(0.0);
        }
    }
}
