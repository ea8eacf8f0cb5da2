//! CSV row types. Every file starts with a header row.

use std::fs::File;
use std::path::Path;

use serde::Serialize;

use crate::env::StepOutcome;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub step: u64,
    pub f_c: f64,
    pub f_g: f64,
    pub f_m: f64,
    pub xi: f64,
    pub bandwidth: f64,
    pub tti_local: f64,
    pub tti_comp: f64,
    pub tti_off: f64,
    pub tti_cloud: f64,
    pub tti_total: f64,
    pub eti_compute: f64,
    pub eti_offload: f64,
    pub eti_total: f64,
    pub cost: f64,
    pub reward: f64,
    /// Reward accumulated so far in the current episode window.
    pub episode_return: f64,
}

impl RunRecord {
    pub fn from_outcome(run_id: &str, step: u64, out: &StepOutcome, episode_return: f64) -> Self {
        let (l, e) = (&out.evaluation.latency, &out.evaluation.energy);
        Self {
            run_id: run_id.to_string(),
            step,
            f_c: out.action.freq.f_c,
            f_g: out.action.freq.f_g,
            f_m: out.action.freq.f_m,
            xi: out.action.xi,
            bandwidth: out.bandwidth,
            tti_local: l.local,
            tti_comp: l.comp,
            tti_off: l.off,
            tti_cloud: l.cloud,
            tti_total: l.total,
            eti_compute: e.compute,
            eti_offload: e.offload,
            eti_total: e.total,
            cost: out.evaluation.cost,
            reward: out.reward,
            episode_return,
        }
    }
}

/// Per-policy aggregate of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub policy: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub step: u64,
    pub bandwidth: f64,
    pub index: usize,
    pub f_c: f64,
    pub f_g: f64,
    pub f_m: f64,
    pub xi: f64,
    pub tti_total: f64,
    pub eti_total: f64,
    pub cost: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRow {
    pub rank: usize,
    pub channel: usize,
    pub importance: f64,
    pub cumulative: f64,
}

/// Mean and population standard deviation; `(0, 0)` for no samples.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Streams rows of one type to a CSV file.
pub struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    /// Creates the file and writes the header of `T` even if no rows follow.
    pub fn create<T: Serialize + HeaderRow>(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| Error::File { path: dir.to_path_buf(), source })?;
        }
        let file = File::create(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        writer.write_record(T::HEADER)?;
        Ok(Self { writer })
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> Result<()> {
        self.writer.serialize(row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Column names, so empty files still carry a header.
pub trait HeaderRow {
    const HEADER: &'static [&'static str];
}

impl HeaderRow for RunRecord {
    const HEADER: &'static [&'static str] = &[
        "run_id",
        "step",
        "f_c",
        "f_g",
        "f_m",
        "xi",
        "bandwidth",
        "tti_local",
        "tti_comp",
        "tti_off",
        "tti_cloud",
        "tti_total",
        "eti_compute",
        "eti_offload",
        "eti_total",
        "cost",
        "reward",
        "episode_return",
    ];
}

impl HeaderRow for SummaryRow {
    const HEADER: &'static [&'static str] = &["policy", "metric", "mean", "std", "n"];
}

impl HeaderRow for SweepRow {
    const HEADER: &'static [&'static str] = &["param", "value", "metric", "mean", "std"];
}

impl HeaderRow for OracleRow {
    const HEADER: &'static [&'static str] =
        &["step", "bandwidth", "index", "f_c", "f_g", "f_m", "xi", "tti_total", "eti_total", "cost", "evaluations"];
}

impl HeaderRow for ImportanceRow {
    const HEADER: &'static [&'static str] = &["rank", "channel", "importance", "cumulative"];
}

pub fn write_csv<T: Serialize + HeaderRow>(path: &Path, rows: &[T]) -> Result<()> {
    let mut sink = CsvSink::create::<T>(path)?;
    for r in rows {
        sink.write(r)?;
    }
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        assert_eq!(mean_std(&[2.0, 4.0]), (3.0, 1.0));
    }

    #[test]
    fn header_matches_serialized_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&p, &[SweepRow { param: "eta".into(), value: 0.5, metric: "cost".into(), mean: 1.0, std: 0.0 }])
            .unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "param,value,metric,mean,std\neta,0.5,cost,1.0,0.0\n");
        let empty = dir.path().join("nested/e.csv");
        write_csv::<RunRecord>(&empty, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&empty).unwrap().lines().count(), 1);
    }
}
