//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so the corpus stays valid on stable.

use std::path::{Path, PathBuf};

use dvfo_core::agent::Checkpoint;
use dvfo_core::attention::{importance_distribution, Tensor3};
use dvfo_core::env::parse_trace_csv;
use dvfo_core::harness::ExperimentConfig;
use dvfo_core::quant::{dequantize, QuantizedBlock};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn tensor_text_seeds() {
    for (path, bytes) in seeds("tensor_text") {
        let t = Tensor3::parse_text(text(&bytes)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let d = importance_distribution(&t);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn quant_block_seeds() {
    for (path, bytes) in seeds("quant_block") {
        let q = QuantizedBlock::decode(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(q.encode(), bytes);
        assert_eq!(dequantize(&q).len(), q.original_len);
    }
}

#[test]
fn bandwidth_trace_seeds() {
    for (path, bytes) in seeds("bandwidth_trace") {
        let v = parse_trace_csv(text(&bytes)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(v.iter().all(|b| *b > 0.0));
    }
}

#[test]
fn checkpoint_seeds() {
    for (path, bytes) in seeds("checkpoint") {
        let ck = Checkpoint::parse(text(&bytes)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ck.to_text().as_bytes(), bytes);
    }
}

#[test]
fn config_seeds() {
    for (path, bytes) in seeds("config") {
        let cfg = ExperimentConfig::from_toml_str(text(&bytes)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap();
    }
}
