//! Per-tensor int8 affine codec for offloaded features.
//!
//! Codes live in the unsigned range `[0, 255]` during computation and are
//! stored shifted by -128 as `i8`. The representable range always contains
//! zero, so `zero_point` is an exact code.

use crate::model::{WorkloadSpec, INT8_COMPRESSION_RATIO};
use crate::{Error, Result};

/// Scale, zero point and length framing each block.
pub const HEADER_BITS: f64 = 96.0;

const LEVELS: f64 = 255.0;
const SHIFT: i16 = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedBlock {
    pub values: Vec<i8>,
    pub scale: f64,
    pub zero_point: i8,
    pub original_len: usize,
}

fn to_signed(u: i16) -> i8 {
    (u - SHIFT) as i8
}

fn to_unsigned(q: i8) -> i16 {
    i16::from(q) + SHIFT
}

/// Affine quantization with round-half-away-from-zero.
pub fn quantize(x: &[f64]) -> Result<QuantizedBlock> {
    if x.is_empty() {
        return Err(Error::domain("cannot quantize an empty array"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("cannot quantize non-finite values"));
    }
    let (min, max) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if min == max {
        return Ok(quantize_constant(min, x.len()));
    }
    let (lo, hi) = (min.min(0.0), max.max(0.0));
    let scale = (hi - lo) / LEVELS;
    let zp = (-lo / scale).round().clamp(0.0, LEVELS) as i16;
    let values = x
        .iter()
        .map(|v| to_signed(((v / scale).round() + f64::from(zp)).clamp(0.0, LEVELS) as i16))
        .collect();
    Ok(QuantizedBlock { values, scale, zero_point: to_signed(zp), original_len: x.len() })
}

/// A constant block reproduces its value exactly: the scale carries the
/// magnitude and every code sits one step from the zero point.
fn quantize_constant(c: f64, len: usize) -> QuantizedBlock {
    let (scale, zp, code) = if c == 0.0 {
        (1.0, 0, 0)
    } else if c > 0.0 {
        (c, 0, 1)
    } else {
        (-c, 1, 0)
    };
    QuantizedBlock { values: vec![to_signed(code); len], scale, zero_point: to_signed(zp), original_len: len }
}

pub fn dequantize(q: &QuantizedBlock) -> Vec<f64> {
    let zp = to_unsigned(q.zero_point);
    q.values.iter().map(|&v| f64::from(to_unsigned(v) - zp) * q.scale).collect()
}

/// Bits on the wire for offloading `xi` of the feature map: the int8
/// payload plus one block header, or nothing when nothing is offloaded.
pub fn compressed_bits(w: &WorkloadSpec, xi: f64) -> Result<f64> {
    crate::model::check_proportion(xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(xi * w.feature_bits / INT8_COMPRESSION_RATIO + HEADER_BITS)
}

impl QuantizedBlock {
    /// Little-endian dump: `u32` length, `f32` scale, `u8` zero point in
    /// unsigned code space, then one `u8` code per value.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.values.len());
        out.extend_from_slice(&(self.original_len as u32).to_le_bytes());
        out.extend_from_slice(&(self.scale as f32).to_le_bytes());
        out.push(to_unsigned(self.zero_point) as u8);
        out.extend(self.values.iter().map(|&v| to_unsigned(v) as u8));
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let head = bytes.get(..9).ok_or_else(|| Error::parse(1, "block shorter than its 9-byte header"))?;
        let len = u32::from_le_bytes(head[0..4].try_into().expect("4 bytes")) as usize;
        let scale = f32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::parse(1, format!("scale {scale} must be finite and positive")));
        }
        let body = &bytes[9..];
        if body.len() != len {
            return Err(Error::parse(1, format!("header declares {len} values, body has {}", body.len())));
        }
        Ok(Self {
            values: body.iter().map(|&b| to_signed(i16::from(b))).collect(),
            scale: f64::from(scale),
            zero_point: to_signed(i16::from(head[8])),
            original_len: len,
        })
    }
}
