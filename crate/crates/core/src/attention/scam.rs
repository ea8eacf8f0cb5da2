use rand::Rng;

use super::{sigmoid, Tensor3};
use crate::{Error, Result};

/// Shared two-layer MLP of the channel branch: `C -> C/r -> C`, ReLU in
/// between and no biases. Weights are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAttnParams {
    channels: usize,
    hidden: usize,
    /// `hidden x channels`
    pub w1: Vec<f64>,
    /// `channels x hidden`
    pub w2: Vec<f64>,
}

/// 3x3 convolution over the stacked `[avg; max]` channel-pooled maps.
/// `kernel[k * 9 + dy * 3 + dx]` with `k = 0` the average map.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialAttnParams {
    pub kernel: [f64; 18],
    pub bias: f64,
}

const INIT_RANGE: f64 = 0.1;

impl ChannelAttnParams {
    pub fn new(channels: usize, reduction: usize, w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        if channels == 0 || reduction == 0 || !channels.is_multiple_of(reduction) {
            return Err(Error::domain(format!("reduction {reduction} must divide {channels} channels")));
        }
        let hidden = channels / reduction;
        if w1.len() != hidden * channels || w2.len() != channels * hidden {
            return Err(Error::domain(format!("MLP weights must be {hidden}x{channels} and {channels}x{hidden}")));
        }
        if w1.iter().chain(&w2).any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite MLP weight"));
        }
        Ok(Self { channels, hidden, w1, w2 })
    }

    pub fn zeros(channels: usize, reduction: usize) -> Result<Self> {
        let hidden = channels.checked_div(reduction).unwrap_or(0);
        Self::new(channels, reduction, vec![0.0; hidden * channels], vec![0.0; channels * hidden])
    }

    /// Uniform `(-0.1, 0.1)` weights drawn from `rng`.
    pub fn seeded<R: Rng>(channels: usize, reduction: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(channels, reduction)?;
        for x in p.w1.iter_mut().chain(p.w2.iter_mut()) {
            *x = rng.random_range(-INIT_RANGE..INIT_RANGE);
        }
        Ok(p)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    fn mlp(&self, x: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = self
            .w1
            .chunks(self.channels)
            .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>().max(0.0))
            .collect();
        self.w2
            .chunks(self.hidden)
            .map(|row| row.iter().zip(&h).map(|(w, v)| w * v).sum())
            .collect()
    }
}

impl SpatialAttnParams {
    pub fn zeros() -> Self {
        Self { kernel: [0.0; 18], bias: 0.0 }
    }

    pub fn seeded<R: Rng>(rng: &mut R) -> Self {
        let mut p = Self::zeros();
        for x in p.kernel.iter_mut() {
            *x = rng.random_range(-INIT_RANGE..INIT_RANGE);
        }
        p.bias = rng.random_range(-INIT_RANGE..INIT_RANGE);
        p
    }
}

/// Per-channel attention weights in `(0, 1)`.
pub fn channel_attention(f: &Tensor3, p: &ChannelAttnParams) -> Result<Vec<f64>> {
    if f.channels() != p.channels {
        return Err(Error::domain(format!(
            "tensor has {} channels, attention expects {}",
            f.channels(),
            p.channels
        )));
    }
    let n = f.spatial_len() as f64;
    let (avg, max): (Vec<f64>, Vec<f64>) = (0..f.channels())
        .map(|c| {
            let ch = f.channel(c);
            (ch.iter().sum::<f64>() / n, ch.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        })
        .unzip();
    let (a, m) = (p.mlp(&avg), p.mlp(&max));
    Ok(a.iter().zip(&m).map(|(x, y)| sigmoid(x + y)).collect())
}

/// Per-location attention weights in `(0, 1)`, row-major `H x W`.
pub fn spatial_attention(f: &Tensor3, p: &SpatialAttnParams) -> Result<Vec<f64>> {
    let (c, h, w) = f.shape();
    let hw = h * w;
    let mut avg = vec![0.0; hw];
    let mut max = vec![f64::NEG_INFINITY; hw];
    for ch in 0..c {
        for (i, &x) in f.channel(ch).iter().enumerate() {
            avg[i] += x;
            max[i] = max[i].max(x);
        }
    }
    for a in &mut avg {
        *a /= c as f64;
    }
    let pooled = [avg, max];
    let mut out = vec![0.0; hw];
    for y in 0..h {
        for x in 0..w {
            let mut acc = p.bias;
            for (k, map) in pooled.iter().enumerate() {
                for dy in 0..3 {
                    let yy = y as isize + dy as isize - 1;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    for dx in 0..3 {
                        let xx = x as isize + dx as isize - 1;
                        if xx < 0 || xx >= w as isize {
                            continue;
                        }
                        acc += p.kernel[k * 9 + dy * 3 + dx] * map[yy as usize * w + xx as usize];
                    }
                }
            }
            out[y * w + x] = sigmoid(acc);
        }
    }
    Ok(out)
}

/// Channel attention first, then spatial attention on the re-weighted map.
pub fn apply_scam(f: &Tensor3, cp: &ChannelAttnParams, sp: &SpatialAttnParams) -> Result<Tensor3> {
    let mc = channel_attention(f, cp)?;
    let mut attended = f.clone();
    for (c, weight) in mc.iter().enumerate() {
        for x in attended.channel_mut(c) {
            *x *= weight;
        }
    }
    let ms = spatial_attention(&attended, sp)?;
    for c in 0..attended.channels() {
        for (x, s) in attended.channel_mut(c).iter_mut().zip(&ms) {
            *x *= s;
        }
    }
    Ok(attended)
}
