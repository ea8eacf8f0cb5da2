use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor3;
use crate::{Error, Result};

/// Share of importance carried by the three leading channels in the
/// reference feature maps.
pub const TARGET_TOP3_MASS: f64 = 0.60;

/// Mass of the `k` heaviest ranks of a Zipf profile with exponent `skew`
/// over `channels` ranks.
pub fn zipf_top_mass(channels: usize, k: usize, skew: f64) -> f64 {
    let w = |r: usize| ((r + 1) as f64).powf(-skew);
    let top: f64 = (0..k.min(channels)).map(w).sum();
    let total: f64 = (0..channels).map(w).sum();
    top / total
}

/// Zipf exponent at which the top-3 ranks of `channels` carry `target`.
pub fn calibrate_skew(channels: usize, target: f64) -> Result<f64> {
    if channels <= 3 || !(target > 3.0 / channels as f64 && target < 1.0) {
        return Err(Error::domain(format!("cannot reach top-3 mass {target} with {channels} channels")));
    }
    let (mut lo, mut hi) = (0.0_f64, 16.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zipf_top_mass(channels, 3, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Seeded synthetic feature map whose per-channel energy follows a Zipf
/// profile over a random channel order, with multiplicative noise in
/// `[0.5, 1.5)` on every cell.
pub fn synth_feature_map(seed: u64, skew: f64, channels: usize, height: usize, width: usize) -> Result<Tensor3> {
    if !(skew.is_finite() && skew >= 0.0) {
        return Err(Error::domain(format!("skew must be finite and non-negative, got {skew}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..channels).collect();
    order.shuffle(&mut rng);
    let mut amplitude = vec![0.0; channels];
    for (rank, &c) in order.iter().enumerate() {
        amplitude[c] = ((rank + 1) as f64).powf(-skew);
    }
    let hw = height * width;
    let mut data = Vec::with_capacity(channels * hw);
    for a in &amplitude {
        data.extend((0..hw).map(|_| a * rng.random_range(0.5..1.5)));
    }
    Tensor3::new(channels, height, width, data)
}
