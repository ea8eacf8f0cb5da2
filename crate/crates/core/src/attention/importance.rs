use std::cmp::Ordering;

use super::Tensor3;
use crate::{Error, Result};

/// Normalized per-channel importance; entries are non-negative and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceDist {
    weights: Vec<f64>,
}

/// Channel indices kept on the edge and sent to the cloud, each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopkSplit {
    pub local: Vec<usize>,
    pub remote: Vec<usize>,
}

impl ImportanceDist {
    /// Normalizes non-negative masses; an all-zero input becomes uniform.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::domain("importance masses must be finite, non-negative and non-empty"));
        }
        let total: f64 = masses.iter().sum();
        let weights = if total > 0.0 {
            masses.iter().map(|m| m / total).collect()
        } else {
            vec![1.0 / masses.len() as f64; masses.len()]
        };
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Channel indices ordered by descending importance, ties to the lower
    /// index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.weights.len()).collect();
        idx.sort_by(|&a, &b| {
            self.weights[b].partial_cmp(&self.weights[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        idx
    }

    pub fn sorted_desc(&self) -> Vec<f64> {
        self.ranking().into_iter().map(|i| self.weights[i]).collect()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }

    /// Total weight of the `k` most important channels.
    pub fn top_mass(&self, k: usize) -> f64 {
        self.sorted_desc().into_iter().take(k).sum()
    }
}

/// Per-channel L1 mass of the attended map, normalized to sum to one.
pub fn importance_distribution(f_out: &Tensor3) -> ImportanceDist {
    let masses: Vec<f64> = (0..f_out.channels())
        .map(|c| f_out.channel(c).iter().map(|x| x.abs()).sum())
        .collect();
    ImportanceDist::from_masses(&masses).expect("tensor values are finite")
}

/// Keeps the `round((1 - xi) * C)` most important channels local.
pub fn split_topk(d: &ImportanceDist, xi: f64) -> Result<TopkSplit> {
    crate::model::check_proportion(xi)?;
    let c = d.len();
    let k_local = (((1.0 - xi) * c as f64).round() as usize).min(c);
    let ranking = d.ranking();
    let mut local = ranking[..k_local].to_vec();
    let mut remote = ranking[k_local..].to_vec();
    local.sort_unstable();
    remote.sort_unstable();
    Ok(TopkSplit { local, remote })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_magnitude_channels_are_uniform() {
        let f = Tensor3::new(4, 1, 2, vec![1.0, -1.0, 2.0, 0.0, -0.5, -1.5, 1.0, 1.0]).unwrap();
        let d = importance_distribution(&f);
        assert!(d.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn single_active_channel_takes_all_weight() {
        let f = Tensor3::new(3, 1, 1, vec![0.0, -4.0, 0.0]).unwrap();
        assert_eq!(importance_distribution(&f).weights(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn magnitudes_three_to_one() {
        let f = Tensor3::new(2, 1, 2, vec![1.0, 2.0, 0.5, -0.5]).unwrap();
        assert_eq!(importance_distribution(&f).weights(), &[0.75, 0.25]);
    }

    #[test]
    fn all_zero_map_is_uniform() {
        let d = importance_distribution(&Tensor3::zeros(5, 2, 2).unwrap());
        assert!(d.weights().iter().all(|&w| w == 0.2));
    }

    #[test]
    fn uniform_entropy_is_log_c() {
        let d = ImportanceDist::from_masses(&[1.0; 8]).unwrap();
        assert!((d.entropy() - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn topk_worked_example() {
        let d = ImportanceDist::from_masses(&[0.4, 0.2, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05]).unwrap();
        let s = split_topk(&d, 0.75).unwrap();
        assert_eq!(s.local, vec![0, 1]);
        assert_eq!(s.remote, vec![2, 3, 4, 5, 6, 7]);
        assert_eq!(split_topk(&d, 0.0).unwrap().remote, Vec::<usize>::new());
        assert_eq!(split_topk(&d, 1.0).unwrap().local, Vec::<usize>::new());
        assert!(split_topk(&d, 1.5).is_err());
    }

    #[test]
    fn ties_keep_the_lower_index_local() {
        let d = ImportanceDist::from_masses(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(split_topk(&d, 0.5).unwrap().local, vec![0, 1]);
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one(masses in prop::collection::vec(0.0f64..1e6, 1..64)) {
            let d = ImportanceDist::from_masses(&masses).unwrap();
            prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(d.weights().iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn split_partitions_channels(masses in prop::collection::vec(0.0f64..10.0, 1..40), xi in 0.0f64..=1.0) {
            let d = ImportanceDist::from_masses(&masses).unwrap();
            let s = split_topk(&d, xi).unwrap();
            let c = masses.len();
            prop_assert_eq!(s.local.len(), ((1.0 - xi) * c as f64).round() as usize);
            let mut all: Vec<usize> = s.local.iter().chain(&s.remote).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..c).collect::<Vec<_>>());
            // Every local channel is at least as important as every remote one.
            for &l in &s.local {
                for &r in &s.remote {
                    prop_assert!(d.weights()[l] >= d.weights()[r]);
                }
            }
        }
    }
}
