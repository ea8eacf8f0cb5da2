use serde::Serialize;

use crate::attention::ImportanceDist;

/// Number of ranked channel weights kept in the summary.
pub const SUMMARY_TOP: usize = 8;
/// Length of the state vector fed to the Q-network.
pub const STATE_DIM: usize = 2 + SUMMARY_TOP + 3;

/// What the scheduler sees before picking an action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvState {
    pub lambda: f64,
    pub eta: f64,
    /// Top-8 channel weights (descending, zero padded), then entropy and
    /// top-3 mass.
    pub importance_summary: [f64; SUMMARY_TOP + 2],
    /// Mbps.
    pub bandwidth: f64,
    pub channels: usize,
}

pub fn summarize_importance(d: &ImportanceDist) -> [f64; SUMMARY_TOP + 2] {
    let mut out = [0.0; SUMMARY_TOP + 2];
    for (slot, w) in out.iter_mut().zip(d.sorted_desc()) {
        *slot = w;
    }
    out[SUMMARY_TOP] = d.entropy();
    out[SUMMARY_TOP + 1] = d.top_mass(3);
    out
}

impl EnvState {
    pub fn new(lambda: f64, eta: f64, d: &ImportanceDist, bandwidth: f64) -> Self {
        Self { lambda, eta, importance_summary: summarize_importance(d), bandwidth, channels: d.len() }
    }
}

/// Maps a state to `[0, 1]^13`: lambda, eta, the eight top weights,
/// entropy over ln C, top-3 mass, and bandwidth rescaled from 2..8 Mbps.
pub fn encode_state(s: &EnvState) -> [f64; STATE_DIM] {
    let mut x = [0.0; STATE_DIM];
    x[0] = s.lambda;
    x[1] = s.eta;
    x[2..2 + SUMMARY_TOP].copy_from_slice(&s.importance_summary[..SUMMARY_TOP]);
    x[2 + SUMMARY_TOP] = if s.channels > 1 {
        s.importance_summary[SUMMARY_TOP] / (s.channels as f64).ln()
    } else {
        0.0
    };
    x[3 + SUMMARY_TOP] = s.importance_summary[SUMMARY_TOP + 1];
    x[4 + SUMMARY_TOP] = ((s.bandwidth - 2.0) / 6.0).clamp(0.0, 1.0);
    x
}

/// One replay entry. `t_as` and `horizon` are both in ms.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: EnvState,
    pub action: usize,
    pub reward: f64,
    pub next_state: EnvState,
    pub t_as: f64,
    pub horizon: f64,
    pub priority: f64,
}

impl Transition {
    /// Fraction of the step consumed by action selection.
    pub fn slip(&self) -> f64 {
        self.t_as / self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_importance_has_ln_c_entropy() {
        let d = ImportanceDist::from_masses(&[1.0; 8]).unwrap();
        let s = EnvState::new(0.5, 0.5, &d, 5.0);
        assert!((s.importance_summary[SUMMARY_TOP] - 8f64.ln()).abs() < 1e-12);
        assert!((s.importance_summary[SUMMARY_TOP + 1] - 3.0 / 8.0).abs() < 1e-12);
        let x = encode_state(&s);
        assert!((x[10] - 1.0).abs() < 1e-12);
        assert_eq!(x[12], 0.5);
    }

    #[test]
    fn short_distributions_are_zero_padded() {
        let d = ImportanceDist::from_masses(&[3.0, 1.0]).unwrap();
        let s = EnvState::new(0.2, 0.7, &d, 9.0);
        assert_eq!(&s.importance_summary[..4], &[0.75, 0.25, 0.0, 0.0]);
        let x = encode_state(&s);
        assert_eq!(x[0], 0.2);
        assert_eq!(x[1], 0.7);
        assert_eq!(x[12], 1.0);
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
