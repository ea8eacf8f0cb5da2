//! The scheduling environment: a stream of inference tasks whose feature
//! maps have skewed channel importance, running over a link whose bandwidth
//! drifts while the agent is still deciding.

mod bandwidth;
mod state;

pub use bandwidth::{
    parse_trace_csv, read_trace_csv, BandwidthClock, BandwidthProcess, BandwidthSpec, WALK_LOWER_MBPS,
    WALK_UPPER_MBPS,
};
pub use state::{encode_state, summarize_importance, EnvState, Transition, STATE_DIM, SUMMARY_TOP};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{
    apply_scam, calibrate_skew, importance_distribution, synth_feature_map, ChannelAttnParams, ImportanceDist,
    SpatialAttnParams, TARGET_TOP3_MASS,
};
use crate::model::{ActionGrid, CostParams, EnvAction, Evaluation, SystemModel, WorkloadSpec};
use crate::rng::{substream, STREAM_ENV};
use crate::{Error, Result};

/// Nominal step length in ms. Only the ratio `t_as / horizon` matters.
pub const DEFAULT_HORIZON_MS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub eta: f64,
    pub lambda: f64,
    /// Steps per logged episode. The task itself is continuing.
    pub episode_len: usize,
    /// Number of distinct synthetic feature maps tasks are drawn from.
    pub pool_size: usize,
    /// Channel attention reduction ratio.
    pub reduction: usize,
    /// Zipf exponent of channel amplitudes; calibrated to a 0.6 top-3 mass
    /// when absent.
    pub skew: Option<f64>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { eta: 0.5, lambda: 0.5, episode_len: 64, pool_size: 32, reduction: 4, skew: None }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::config(format!("eta {} outside [0, 1]", self.eta)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::config(format!("lambda {} outside (0, 1)", self.lambda)));
        }
        if self.episode_len == 0 || self.pool_size == 0 || self.reduction == 0 {
            return Err(Error::config("episode_len, pool_size and reduction must be positive"));
        }
        if let Some(s) = self.skew {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::config(format!("skew {s} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Everything fixed about an experiment except the seed and bandwidth.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub system: SystemModel,
    pub workload: WorkloadSpec,
    pub grid: ActionGrid,
    pub config: EnvConfig,
}

impl Scenario {
    pub fn cost_params(&self) -> Result<CostParams> {
        CostParams::new(self.config.eta, self.system.edge().max_power)
    }
}

/// Detailed result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub action_index: usize,
    pub action: EnvAction,
    /// Bandwidth the action ran under, Mbps.
    pub bandwidth: f64,
    pub evaluation: Evaluation,
    pub reward: f64,
    pub next_state: EnvState,
}

/// Interface the training loop needs from an environment.
pub trait ConcurrentEnv {
    fn num_actions(&self) -> usize;
    fn episode_len(&self) -> usize;
    fn state(&self) -> &EnvState;
    /// Asks `policy` for an action on the current state and applies it once
    /// `t_as` of the `horizon` has elapsed.
    fn concurrent_step(
        &mut self,
        policy: &mut dyn FnMut(&EnvState) -> usize,
        t_as: f64,
        horizon: f64,
    ) -> Result<Transition>;
}

pub fn check_slip(t_as: f64, horizon: f64) -> Result<f64> {
    if !(horizon.is_finite() && horizon > 0.0 && t_as > 0.0 && t_as <= horizon) {
        return Err(Error::domain(format!("need 0 < t_as <= H, got t_as={t_as}, H={horizon}")));
    }
    Ok(t_as / horizon)
}

#[derive(Debug, Clone)]
pub struct Environment {
    scenario: Scenario,
    cost: CostParams,
    clock: BandwidthClock,
    tasks: Vec<ImportanceDist>,
    rng: ChaCha8Rng,
    state: EnvState,
    last: Option<StepOutcome>,
}

/// Precomputes `pool_size` importance distributions from seeded feature
/// maps passed through seeded attention weights.
fn build_task_pool(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Result<Vec<ImportanceDist>> {
    let w = &scenario.workload;
    let cfg = &scenario.config;
    let skew = match cfg.skew {
        Some(s) => s,
        None => calibrate_skew(w.channels, TARGET_TOP3_MASS)?,
    };
    let ca = ChannelAttnParams::seeded(w.channels, cfg.reduction.min(w.channels), rng)?;
    let sa = SpatialAttnParams::seeded(rng);
    (0..cfg.pool_size)
        .map(|_| {
            let f = synth_feature_map(rng.random(), skew, w.channels, w.height, w.width)?;
            Ok(importance_distribution(&apply_scam(&f, &ca, &sa)?))
        })
        .collect()
}

impl Environment {
    /// Fresh environment; the same `(scenario, bandwidth, seed)` always yields
    /// the same trajectory.
    pub fn new(scenario: &Scenario, bandwidth: BandwidthProcess, seed: u64) -> Result<Self> {
        scenario.config.validate()?;
        scenario.workload.validate()?;
        let cost = scenario.cost_params()?;
        let mut rng = substream(seed, STREAM_ENV);
        let tasks = build_task_pool(scenario, &mut rng)?;
        let clock = BandwidthClock::new(bandwidth);
        let first = rng.random_range(0..tasks.len());
        let state = EnvState::new(scenario.config.lambda, scenario.config.eta, &tasks[first], clock.value());
        Ok(Self { scenario: scenario.clone(), cost, clock, tasks, rng, state, last: None })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.scenario.grid
    }

    pub fn cost_params(&self) -> &CostParams {
        &self.cost
    }

    pub fn last_outcome(&self) -> Option<&StepOutcome> {
        self.last.as_ref()
    }

    /// Cost model evaluation of `action` on the current task at `bandwidth`.
    pub fn evaluate(&self, action: &EnvAction, bandwidth: f64) -> Result<Evaluation> {
        self.scenario.system.evaluate(&self.scenario.workload, action, bandwidth, &self.cost)
    }

    /// Blocking step: the whole step elapses before the action lands.
    pub fn step(&mut self, action: &EnvAction) -> Result<StepOutcome> {
        let index = self.scenario.grid.index_of(action)?;
        self.concurrent_step(&mut |_| index, DEFAULT_HORIZON_MS, DEFAULT_HORIZON_MS)?;
        Ok(self.last.clone().expect("step just recorded"))
    }

    fn advance(&mut self, index: usize, slip: f64) -> Result<StepOutcome> {
        let action = self.scenario.grid.decode(index)?;
        self.clock.advance(slip);
        let bandwidth = self.clock.value();
        let evaluation = self.evaluate(&action, bandwidth)?;
        let task = self.rng.random_range(0..self.tasks.len());
        let cfg = &self.scenario.config;
        let next_state = EnvState::new(cfg.lambda, cfg.eta, &self.tasks[task], bandwidth);
        Ok(StepOutcome { action_index: index, action, bandwidth, evaluation, reward: -evaluation.cost, next_state })
    }
}

impl ConcurrentEnv for Environment {
    fn num_actions(&self) -> usize {
        self.scenario.grid.len()
    }

    fn episode_len(&self) -> usize {
        self.scenario.config.episode_len
    }

    fn state(&self) -> &EnvState {
        &self.state
    }

    fn concurrent_step(
        &mut self,
        policy: &mut dyn FnMut(&EnvState) -> usize,
        t_as: f64,
        horizon: f64,
    ) -> Result<Transition> {
        let slip = check_slip(t_as, horizon)?;
        let index = policy(&self.state);
        let out = self.advance(index, slip)?;
        let prev = std::mem::replace(&mut self.state, out.next_state.clone());
        let t = Transition {
            state: prev,
            action: index,
            reward: out.reward,
            next_state: out.next_state.clone(),
            t_as,
            horizon,
            priority: 1.0,
        };
        self.last = Some(out);
        Ok(t)
    }
}
