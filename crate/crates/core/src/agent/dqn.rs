use ndarray::ArrayView2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::{stack_rows, weighted_huber_grad, Mlp};
use super::replay::{sample_prioritized, ReplayMemory};
use crate::env::{encode_state, ConcurrentEnv, Transition, STATE_DIM};
use crate::rng::{substream, STREAM_AGENT_INIT, STREAM_EXPLORATION, STREAM_REPLAY};
use crate::{Error, Result};

/// Floor added to |TD error| so no stored item becomes unreachable.
pub const PRIORITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub lr: f64,
    pub buffer_capacity: usize,
    pub batch: usize,
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    /// Environment steps between hard target copies.
    pub target_sync: u64,
    pub alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Environment steps between gradient updates.
    pub train_every: u64,
    /// Environment steps collected before the first update.
    pub learning_starts: u64,
    /// Rewards (mJ) are multiplied by this before entering the backup.
    pub reward_scale: f64,
    /// Subtract the running mean reward before scaling. A constant shift
    /// leaves the optimal policy unchanged but keeps Q-values near zero.
    pub center_rewards: bool,
    pub hidden: Vec<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            buffer_capacity: 1_000_000,
            batch: 256,
            gamma: 0.8,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 20_000,
            target_sync: 1000,
            alpha: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            train_every: 4,
            learning_starts: 1000,
            reward_scale: 1e-3,
            center_rewards: true,
            hidden: vec![128, 64, 32],
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lr, self.alpha, self.reward_scale];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("lr, alpha and reward_scale must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        for e in [self.eps_start, self.eps_end, self.beta_start, self.beta_end] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(format!("schedule endpoint {e} outside [0, 1]")));
            }
        }
        if self.buffer_capacity == 0 || self.batch == 0 || self.target_sync == 0 || self.train_every == 0 {
            return Err(Error::config("buffer_capacity, batch, target_sync and train_every must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden layer sizes must be positive"));
        }
        Ok(())
    }

    pub fn epsilon(&self, step: u64) -> f64 {
        let frac = if self.eps_decay_steps == 0 { 1.0 } else { (step as f64 / self.eps_decay_steps as f64).min(1.0) };
        self.eps_start * (1.0 - frac) + self.eps_end * frac
    }

    pub fn beta(&self, step: u64, total: u64) -> f64 {
        let frac = if total == 0 { 1.0 } else { (step as f64 / total as f64).min(1.0) };
        self.beta_start * (1.0 - frac) + self.beta_end * frac
    }

    pub fn layer_dims(&self, inputs: usize, actions: usize) -> Vec<usize> {
        let mut d = vec![inputs];
        d.extend(&self.hidden);
        d.push(actions);
        d
    }
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub config: AgentConfig,
    pub online: Mlp,
    pub target: Mlp,
    pub adam: Adam,
    pub replay: ReplayMemory,
    pub env_steps: u64,
    pub updates: u64,
    /// Sum of all rewards observed, for centering.
    pub reward_sum: f64,
    pub explore_rng: ChaCha8Rng,
    pub replay_rng: ChaCha8Rng,
}

impl Agent {
    /// Online and target networks get independent seeded initialisations.
    pub fn new(config: AgentConfig, inputs: usize, actions: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let dims = config.layer_dims(inputs, actions);
        let mut init = substream(seed, STREAM_AGENT_INIT);
        let online = Mlp::seeded(&dims, &mut init)?;
        let target = Mlp::seeded(&dims, &mut init)?;
        Ok(Self {
            adam: Adam::new(&online, config.lr),
            replay: ReplayMemory::new(config.buffer_capacity, config.alpha),
            online,
            target,
            env_steps: 0,
            updates: 0,
            reward_sum: 0.0,
            explore_rng: substream(seed, STREAM_EXPLORATION),
            replay_rng: substream(seed, STREAM_REPLAY),
            config,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.online.outputs()
    }

    /// Reward offset applied before scaling.
    pub fn reward_baseline(&self) -> f64 {
        if self.config.center_rewards && self.env_steps > 0 {
            self.reward_sum / self.env_steps as f64
        } else {
            0.0
        }
    }

    pub fn greedy(&self, x: &[f64]) -> usize {
        argmax(&q_forward(&self.online, x))
    }
}

pub fn q_forward(params: &Mlp, x: &[f64]) -> Vec<f64> {
    params.forward(x)
}

/// First index of the largest value.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

pub fn act_epsilon_greedy<R: Rng>(params: &Mlp, x: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..params.outputs())
    } else {
        argmax(&q_forward(params, x))
    }
}

/// Backup with the discount raised to the fraction of the step the
/// decision consumed: `r + gamma^(t_as/H) * max_next`.
pub fn concurrent_target(reward: f64, slip: f64, max_next: f64, gamma: f64) -> f64 {
    reward + gamma.powf(slip) * max_next
}

pub fn td_target_concurrent(t: &Transition, target: &Mlp, gamma: f64) -> f64 {
    let q = q_forward(target, &encode_state(&t.next_state));
    let max_next = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    concurrent_target(t.reward, t.slip(), max_next, gamma)
}

pub fn sync_target(agent: &mut Agent) {
    agent.target.copy_from(&agent.online);
}

/// One prioritized minibatch update. `None` while the memory holds fewer
/// items than a batch.
pub fn train_step(agent: &mut Agent, beta: f64) -> Option<f64> {
    let baseline = agent.reward_baseline();
    let cfg = &agent.config;
    if agent.replay.len() < cfg.batch {
        return None;
    }
    let sample = sample_prioritized(&agent.replay, cfg.batch, beta, &mut agent.replay_rng);
    let items: Vec<&Transition> = sample.indices.iter().map(|i| agent.replay.get(*i)).collect();
    let enc = |s| encode_state(s);
    let states: Vec<[f64; STATE_DIM]> = items.iter().map(|t| enc(&t.state)).collect();
    let nexts: Vec<[f64; STATE_DIM]> = items.iter().map(|t| enc(&t.next_state)).collect();
    let x = stack_rows(&states.iter().map(|r| &r[..]).collect::<Vec<_>>(), STATE_DIM);
    let x_next = stack_rows(&nexts.iter().map(|r| &r[..]).collect::<Vec<_>>(), STATE_DIM);

    let q_next = agent.target.forward_batch(x_next.view());
    let targets: Vec<f64> = items
        .iter()
        .zip(q_next.rows())
        .map(|(t, q)| {
            let max_next = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            concurrent_target((t.reward - baseline) * cfg.reward_scale, t.slip(), max_next, cfg.gamma)
        })
        .collect();
    let actions: Vec<usize> = items.iter().map(|t| t.action).collect();

    let lg = weighted_huber_grad(&agent.online, ArrayView2::from(&x), &actions, &targets, &sample.weights);
    agent.adam.step(&mut agent.online, &lg.grads);
    for (i, d) in sample.indices.iter().zip(&lg.td) {
        agent.replay.set_priority(*i, d.abs() + PRIORITY_FLOOR);
    }
    agent.updates += 1;
    Some(lg.loss)
}

/// Timing of a training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    pub steps: u64,
    pub t_as: f64,
    pub horizon: f64,
    /// Steps over which the importance-sampling exponent reaches its final
    /// value; differs from `steps` when a run stops partway through a budget.
    pub anneal_steps: u64,
}

impl TrainSchedule {
    pub fn new(steps: u64, t_as: f64, horizon: f64) -> Self {
        Self { steps, t_as, horizon, anneal_steps: steps }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// Summed reward of each completed episode window.
    pub episode_returns: Vec<f64>,
    pub losses: Vec<f64>,
}

pub fn train<E: ConcurrentEnv>(env: &mut E, agent: &mut Agent, schedule: TrainSchedule) -> Result<TrainLog> {
    train_with(env, agent, schedule, |_, _| {})
}

/// Runs the concurrent DQN loop for `schedule.steps` environment steps,
/// calling `on_step` after every transition.
pub fn train_with<E: ConcurrentEnv>(
    env: &mut E,
    agent: &mut Agent,
    schedule: TrainSchedule,
    mut on_step: impl FnMut(&E, &Transition),
) -> Result<TrainLog> {
    if env.num_actions() != agent.num_actions() {
        return Err(Error::config(format!(
            "agent has {} outputs but the environment has {} actions",
            agent.num_actions(),
            env.num_actions()
        )));
    }
    let mut log = TrainLog::default();
    let episode_len = env.episode_len() as u64;
    let mut ret = 0.0;
    let start = agent.env_steps;
    for k in 0..schedule.steps {
        let eps = agent.config.epsilon(agent.env_steps);
        let (online, rng) = (&agent.online, &mut agent.explore_rng);
        let t = env.concurrent_step(
            &mut |s| act_epsilon_greedy(online, &encode_state(s), eps, rng),
            schedule.t_as,
            schedule.horizon,
        )?;
        on_step(env, &t);
        ret += t.reward;
        if (k + 1) % episode_len == 0 {
            log.episode_returns.push(ret);
            ret = 0.0;
        }
        agent.reward_sum += t.reward;
        agent.replay.push(t);
        agent.env_steps += 1;
        let cfg = &agent.config;
        if agent.env_steps >= cfg.learning_starts && agent.env_steps.is_multiple_of(cfg.train_every) {
            let beta = cfg.beta(agent.env_steps - start, schedule.anneal_steps);
            if let Some(loss) = train_step(agent, beta) {
                log.losses.push(loss);
            }
        }
        if agent.env_steps.is_multiple_of(agent.config.target_sync) {
            sync_target(agent);
        }
    }
    Ok(log)
}
