//! Deep Q-learning with a target network, prioritized replay and the
//! concurrent (slip-discounted) backup.

mod adam;
mod checkpoint;
mod dqn;
mod mlp;
mod replay;

pub use adam::{Adam, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC};
pub use dqn::{
    act_epsilon_greedy, argmax, concurrent_target, q_forward, sync_target, td_target_concurrent, train, train_step,
    train_with, Agent, AgentConfig, TrainLog, TrainSchedule, PRIORITY_FLOOR,
};
pub use mlp::{huber, stack_rows, weighted_huber_grad, Dense, LossGrad, Mlp, HUBER_DELTA};
pub use replay::{sample_prioritized, ReplayMemory, Sample, SumTree};
