//! Deterministic simulator of DVFS-enabled edge-cloud collaborative DNN
//! inference.
//!
//! The crate is split along the simulator's layers:
//!
//! - [`model`]: device, power, latency, energy and cost models plus the
//!   exhaustive optimum used as a test oracle.
//! - [`attention`]: spatial-channel attention over feature maps, the
//!   per-channel importance distribution and the top-k local/remote split.
//! - [`quant`]: int8 affine codec for offloaded features.
//! - [`env`]: the concurrent MDP (bandwidth dynamics, state encoding, reward).
//! - [`agent`]: a from-scratch DQN with target network, prioritized replay and
//!   the fractional-discount concurrent backup.
//! - [`policy`]: baseline policies and weighted-summation fusion.
//! - [`harness`]: configuration, experiment orchestration and CSV reporting
//!   behind the `dvfo` binary.

pub mod agent;
pub mod attention;
pub mod env;
mod error;
pub mod harness;
pub mod model;
pub mod policy;
pub mod quant;
pub mod rng;

pub use error::{Error, Result};
