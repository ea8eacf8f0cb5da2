//! Named random sub-streams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_ENV: &str = "env";
pub const STREAM_AGENT_INIT: &str = "agent-init";
pub const STREAM_EXPLORATION: &str = "exploration";
pub const STREAM_REPLAY: &str = "replay";
pub const STREAM_EVAL: &str = "eval";
pub const STREAM_BANDWIDTH: &str = "bandwidth";

/// FNV-1a, used only to turn a stream name into a ChaCha stream id.
fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent generator for `name` under `master`.
///
/// Streams with different names never overlap, so one component can be
/// re-seeded without perturbing the others.
pub fn substream(master: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(name));
    rng
}
