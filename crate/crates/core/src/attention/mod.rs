//! Spatial-channel attention over feature maps and the importance-driven
//! split of channels between local and remote inference.

mod importance;
mod scam;
mod synth;
mod tensor;

pub use importance::{importance_distribution, split_topk, ImportanceDist, TopkSplit};
pub use scam::{apply_scam, channel_attention, spatial_attention, ChannelAttnParams, SpatialAttnParams};
pub use synth::{calibrate_skew, synth_feature_map, zipf_top_mass, TARGET_TOP3_MASS};
pub use tensor::Tensor3;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
