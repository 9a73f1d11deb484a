//! In-loop post-reconstruction filters: directional deringing and the
//! constrained low-pass filter, with per-superblock decisions and both
//! pipeline orders.

pub mod direction;
pub mod filters;
pub mod inloop;

pub use direction::{find_direction, DIR_BLOCK, NUM_DIRECTIONS};
pub use filters::{clpf_block, dering_block, dering_max_deviation, dering_thresholds};
pub use inloop::{
    apply_inloop_decode, apply_inloop_encode, FilterDecision, InloopModels, PipelineOrder,
    SB_SIZE,
};
