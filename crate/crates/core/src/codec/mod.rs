//! The still-image / intra codec: rate-distortion-optimal partitioning of
//! lapped transform blocks, a Haar DC hierarchy with AC-copy and
//! chroma-from-luma band prediction, PVQ coefficient coding through a
//! single range coder per frame, and in-loop directional filtering — plus
//! the bitstream container, PSNR metrics, and basis-function rendering.

pub mod basis;
pub mod frame;
pub mod metrics;
pub mod plane;
pub mod rdo;

pub use basis::{render_dc_basis, render_dc_impulse};
pub use frame::{
    decode, decode_frame, encode, encode_frame, encode_two_pass, first_pass_log, EncodeOutput,
    EncoderConfig, RateMode, MAGIC, QP_PER_FRAME, SB_SIZE, VERSION,
};
pub use metrics::{psnr, psnr_frame, PSNR_CAP};
pub use plane::{derive_chroma_tree, CodecModels, CoeffStore, Tools};
pub use rdo::{leaf_cost, rdo_lambda, rdo_partition, tree_cost, MIN_TX_SIZE};
