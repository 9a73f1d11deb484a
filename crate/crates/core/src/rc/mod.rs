//! Bit-reservoir rate control: the R = scale * Q^(-alpha) model with
//! Bessel-smoothed per-frame-type scale tracking, bit-usage-plan quantizer
//! selection, and one-pass / two-pass / chunked two-pass operation.

pub mod bessel;
pub mod model;
pub mod sim;
pub mod twopass;

pub use bessel::BesselFilter2;
pub use model::{
    predict_bits, q_from_qp, scale_from_frame, search_qp, FrameType, RcConfig, RcModel,
    RcPlan, NUM_FRAME_TYPES, QP_MAX,
};
pub use sim::{
    gop_types, run_first_pass, simulate_one_pass, simulate_two_pass, SimReport,
    SyntheticEncoder,
};
pub use twopass::{chunk_merge, TwoPassController, TwoPassLog, TwoPassRecord};
