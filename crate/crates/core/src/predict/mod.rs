//! Intra prediction helpers: Haar DC hierarchy, static superblock DC
//! prediction, AC first-row/column copying, and frequency-domain
//! chroma-from-luma.

pub mod accopy;
pub mod cfl;
pub mod haar;
pub mod sbdc;

pub use accopy::{ac_copy_predict, NeighborCoeffs};
pub use cfl::{cfl_shape_predict, tf_merge4};
pub use haar::{haar_dc_expand, haar_dc_merge, DcTree};
pub use sbdc::predict_sb_dc;
