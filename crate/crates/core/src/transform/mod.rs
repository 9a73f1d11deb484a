pub mod dct;
pub mod lapping;
pub mod partition;
pub mod wht;

pub use dct::{dct2d_forward, dct2d_inverse, dct_matrix, CoeffBlock, SUPPORTED_SIZES};
pub use lapping::{apply_lapping, LapDirection, LappingFilter4};
pub use partition::{PartitionNode, PartitionTree};
pub use wht::{wht2x2_forward, wht2x2_inverse, wht2x2_real_forward};
