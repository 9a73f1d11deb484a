//! Perceptual vector quantization: gain/theta/shape decomposition of
//! frequency bands, pyramid codebook enumeration and quantization,
//! Householder predictor alignment, and band coding.

pub mod bands;
pub mod codebook;
pub mod coding;
pub mod geometry;

pub use bands::{zigzag, BandLayout};
pub use codebook::{pvq_count, pvq_quantize_shape};
pub use coding::{
    band_position, k_from_band, pvq_decode_band, pvq_encode_band, reconstruct, BandCode,
    PvqModels, NUM_BAND_POSITIONS,
};
pub use geometry::Householder;
