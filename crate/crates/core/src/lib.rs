//! Lapped-transform intra codec toolkit.
//!
//! The library is organized around a small intra-only image codec built on
//! lapped block transforms, gain-shape (pyramid) vector quantization of
//! frequency bands, and a multi-symbol adaptive range coder, plus a set of
//! standalone offline tools: a frequency-domain intra predictor trainer, an
//! entropy-coder throughput benchmark, and a rate-control simulator.

pub mod codec;
pub mod dering;
pub mod entropy;
pub mod error;
pub mod fdip;
pub mod io;
pub mod plane;
pub mod predict;
pub mod pvq;
pub mod rc;
pub mod transform;

pub use error::{Error, Result};
