//! Adaptive multi-symbol entropy coding.
//!
//! A 32-bit range coder with two symbol paths — widening multiplies against
//! 15-bit cumulative distributions, and a multiply-free shift/compare
//! partition for frequency-count contexts — plus the dyadic CDF adaptation
//! rule and a throughput benchmark harness.

pub mod bench;
pub mod cdf;
pub mod coder;
pub mod freq;
pub mod uint;

pub use bench::{bench_throughput, BenchModel, BenchReport};
pub use cdf::{cdf_adapt_dyadic, Cdf15, DyadicAdaptCdf, MAX_ALPHABET};
pub use coder::{EncoderCheckpoint, RangeDecoder, RangeEncoder, BITRES};
pub use freq::FreqCtx;
pub use uint::{decode_uint_esc, encode_uint_esc};
