//! Adaptive frequency-count contexts for the multiply-free coder path.

use crate::entropy::coder::{RangeDecoder, RangeEncoder};

/// Per-symbol frequency counts with a running total. Counts start at 1,
/// grow by [`FreqCtx::INCREMENT`] per observation, and are halved (rounding
/// up, so no count drops below 1) when the total would reach 2^15.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqCtx {
    counts: Vec<u32>,
    total: u32,
}

impl FreqCtx {
    pub const INCREMENT: u32 = 16;
    const TOTAL_LIMIT: u32 = 1 << 15;

    pub fn new(alphabet: usize) -> Self {
        assert!(alphabet >= 1 && alphabet <= 16);
        FreqCtx { counts: vec![1; alphabet], total: alphabet as u32 }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Model probability of `sym`.
    pub fn prob(&self, sym: usize) -> f64 {
        self.counts[sym] as f64 / self.total as f64
    }

    /// Records one observation of `sym`, rescaling first if the total would
    /// leave 15 bits.
    pub fn update(&mut self, sym: usize) {
        if self.total + Self::INCREMENT >= Self::TOTAL_LIMIT {
            self.rescale();
        }
        self.counts[sym] += Self::INCREMENT;
        self.total += Self::INCREMENT;
    }

    fn rescale(&mut self) {
        self.total = 0;
        for c in self.counts.iter_mut() {
            *c = (*c + 1) / 2;
            self.total += *c;
        }
    }

    /// Codes `sym` through the shift/compare path and adapts.
    pub fn encode(&mut self, enc: &mut RangeEncoder, sym: usize) {
        enc.encode_symbol_freq(sym, &self.counts);
        self.update(sym);
    }

    /// Decodes one symbol and applies the same adaptation as [`encode`].
    ///
    /// [`encode`]: FreqCtx::encode
    pub fn decode(&mut self, dec: &mut RangeDecoder<'_>) -> usize {
        let sym = dec.decode_symbol_freq(&self.counts);
        self.update(sym);
        sym
    }
}
