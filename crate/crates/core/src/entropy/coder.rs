//! 32-bit range coder with byte-wise renormalization and carry propagation.
//!
//! The encoder keeps `low` in a 33-bit accumulator (32-bit window plus a
//! carry bit) and `range` in `[2^24, 2^32)`. Renormalization ships the top
//! byte of `low`; a byte equal to 0xFF may still receive a future carry, so
//! such bytes are held in a pending counter until a non-0xFF byte (or a
//! carry) resolves them.
//!
//! Two symbol paths are provided:
//! * the q15 path, partitioning the range with widening 15x16->31-bit
//!   multiplies against a cumulative distribution whose total is 2^15, and
//! * the frequency-count path, partitioning with shifts and compares only
//!   (no multiplies) against an arbitrary total below 2^15. The shift-based
//!   allocation over-estimates probabilities at the beginning of the
//!   alphabet, so contexts should list likelier symbols first.

/// Fractional-bit resolution of [`RangeEncoder::tell_frac`]: rates are
/// reported in units of 1/8 bit.
pub const BITRES: u32 = 3;

const Q15_TOTAL: u32 = 1 << 15;
const RANGE_MIN: u32 = 1 << 24;

/// Cumulative-frequency slice for one symbol: the symbol owns
/// `[cum_lo, cum_hi)` out of `total`.
#[derive(Debug, Clone, Copy)]
struct Slice {
    cum_lo: u32,
    cum_hi: u32,
}

/// Shift/compare range allocation after Stuiver and Moffat: with `b` chosen
/// so that `total << b <= range < total << (b + 1)` and
/// `m = range - (total << b)`, cumulative count `c` maps to
/// `min(c << (b + 1), (c << b) + m)`. The map is monotone, sends `total` to
/// exactly `range`, and gives every unit of count at least `1 << b` of range.
#[inline]
fn freq_alloc(c: u64, b: u32, m: u64) -> u64 {
    (c << (b + 1)).min((c << b) + m)
}

#[inline]
fn freq_params(range: u32, total: u32) -> (u32, u64) {
    debug_assert!(total >= 1 && total < Q15_TOTAL);
    let range = range as u64;
    let total = total as u64;
    // b = floor(log2(range / total)), found with shifts and a compare.
    let mut b = (63 - range.leading_zeros()) - (63 - total.leading_zeros());
    if (total << b) > range {
        b -= 1;
    }
    debug_assert!((total << b) <= range && range < (total << (b + 1)));
    (b, range - (total << b))
}

/// Encoder state checkpoint for rate-distortion trial coding.
#[derive(Debug, Clone)]
pub struct EncoderCheckpoint {
    low: u64,
    range: u32,
    cache: u8,
    pending_ff: u64,
    first: bool,
    nshift: u64,
    out_len: usize,
}

#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending_ff: u64,
    first: bool,
    /// Number of renormalization byte shifts performed so far.
    nshift: u64,
    out: Vec<u8>,
    /// Largest alphabet any symbol was coded against (instrumentation for
    /// the <= 16 alphabet constraint).
    max_alphabet: usize,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            pending_ff: 0,
            first: true,
            nshift: 0,
            out: Vec::new(),
            max_alphabet: 0,
        }
    }

    /// Largest alphabet size seen so far across all coded symbols.
    pub fn max_alphabet(&self) -> usize {
        self.max_alphabet
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            if !self.first {
                self.out.push(self.cache.wrapping_add(carry));
            }
            for _ in 0..self.pending_ff {
                self.out.push(0xFFu8.wrapping_add(carry));
            }
            self.pending_ff = 0;
            self.cache = (self.low >> 24) as u8;
            self.first = false;
        } else {
            self.pending_ff += 1;
        }
        self.low = (self.low << 8) & 0xFFFF_FFFF;
        self.nshift += 1;
    }

    fn renorm(&mut self) {
        while self.range < RANGE_MIN {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn apply_slice_q15(&mut self, s: Slice) {
        debug_assert!(s.cum_lo < s.cum_hi && s.cum_hi <= Q15_TOTAL);
        let r = self.range as u64;
        let lo = (r * s.cum_lo as u64) >> 15;
        let hi = if s.cum_hi == Q15_TOTAL { r } else { (r * s.cum_hi as u64) >> 15 };
        self.low += lo;
        self.range = (hi - lo) as u32;
        self.renorm();
    }

    /// Encodes `sym` against a cumulative distribution with total 2^15.
    /// `cum` holds the cumulative frequencies `f_0..f_{M-1}` with
    /// `f_{M-1} = 2^15`.
    ///
    /// Panics if `sym` is out of range or the distribution is malformed.
    pub fn encode_symbol_q15(&mut self, sym: usize, cum: &[u32]) {
        assert!(sym < cum.len(), "symbol {} out of range for alphabet {}", sym, cum.len());
        assert_eq!(*cum.last().unwrap(), Q15_TOTAL);
        self.max_alphabet = self.max_alphabet.max(cum.len());
        let cum_lo = if sym == 0 { 0 } else { cum[sym - 1] };
        self.apply_slice_q15(Slice { cum_lo, cum_hi: cum[sym] });
    }

    /// Encodes `sym` against raw frequency counts with total `< 2^15`,
    /// using the multiply-free shift/compare partition.
    pub fn encode_symbol_freq(&mut self, sym: usize, counts: &[u32]) {
        assert!(sym < counts.len(), "symbol {} out of range for alphabet {}", sym, counts.len());
        self.max_alphabet = self.max_alphabet.max(counts.len());
        let total: u32 = counts.iter().sum();
        let (b, m) = freq_params(self.range, total);
        let cum_lo: u32 = counts[..sym].iter().sum();
        let cum_hi = cum_lo + counts[sym];
        let lo = freq_alloc(cum_lo as u64, b, m);
        let hi = freq_alloc(cum_hi as u64, b, m);
        self.low += lo;
        self.range = (hi - lo) as u32;
        self.renorm();
    }

    /// Encodes one bit with probability 1/2, at full range precision.
    pub fn encode_bit(&mut self, bit: bool) {
        let half = self.range >> 1;
        if bit {
            self.low += half as u64;
            self.range -= half;
        } else {
            self.range = half;
        }
        self.renorm();
    }

    /// Encodes `nbits` raw bits of `value`, most significant first.
    pub fn encode_bits(&mut self, value: u32, nbits: u32) {
        debug_assert!(nbits == 32 || value < (1u32 << nbits));
        for i in (0..nbits).rev() {
            self.encode_bit((value >> i) & 1 == 1);
        }
    }

    /// Whole bits that flushing now would commit (upper bound).
    pub fn tell(&self) -> u64 {
        self.nshift * 8 + 33
    }

    /// Bits used so far in units of 1/8 bit (`2^-BITRES`). Slightly
    /// pessimistic in absolute terms; differences between two calls track
    /// the cost of the symbols coded in between.
    pub fn tell_frac(&self) -> u64 {
        frac_compute(self.nshift * 8 + 33, self.range)
    }

    pub fn checkpoint(&self) -> EncoderCheckpoint {
        EncoderCheckpoint {
            low: self.low,
            range: self.range,
            cache: self.cache,
            pending_ff: self.pending_ff,
            first: self.first,
            nshift: self.nshift,
            out_len: self.out.len(),
        }
    }

    pub fn rollback(&mut self, cp: &EncoderCheckpoint) {
        assert!(cp.out_len <= self.out.len(), "checkpoint from a different coder state");
        self.low = cp.low;
        self.range = cp.range;
        self.cache = cp.cache;
        self.pending_ff = cp.pending_ff;
        self.first = cp.first;
        self.nshift = cp.nshift;
        self.out.truncate(cp.out_len);
    }

    /// Terminates the stream and returns the coded bytes.
    pub fn finish(mut self) -> Vec<u8> {
        // Flush the full low window so any continuation bits the decoder
        // fabricates (zeros) keep the value inside the final interval.
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

/// Converts a whole-bit count plus the current range register into units of
/// 1/8 bit, folding in `-log2(range)`'s fractional part by repeated squaring.
fn frac_compute(nbits_total: u64, range: u32) -> u64 {
    debug_assert!(range >= RANGE_MIN);
    // Normalize the range to [2^15, 2^16) and account for the whole bits.
    let lg = 31 - range.leading_zeros();
    let mut rng = range >> (lg - 15);
    let nbits_total = nbits_total - (lg as u64 - 15);
    let nbits = nbits_total << BITRES;
    let mut l: u64 = 0;
    for _ in 0..BITRES {
        rng = (rng * rng) >> 15;
        let b = rng >> 16;
        l = (l << 1) | b as u64;
        rng >>= b;
    }
    nbits - l
}

#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    buf: &'a [u8],
    pos: usize,
    val: u32,
    range: u32,
    /// Bytes fabricated past the end of the buffer.
    overread: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        let mut d = RangeDecoder { buf, pos: 0, val: 0, range: u32::MAX, overread: 0 };
        for _ in 0..4 {
            d.val = (d.val << 8) | d.next_byte() as u32;
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        if self.pos < self.buf.len() {
            let b = self.buf[self.pos];
            self.pos += 1;
            b
        } else {
            self.overread += 1;
            0
        }
    }

    fn renorm(&mut self) {
        while self.range < RANGE_MIN {
            self.range <<= 8;
            self.val = (self.val << 8) | self.next_byte() as u32;
        }
    }

    /// Decodes a symbol coded with [`RangeEncoder::encode_symbol_q15`]
    /// against the same cumulative distribution.
    pub fn decode_symbol_q15(&mut self, cum: &[u32]) -> usize {
        assert_eq!(*cum.last().unwrap(), Q15_TOTAL);
        let r = self.range as u64;
        let val = self.val as u64;
        let mut sym = 0;
        let mut lo = 0u64;
        loop {
            let hi =
                if cum[sym] == Q15_TOTAL { r } else { (r * cum[sym] as u64) >> 15 };
            if val < hi {
                self.val = (val - lo) as u32;
                self.range = (hi - lo) as u32;
                self.renorm();
                return sym;
            }
            lo = hi;
            sym += 1;
        }
    }

    /// Decodes a symbol coded with [`RangeEncoder::encode_symbol_freq`]
    /// against the same counts.
    pub fn decode_symbol_freq(&mut self, counts: &[u32]) -> usize {
        let total: u32 = counts.iter().sum();
        let (b, m) = freq_params(self.range, total);
        let val = self.val as u64;
        let mut sym = 0;
        let mut cum = 0u32;
        let mut lo = 0u64;
        loop {
            cum += counts[sym];
            let hi = freq_alloc(cum as u64, b, m);
            if val < hi {
                self.val = (val - lo) as u32;
                self.range = (hi - lo) as u32;
                self.renorm();
                return sym;
            }
            lo = hi;
            sym += 1;
        }
    }

    pub fn decode_bit(&mut self) -> bool {
        let half = self.range >> 1;
        let bit = self.val >= half;
        if bit {
            self.val -= half;
            self.range -= half;
        } else {
            self.range = half;
        }
        self.renorm();
        bit
    }

    pub fn decode_bits(&mut self, nbits: u32) -> u32 {
        let mut v = 0;
        for _ in 0..nbits {
            v = (v << 1) | self.decode_bit() as u32;
        }
        v
    }

    /// True when decoding consumed fabricated bytes past the end of the
    /// buffer, which indicates a truncated payload.
    pub fn overread(&self) -> bool {
        // The terminator flushes five bytes but only the first four carry
        // information the decoder is guaranteed to need; tolerate one.
        self.overread > 1
    }
}
