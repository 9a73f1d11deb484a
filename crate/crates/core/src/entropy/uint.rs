//! Escape-coded unsigned integers: a 16-ary adaptive context covers values
//! 0..14 and an escape token, and the (rare) tail beyond 14 is coded with
//! order-0 exponential Golomb in raw bits, so every symbol stays within the
//! 16-symbol alphabet limit.

use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::entropy::freq::FreqCtx;

pub const ESCAPE: usize = 15;

/// Codes `v` with the adaptive context; values of 15 or more send the
/// escape token and the remainder in exponential Golomb.
pub fn encode_uint_esc(enc: &mut RangeEncoder, ctx: &mut FreqCtx, v: u32) {
    debug_assert_eq!(ctx.alphabet_size(), 16);
    if (v as usize) < ESCAPE {
        ctx.encode(enc, v as usize);
    } else {
        ctx.encode(enc, ESCAPE);
        encode_expgolomb(enc, v - ESCAPE as u32);
    }
}

pub fn decode_uint_esc(dec: &mut RangeDecoder<'_>, ctx: &mut FreqCtx) -> u32 {
    let s = ctx.decode(dec);
    if s < ESCAPE {
        s as u32
    } else {
        ESCAPE as u32 + decode_expgolomb(dec)
    }
}

/// Order-0 exponential Golomb through the binary raw-bit path: a unary
/// length prefix of `n` zeros, then the `n + 1` significant bits of `v + 1`.
fn encode_expgolomb(enc: &mut RangeEncoder, v: u32) {
    let x = (v as u64 + 1) as u32;
    let len = 32 - x.leading_zeros();
    for _ in 0..len - 1 {
        enc.encode_bit(false);
    }
    for i in (0..len).rev() {
        enc.encode_bit((x >> i) & 1 == 1);
    }
}

fn decode_expgolomb(dec: &mut RangeDecoder<'_>) -> u32 {
    let mut zeros = 0;
    while !dec.decode_bit() {
        zeros += 1;
        assert!(zeros < 32, "malformed exponential Golomb prefix");
    }
    let mut x = 1u32;
    for _ in 0..zeros {
        x = (x << 1) | dec.decode_bit() as u32;
    }
    x - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_small_and_large_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut vals: Vec<u32> = (0..40).collect();
        vals.extend([100, 1000, 65534, 1 << 20]);
        vals.extend((0..5000).map(|_| rng.gen_range(0..50u32)));
        let mut enc = RangeEncoder::new();
        let mut ctx = FreqCtx::new(16);
        for &v in &vals {
            encode_uint_esc(&mut enc, &mut ctx, v);
        }
        assert!(enc.max_alphabet() <= 16);
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes);
        let mut ctx = FreqCtx::new(16);
        for &v in &vals {
            assert_eq!(decode_uint_esc(&mut dec, &mut ctx), v);
        }
    }
}
