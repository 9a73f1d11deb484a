//! Probability models: 15-bit cumulative distributions and the dyadic
//! adaptation rule.

/// Cumulative distribution over an alphabet of at most 16 symbols. `f[i]`
/// is the cumulative frequency of symbols `0..=i`; the last entry is the
/// total `T`. Strict monotonicity (`0 < f[0] < f[1] < ... < f[M-1] = T`)
/// guarantees every symbol keeps nonzero probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdf15 {
    pub f: Vec<u32>,
}

pub const MAX_ALPHABET: usize = 16;
pub const Q15: u32 = 1 << 15;

impl Cdf15 {
    /// Uniform distribution over `m` symbols with total 2^15.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1 && m <= MAX_ALPHABET);
        let f = (1..=m as u32).map(|i| i * Q15 / m as u32).collect();
        let cdf = Cdf15 { f };
        debug_assert!(cdf.is_valid());
        cdf
    }

    /// Builds a total-2^15 distribution proportional to `weights`, keeping
    /// every symbol's slice at least 1.
    pub fn from_weights(weights: &[u32]) -> Self {
        assert!(!weights.is_empty() && weights.len() <= MAX_ALPHABET);
        let m = weights.len() as u32;
        let total: u64 = weights.iter().map(|&w| w.max(1) as u64).sum();
        let mut f = Vec::with_capacity(weights.len());
        let mut acc = 0u64;
        for (i, &w) in weights.iter().enumerate() {
            acc += w.max(1) as u64;
            // Reserve one slot for each remaining symbol so gaps stay >= 1.
            let remaining = m - 1 - i as u32;
            let scaled = (acc * Q15 as u64 / total) as u32;
            let lo = f.last().map_or(0, |&p: &u32| p) + 1;
            f.push(scaled.clamp(lo, Q15 - remaining));
        }
        *f.last_mut().unwrap() = Q15;
        let cdf = Cdf15 { f };
        debug_assert!(cdf.is_valid());
        cdf
    }

    pub fn alphabet_size(&self) -> usize {
        self.f.len()
    }

    pub fn total(&self) -> u32 {
        *self.f.last().unwrap()
    }

    pub fn is_valid(&self) -> bool {
        !self.f.is_empty()
            && self.f.len() <= MAX_ALPHABET
            && self.f[0] > 0
            && self.f.windows(2).all(|w| w[0] < w[1])
    }

    /// Probability slice of `sym` in units of `1/T`.
    pub fn prob(&self, sym: usize) -> u32 {
        let lo = if sym == 0 { 0 } else { self.f[sym - 1] };
        self.f[sym] - lo
    }
}

/// Adaptive CDF with a power-of-two total, updated after each coded symbol
/// with two vector additions and an arithmetic vector shift:
/// the tail `i >= j` decays toward the maximal allocation for symbol `j`
/// and the head `i < j` decays toward the minimal gap-1 staircase.
///
/// The first 15 symbols of a context's life use a faster schedule,
/// `r = max(r_min, r0 - floor(log2(count + 1)))`, then the rate stays at
/// `r_min`. The schedule is monotone in `count`.
#[derive(Debug, Clone)]
pub struct DyadicAdaptCdf {
    pub base: Cdf15,
    pub r_min: u32,
    pub r0: u32,
    pub count: u32,
}

impl DyadicAdaptCdf {
    pub fn new(base: Cdf15, r_min: u32, r0: u32) -> Self {
        assert!(base.total().is_power_of_two());
        assert!(r_min >= 1 && r0 >= r_min && r0 <= 7);
        DyadicAdaptCdf { base, r_min, r0, count: 0 }
    }

    /// Uniform 2^15-total context with the default adaptation schedule.
    pub fn new_uniform(m: usize) -> Self {
        Self::new(Cdf15::uniform(m), 4, 7)
    }

    /// Adaptation-rate exponent in effect for the next update.
    pub fn rate(&self) -> u32 {
        if self.count < 15 {
            let step = 31 - (self.count + 1).leading_zeros();
            self.r0.saturating_sub(step).max(self.r_min)
        } else {
            self.r_min
        }
    }

    /// Applies the dyadic update toward coded symbol `j` and advances the
    /// rate schedule.
    pub fn update(&mut self, j: usize) {
        let r = self.rate();
        cdf_adapt_dyadic(&mut self.base, j, r);
        self.count = self.count.saturating_add(1);
    }
}

/// One dyadic adaptation step with rate `2^r` toward coded symbol `j`.
///
/// Vectorized form: `f[i] -= (f[i] - t[i]) >> r` (arithmetic shift), where
/// the target is `t[i] = i - (2^r - 2)` for `i < j` and
/// `t[i] = T - M + 1 + i` for `i >= j`. The update preserves the total `T`
/// exactly and keeps every adjacent gap at least 1.
pub fn cdf_adapt_dyadic(cdf: &mut Cdf15, j: usize, r: u32) {
    debug_assert!(cdf.is_valid() && cdf.total().is_power_of_two());
    let m = cdf.f.len() as i64;
    let t = cdf.total() as i64;
    assert!(j < cdf.f.len());
    for (i, fi) in cdf.f.iter_mut().enumerate() {
        let target = if i < j {
            i as i64 - ((1i64 << r) - 2)
        } else {
            t - m + 1 + i as i64
        };
        let v = *fi as i64;
        *fi = (v - ((v - target) >> r)) as u32;
    }
    debug_assert!(cdf.is_valid());
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Literal scalar evaluation of the two-branch floor formula; oracle for
    /// the vectorized update.
    fn adapt_scalar(f: &[u32], j: usize, r: u32, m: usize, t: u32) -> Vec<u32> {
        let two_r = 1i64 << r;
        f.iter()
            .enumerate()
            .map(|(i, &fi)| {
                let fi = fi as i64;
                let out = if i < j {
                    fi - (fi - i as i64 + two_r - 2).div_euclid(two_r)
                } else {
                    fi - (fi - t as i64 + m as i64 - 1 - i as i64).div_euclid(two_r)
                };
                out as u32
            })
            .collect()
    }

    #[test]
    fn worked_examples() {
        let mut cdf = Cdf15 { f: vec![4, 8, 12, 16] };
        cdf_adapt_dyadic(&mut cdf, 0, 2);
        assert_eq!(cdf.f, vec![7, 10, 13, 16]);

        let mut cdf = Cdf15 { f: vec![4, 8, 12, 16] };
        cdf_adapt_dyadic(&mut cdf, 3, 2);
        assert_eq!(cdf.f, vec![3, 6, 9, 16]);
    }

    #[test]
    fn gap_one_staircase_is_fixed_point_of_head_branch() {
        let mut cdf = Cdf15 { f: vec![1, 2, 3, 16] };
        cdf_adapt_dyadic(&mut cdf, 3, 2);
        assert_eq!(cdf.f, vec![1, 2, 3, 16]);
    }

    #[test]
    fn update_invariants_fuzz() {
        // 10^5 random (cdf, j, r) triples: total preserved, gaps >= 1,
        // vectorized update matches the scalar formula.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let m = rng.gen_range(2..=16usize);
            let pow = rng.gen_range(5..=15u32);
            let t = 1u32 << pow;
            // Random strictly increasing cdf ending at t.
            let mut f: Vec<u32> = Vec::with_capacity(m);
            let mut lo = 1u32;
            for i in 0..m - 1 {
                let hi = t - (m as u32 - 1 - i as u32);
                let v = rng.gen_range(lo..=hi);
                f.push(v);
                lo = v + 1;
            }
            f.push(t);
            let j = rng.gen_range(0..m);
            let r = rng.gen_range(1..=7u32);
            let mut cdf = Cdf15 { f: f.clone() };
            let p_before = cdf.prob(j);
            cdf_adapt_dyadic(&mut cdf, j, r);
            assert_eq!(cdf.f, adapt_scalar(&f, j, r, m, t));
            assert_eq!(cdf.total(), t, "total changed");
            assert!(cdf.is_valid(), "monotonicity broken: {:?}", cdf.f);
            assert!(cdf.prob(j) >= p_before, "mass of coded symbol decreased");
        }
    }

    #[test]
    fn repeated_coding_reaches_maximal_fixed_point() {
        // Driving the same symbol must converge to the allocation where
        // every other symbol keeps exactly one unit of probability.
        for j in 0..4 {
            let mut cdf = Cdf15 { f: vec![64, 128, 192, 256] };
            let mut prev = cdf.prob(j);
            for _ in 0..200 {
                cdf_adapt_dyadic(&mut cdf, j, 2);
                let now = cdf.prob(j);
                assert!(now >= prev);
                prev = now;
            }
            assert_eq!(cdf.prob(j), 256 - 3, "j={j}: {:?}", cdf.f);
        }
    }

    #[test]
    fn rate_schedule_is_monotone_and_bottoms_out() {
        let mut ctx = DyadicAdaptCdf::new_uniform(8);
        let mut prev = ctx.rate();
        assert_eq!(prev, 7);
        for _ in 0..40 {
            ctx.update(3);
            let r = ctx.rate();
            assert!(r <= prev, "rate must not increase");
            prev = r;
        }
        assert_eq!(ctx.rate(), 4);
    }

    #[test]
    fn adaptive_context_codes_skewed_source_below_uniform_cost() {
        use crate::entropy::coder::{RangeDecoder, RangeEncoder};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 50_000;
        let syms: Vec<usize> =
            (0..n).map(|_| if rng.gen_ratio(4, 5) { 0 } else { rng.gen_range(1..8) }).collect();
        let mut ctx = DyadicAdaptCdf::new_uniform(8);
        let mut enc = RangeEncoder::new();
        for &s in &syms {
            enc.encode_symbol_q15(s, &ctx.base.f);
            ctx.update(s);
        }
        let bytes = enc.finish();
        let bits = bytes.len() as f64 * 8.0;
        // Uniform coding would cost 3 bits/symbol; the adaptive context must
        // do much better on an 80%-skewed source (ideal ~1.62 bits).
        assert!(bits / n as f64 <= 2.0, "adaptive cost {} bits/sym", bits / n as f64);
        let mut ctx = DyadicAdaptCdf::new_uniform(8);
        let mut dec = RangeDecoder::new(&bytes);
        for &s in &syms {
            assert_eq!(dec.decode_symbol_q15(&ctx.base.f), s);
            ctx.update(s);
        }
    }

    #[test]
    fn from_weights_handles_extremes() {
        let cdf = Cdf15::from_weights(&[1_000_000, 1, 1, 1]);
        assert!(cdf.is_valid());
        assert_eq!(cdf.total(), Q15);
        assert!(cdf.prob(0) > 30_000);
        for s in 1..4 {
            assert!(cdf.prob(s) >= 1);
        }
        let u = Cdf15::uniform(16);
        assert!(u.is_valid());
        assert_eq!(u.total(), Q15);
    }
}
