//! Gain/theta/shape band coding against the range coder.
//!
//! Each band codes a quantized gain, then (when a usable predictor exists) a
//! noref flag, then either the angle theta to the predictor direction plus a
//! pulse vector for the complement, or a pulse vector for the whole band.
//! The encoder's reconstruction and the decoder's reconstruction share one
//! code path, so the codec's closed loop is bit-exact.

use std::f64::consts::FRAC_PI_2;

use crate::entropy::cdf::DyadicAdaptCdf;
use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::entropy::freq::FreqCtx;
use crate::entropy::uint::{decode_uint_esc, encode_uint_esc};
use crate::pvq::codebook::pvq_quantize_shape;
use crate::pvq::geometry::Householder;
use crate::{Error, Result};

/// Upper bound on pulses per band, bounding pulse-coding cost.
pub const K_MAX: u32 = 128;
/// Gains beyond this are clamped; far outside any 8/10-bit signal range.
pub const GAIN_MAX: u32 = 1 << 20;
/// Predictors with smaller L2 norm have no usable direction.
pub const PRED_EPS: f64 = 1e-6;
/// Bands whose correlation with the predictor falls below this cosine use
/// noref: coding an angle near (or beyond) 90 degrees costs more than it
/// saves.
pub const NOREF_COS_THRESH: f64 = 0.15;

/// Number of distinct (block size, band index) positions: 1 + 3 + 6 + 9.
pub const NUM_BAND_POSITIONS: usize = 19;

/// Flat model index for band `band` of a block of size `n`.
pub fn band_position(n: usize, band: usize) -> usize {
    let off = match n {
        4 => 0,
        8 => 1,
        16 => 4,
        32 => 10,
        _ => panic!("unsupported block size {n}"),
    };
    off + band
}

/// Adaptive probability models shared by all PVQ bands of one coded plane.
#[derive(Debug, Clone)]
pub struct PvqModels {
    gain: Vec<FreqCtx>,
    /// Signed gain-difference contexts for bands with a nonzero-gain
    /// predictor.
    gain_diff: Vec<FreqCtx>,
    theta: Vec<FreqCtx>,
    noref: Vec<DyadicAdaptCdf>,
    /// Pulse-magnitude contexts, indexed by bit length of the remaining
    /// dimension count.
    pulses: Vec<FreqCtx>,
}

impl Default for PvqModels {
    fn default() -> Self {
        Self::new()
    }
}

impl PvqModels {
    pub fn new() -> Self {
        PvqModels {
            gain: (0..NUM_BAND_POSITIONS).map(|_| FreqCtx::new(16)).collect(),
            gain_diff: (0..NUM_BAND_POSITIONS).map(|_| FreqCtx::new(16)).collect(),
            theta: (0..NUM_BAND_POSITIONS).map(|_| FreqCtx::new(16)).collect(),
            noref: (0..NUM_BAND_POSITIONS).map(|_| DyadicAdaptCdf::new_uniform(2)).collect(),
            pulses: (0..=10).map(|_| FreqCtx::new(16)).collect(),
        }
    }
}

/// Everything coded for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCode {
    pub gain_index: u32,
    /// Meaningful only when a usable predictor exists and gain > 0.
    pub noref: bool,
    pub theta_index: u32,
    pub theta_steps: u32,
    /// Pulse vector: `n` entries for noref, `n - 1` entries otherwise.
    pub pulses: Vec<i32>,
}

impl BandCode {
    pub fn zero() -> Self {
        BandCode { gain_index: 0, noref: true, theta_index: 0, theta_steps: 0, pulses: Vec::new() }
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The predictor's own quantized gain index, the reference for
/// differential gain coding.
fn pred_gain_index(pred: &[f64], q: f64) -> u32 {
    ((l2(pred) / q + 0.5).floor() as u32).min(GAIN_MAX)
}

/// Maps a signed gain difference onto the non-negative escape-coded range:
/// 0, -1, 1, -2, 2, ...
fn zigzag_map(v: i64) -> u32 {
    let m = if v < 0 { (-v) * 2 - 1 } else { v * 2 };
    m.min(u32::MAX as i64) as u32
}

fn zigzag_unmap(m: u32) -> i64 {
    if m % 2 == 1 {
        -((m as i64 + 1) / 2)
    } else {
        m as i64 / 2
    }
}

fn usable_pred(pred: Option<&[f64]>) -> bool {
    pred.map_or(false, |p| l2(p) > PRED_EPS)
}

/// Number of theta quantization steps over [0, pi/2]: resolution follows the
/// arc length of the gain shell (step = quantizer / gain, i.e. 1/gain_index
/// radians), clamped to at least 4 steps.
pub fn theta_steps(gain_index: u32) -> u32 {
    ((FRAC_PI_2 * gain_index as f64).round() as u32).max(4)
}

/// Pulse budget for a band of `_n` dimensions: `k` tracks the gain index
/// (beta = 1), scaled by sin(theta) when an angle is coded, and capped.
pub fn k_from_band(_n: usize, gain_index: u32, theta: Option<(u32, u32)>) -> u32 {
    if gain_index == 0 {
        return 0;
    }
    match theta {
        None => gain_index.clamp(1, K_MAX),
        Some((theta_index, steps)) => {
            let th = theta_index as f64 * FRAC_PI_2 / steps as f64;
            (((gain_index as f64) * th.sin()).round() as u32).min(K_MAX)
        }
    }
}

/// Rebuilds the band from its coded parameters; the single reconstruction
/// path shared by encoder and decoder.
pub fn reconstruct(code: &BandCode, n: usize, pred: Option<&[f64]>, q: f64) -> Vec<f64> {
    if code.gain_index == 0 {
        return vec![0.0; n];
    }
    let g = code.gain_index as f64 * q;
    if code.noref {
        let norm = l2(&code.pulses.iter().map(|&p| p as f64).collect::<Vec<_>>());
        debug_assert!(norm > 0.0);
        return code.pulses.iter().map(|&p| g * p as f64 / norm).collect();
    }
    let pred = pred.expect("noref=false requires a predictor");
    let h = Householder::from_predictor(pred);
    let th = code.theta_index as f64 * FRAC_PI_2 / code.theta_steps as f64;
    let mut u = vec![0.0; n];
    let vnorm: f64 =
        code.pulses.iter().map(|&p| (p as f64) * (p as f64)).sum::<f64>().sqrt();
    if vnorm > 0.0 {
        u[0] = h.axis_sign * th.cos();
        for (ui, &p) in u[1..].iter_mut().zip(&code.pulses) {
            *ui = th.sin() * p as f64 / vnorm;
        }
    } else {
        // No complement information: the shape is the predictor direction.
        u[0] = h.axis_sign;
    }
    h.apply(&mut u);
    u.iter().map(|&c| g * c).collect()
}

/// Codes one band and returns the coded parameters plus the encoder-side
/// reconstruction (identical to what the decoder will produce).
pub fn pvq_encode_band(
    enc: &mut RangeEncoder,
    models: &mut PvqModels,
    pos: usize,
    x: &[f64],
    pred: Option<&[f64]>,
    q: f64,
) -> (BandCode, Vec<f64>) {
    assert!(q > 0.0);
    let n = x.len();
    let g = l2(x);
    let gain_index = ((g / q + 0.5).floor() as u32).min(GAIN_MAX);
    let has_pred = usable_pred(pred);
    // With a usable predictor of nonzero gain, the gain is coded relative
    // to the predictor's gain (the decoder recomputes the same reference),
    // so well-predicted bands spend almost nothing on gain.
    let pred_gain = if has_pred { pred_gain_index(pred.unwrap(), q) } else { 0 };
    if pred_gain > 0 {
        encode_uint_esc(
            enc,
            &mut models.gain_diff[pos],
            zigzag_map(gain_index as i64 - pred_gain as i64),
        );
    } else {
        encode_uint_esc(enc, &mut models.gain[pos], gain_index);
    }
    let mut code = BandCode::zero();
    code.gain_index = gain_index;
    if gain_index == 0 {
        return (code, vec![0.0; n]);
    }
    let mut reflected = None;
    if has_pred {
        let h = Householder::from_predictor(pred.unwrap());
        let mut xr = x.to_vec();
        h.apply(&mut xr);
        // cos(theta) between the band and the predictor direction.
        let cosang = h.axis_sign * xr[0] / g;
        code.noref = cosang < NOREF_COS_THRESH;
        let bit = code.noref as usize;
        enc.encode_symbol_q15(bit, &models.noref[pos].base.f);
        models.noref[pos].update(bit);
        if !code.noref {
            reflected = Some((xr, cosang));
        }
    }
    if let Some((xr, cosang)) = reflected {
        let steps = theta_steps(gain_index);
        let th = cosang.clamp(-1.0, 1.0).acos();
        let theta_index =
            ((th / (FRAC_PI_2 / steps as f64)).round() as u32).min(steps);
        encode_uint_esc(enc, &mut models.theta[pos], theta_index);
        code.theta_index = theta_index;
        code.theta_steps = steps;
        let k = k_from_band(n, gain_index, Some((theta_index, steps)));
        let z = &xr[1..];
        let v = if k > 0 && l2(z) > 0.0 {
            pvq_quantize_shape(z, k as usize)
        } else {
            vec![0i32; n - 1]
        };
        encode_pulses(enc, models, &v, v.iter().map(|p| p.unsigned_abs()).sum());
        code.pulses = v;
    } else {
        let k = k_from_band(n, gain_index, None);
        let v = pvq_quantize_shape(x, k as usize);
        encode_pulses(enc, models, &v, k);
        code.pulses = v;
    }
    let recon = reconstruct(&code, n, pred, q);
    (code, recon)
}

/// Decodes one band coded by [`pvq_encode_band`] with the same predictor,
/// quantizer, and model state.
pub fn pvq_decode_band(
    dec: &mut RangeDecoder<'_>,
    models: &mut PvqModels,
    pos: usize,
    n: usize,
    pred: Option<&[f64]>,
    q: f64,
) -> Result<(BandCode, Vec<f64>)> {
    let mut code = BandCode::zero();
    let has_pred = usable_pred(pred);
    let pred_gain = if has_pred { pred_gain_index(pred.unwrap(), q) } else { 0 };
    if pred_gain > 0 {
        let diff = zigzag_unmap(decode_uint_esc(dec, &mut models.gain_diff[pos]));
        let gain = pred_gain as i64 + diff;
        if gain < 0 || gain > GAIN_MAX as i64 {
            return Err(Error::MalformedStream("gain index out of range".into()));
        }
        code.gain_index = gain as u32;
    } else {
        code.gain_index = decode_uint_esc(dec, &mut models.gain[pos]);
        if code.gain_index > GAIN_MAX {
            return Err(Error::MalformedStream("gain index out of range".into()));
        }
    }
    if code.gain_index == 0 {
        return Ok((code, vec![0.0; n]));
    }
    if has_pred {
        let bit = dec.decode_symbol_q15(&models.noref[pos].base.f);
        models.noref[pos].update(bit);
        code.noref = bit == 1;
    }
    if has_pred && !code.noref {
        let steps = theta_steps(code.gain_index);
        code.theta_index = decode_uint_esc(dec, &mut models.theta[pos]);
        if code.theta_index > steps {
            return Err(Error::MalformedStream("theta index out of range".into()));
        }
        code.theta_steps = steps;
        let k = k_from_band(n, code.gain_index, Some((code.theta_index, steps)));
        code.pulses = decode_pulses(dec, models, n - 1, k)?;
    } else {
        let k = k_from_band(n, code.gain_index, None);
        code.pulses = decode_pulses(dec, models, n, k)?;
        if code.pulses.iter().all(|&p| p == 0) {
            return Err(Error::MalformedStream("noref band decoded with empty shape".into()));
        }
    }
    let recon = reconstruct(&code, n, pred, q);
    Ok((code, recon))
}

fn pulse_ctx(models: &mut PvqModels, dims_left: usize) -> &mut FreqCtx {
    let b = (usize::BITS - (dims_left as u32).leading_zeros()) as usize;
    let last = models.pulses.len() - 1;
    &mut models.pulses[b.min(last)]
}

/// Codes a pulse vector with L1 norm `k`: magnitudes position by position
/// (escape-coded), a raw sign bit per nonzero entry, and the last reachable
/// magnitude implied by the remaining pulse budget.
fn encode_pulses(enc: &mut RangeEncoder, models: &mut PvqModels, v: &[i32], k: u32) {
    debug_assert_eq!(v.iter().map(|p| p.unsigned_abs()).sum::<u32>(), k);
    let n = v.len();
    let mut k_rem = k;
    for i in 0..n {
        if k_rem == 0 {
            break;
        }
        let mag = v[i].unsigned_abs();
        if i + 1 < n {
            encode_uint_esc(enc, pulse_ctx(models, n - i), mag);
        } else {
            debug_assert_eq!(mag, k_rem);
        }
        if mag > 0 {
            enc.encode_bit(v[i] < 0);
        }
        k_rem -= mag;
    }
}

fn decode_pulses(
    dec: &mut RangeDecoder<'_>,
    models: &mut PvqModels,
    n: usize,
    k: u32,
) -> Result<Vec<i32>> {
    let mut v = vec![0i32; n];
    let mut k_rem = k;
    for i in 0..n {
        if k_rem == 0 {
            break;
        }
        let mag = if i + 1 < n {
            decode_uint_esc(dec, pulse_ctx(models, n - i))
        } else {
            k_rem
        };
        if mag > k_rem {
            return Err(Error::MalformedStream("pulse magnitude exceeds budget".into()));
        }
        if mag > 0 {
            let neg = dec.decode_bit();
            v[i] = if neg { -(mag as i32) } else { mag as i32 };
        }
        k_rem -= mag;
    }
    Ok(v)
}
