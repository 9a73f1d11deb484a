//! Frame-level in-loop filtering: per-32x32-superblock on/off and strength
//! decisions for the directional deringing filter and the constrained
//! low-pass filter, in either pipeline order, with the decisions entropy
//! coded so the decoder replays them bit-exactly.

use crate::dering::direction::{find_direction, DIR_BLOCK};
use crate::dering::filters::{clpf_block, dering_block};
use crate::entropy::cdf::DyadicAdaptCdf;
use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::plane::PixelPlane;
use crate::{Error, Result};

pub const SB_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineOrder {
    /// Directional deringing only.
    Dd,
    /// Constrained low-pass filter only.
    Clpf,
    /// CLPF feeding into the deringing filter.
    ClpfThenDd,
    /// Deringing filter feeding into CLPF.
    DdThenClpf,
}

impl PipelineOrder {
    /// The stages to run, in order.
    fn stages(self) -> &'static [Stage] {
        match self {
            PipelineOrder::Dd => &[Stage::Dd],
            PipelineOrder::Clpf => &[Stage::Clpf],
            PipelineOrder::ClpfThenDd => &[Stage::Clpf, Stage::Dd],
            PipelineOrder::DdThenClpf => &[Stage::Dd, Stage::Clpf],
        }
    }

    pub fn parse(s: &str) -> Result<Option<Self>> {
        match s {
            "off" => Ok(None),
            "dd" => Ok(Some(Self::Dd)),
            "clpf" => Ok(Some(Self::Clpf)),
            "clpf-dd" => Ok(Some(Self::ClpfThenDd)),
            "dd-clpf" => Ok(Some(Self::DdThenClpf)),
            other => Err(Error::InvalidArgument(format!(
                "unknown dering mode '{other}' (off|dd|clpf|clpf-dd|dd-clpf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Dd,
    Clpf,
}

/// Per-superblock filter decision: strength 0 means disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterDecision {
    pub strength: u8,
}

impl FilterDecision {
    pub fn enabled(&self) -> bool {
        self.strength != 0
    }
}

/// Adaptive contexts for the decision stream: one enabled bit plus two
/// strength bits per superblock per filter.
pub struct InloopModels {
    enabled: [DyadicAdaptCdf; 2],
    strength_hi: [DyadicAdaptCdf; 2],
    strength_lo: [DyadicAdaptCdf; 2],
}

impl InloopModels {
    pub fn new() -> Self {
        let bin = || DyadicAdaptCdf::new_uniform(2);
        Self {
            enabled: [bin(), bin()],
            strength_hi: [bin(), bin()],
            strength_lo: [bin(), bin()],
        }
    }
}

impl Default for InloopModels {
    fn default() -> Self {
        Self::new()
    }
}

fn stage_index(stage: Stage) -> usize {
    match stage {
        Stage::Dd => 0,
        Stage::Clpf => 1,
    }
}

fn encode_decision(
    enc: &mut RangeEncoder,
    models: &mut InloopModels,
    stage: Stage,
    d: FilterDecision,
) {
    let s = stage_index(stage);
    let on = d.enabled() as usize;
    enc.encode_symbol_q15(on, &models.enabled[s].base.f);
    models.enabled[s].update(on);
    if on == 1 {
        let v = (d.strength - 1) as usize;
        let (hi, lo) = (v >> 1, v & 1);
        enc.encode_symbol_q15(hi, &models.strength_hi[s].base.f);
        models.strength_hi[s].update(hi);
        enc.encode_symbol_q15(lo, &models.strength_lo[s].base.f);
        models.strength_lo[s].update(lo);
    }
}

fn decode_decision(
    dec: &mut RangeDecoder<'_>,
    models: &mut InloopModels,
    stage: Stage,
) -> Result<FilterDecision> {
    let s = stage_index(stage);
    let on = dec.decode_symbol_q15(&models.enabled[s].base.f);
    models.enabled[s].update(on);
    if on == 0 {
        return Ok(FilterDecision { strength: 0 });
    }
    let hi = dec.decode_symbol_q15(&models.strength_hi[s].base.f);
    models.strength_hi[s].update(hi);
    let lo = dec.decode_symbol_q15(&models.strength_lo[s].base.f);
    models.strength_lo[s].update(lo);
    let v = ((hi << 1) | lo) as u8 + 1;
    if v > 3 {
        return Err(Error::MalformedStream("in-loop filter strength out of range".into()));
    }
    Ok(FilterDecision { strength: v })
}

/// Maps a strength index (1..=3) to the CLPF clip bound (1, 2, 4).
fn clpf_strength(index: u8) -> u8 {
    1 << (index - 1)
}

/// Applies one filter stage at the given strength to one superblock of
/// `input`, writing into `out`. DD taps are confined to each 8x8 block;
/// CLPF reads the stage input across the whole superblock.
fn filter_sb(input: &PixelPlane, out: &mut PixelPlane, sx: usize, sy: usize, stage: Stage, strength: u8) {
    let w = (input.width - sx).min(SB_SIZE);
    let h = (input.height - sy).min(SB_SIZE);
    match stage {
        Stage::Dd => {
            let mut by = 0;
            while by + DIR_BLOCK <= h {
                let mut bx = 0;
                while bx + DIR_BLOCK <= w {
                    let mut block = [0i32; DIR_BLOCK * DIR_BLOCK];
                    for i in 0..DIR_BLOCK {
                        for j in 0..DIR_BLOCK {
                            block[i * DIR_BLOCK + j] = input.get(sx + bx + j, sy + by + i);
                        }
                    }
                    let dir = find_direction(&block);
                    let filtered = dering_block(&block, dir, strength);
                    for i in 0..DIR_BLOCK {
                        for j in 0..DIR_BLOCK {
                            out.set(sx + bx + j, sy + by + i, filtered[i * DIR_BLOCK + j]);
                        }
                    }
                    bx += DIR_BLOCK;
                }
                by += DIR_BLOCK;
            }
        }
        Stage::Clpf => {
            let mut block = vec![0i32; w * h];
            for i in 0..h {
                for j in 0..w {
                    block[i * w + j] = input.get(sx + j, sy + i);
                }
            }
            let filtered = clpf_block(&block, w, h, clpf_strength(strength));
            for i in 0..h {
                for j in 0..w {
                    out.set(sx + j, sy + i, filtered[i * w + j]);
                }
            }
        }
    }
}

fn sb_mse(a: &PixelPlane, b: &PixelPlane, sx: usize, sy: usize) -> f64 {
    let w = (a.width - sx).min(SB_SIZE);
    let h = (a.height - sy).min(SB_SIZE);
    let mut acc = 0.0;
    for i in 0..h {
        for j in 0..w {
            let d = (a.get(sx + j, sy + i) - b.get(sx + j, sy + i)) as f64;
            acc += d * d;
        }
    }
    acc / (w * h) as f64
}

/// Encoder side: for each stage in pipeline order, choose the per-SB
/// strength (0 disables) minimizing MSE against `source`, code the
/// decisions, and apply them. Returns the filtered frame and the decisions
/// per stage in coding order.
pub fn apply_inloop_encode(
    enc: &mut RangeEncoder,
    models: &mut InloopModels,
    recon: &PixelPlane,
    source: &PixelPlane,
    order: PipelineOrder,
) -> (PixelPlane, Vec<Vec<FilterDecision>>) {
    assert_eq!((recon.width, recon.height), (source.width, source.height));
    let mut frame = recon.clone();
    let mut all_decisions = Vec::new();
    for &stage in order.stages() {
        let input = frame.clone();
        let mut decisions = Vec::new();
        for sy in (0..input.height).step_by(SB_SIZE) {
            for sx in (0..input.width).step_by(SB_SIZE) {
                let base_mse = sb_mse(&input, source, sx, sy);
                let mut best = FilterDecision { strength: 0 };
                let mut best_mse = base_mse;
                let mut best_sb: Option<PixelPlane> = None;
                for s in 1..=3u8 {
                    let mut cand = frame.clone();
                    filter_sb(&input, &mut cand, sx, sy, stage, s);
                    let mse = sb_mse(&cand, source, sx, sy);
                    if mse < best_mse {
                        best_mse = mse;
                        best = FilterDecision { strength: s };
                        best_sb = Some(cand);
                    }
                }
                encode_decision(enc, models, stage, best);
                if let Some(cand) = best_sb {
                    frame = cand;
                }
                decisions.push(best);
            }
        }
        all_decisions.push(decisions);
    }
    (frame, all_decisions)
}

/// Decoder side: reads the per-SB decisions and replays the filters.
pub fn apply_inloop_decode(
    dec: &mut RangeDecoder<'_>,
    models: &mut InloopModels,
    recon: &PixelPlane,
    order: PipelineOrder,
) -> Result<PixelPlane> {
    let mut frame = recon.clone();
    for &stage in order.stages() {
        let input = frame.clone();
        for sy in (0..input.height).step_by(SB_SIZE) {
            for sx in (0..input.width).step_by(SB_SIZE) {
                let d = decode_decision(dec, models, stage)?;
                if d.enabled() {
                    filter_sb(&input, &mut frame, sx, sy, stage, d.strength);
                }
            }
        }
    }
    Ok(frame)
}
