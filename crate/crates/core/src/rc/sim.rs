//! Deterministic rate-control simulation against a synthetic encoder that
//! obeys the rate model exactly (optionally with multiplicative noise).
//! Backs the rc-sim tool and the controller's end-to-end tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rc::model::{q_from_qp, FrameType, RcConfig, RcModel, NUM_FRAME_TYPES};
use crate::rc::twopass::{TwoPassController, TwoPassLog, TwoPassRecord};
use crate::{Error, Result};

/// Expands a GOP pattern string (e.g. "KPPPPPPP") cyclically to `n` types.
pub fn gop_types(pattern: &str, n: usize) -> Result<Vec<FrameType>> {
    if pattern.is_empty() {
        return Err(Error::InvalidArgument("empty GOP pattern".into()));
    }
    let cycle: Vec<FrameType> =
        pattern.chars().map(FrameType::from_char).collect::<Result<_>>()?;
    Ok((0..n).map(|i| cycle[i % cycle.len()]).collect())
}

/// An encoder stand-in producing bits = scale_t * Q^(-alpha_t), with
/// optional multiplicative noise.
#[derive(Debug, Clone)]
pub struct SyntheticEncoder {
    pub scales: [f64; NUM_FRAME_TYPES],
    pub alpha: [f64; NUM_FRAME_TYPES],
    pub noise: f64,
    rng: ChaCha8Rng,
}

impl SyntheticEncoder {
    pub fn new(scales: [f64; NUM_FRAME_TYPES], alpha: [f64; NUM_FRAME_TYPES], seed: u64) -> Self {
        Self { scales, alpha, noise: 0.0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn encode(&mut self, t: FrameType, q: f64) -> f64 {
        let base = self.scales[t.index()] * q.powf(-self.alpha[t.index()]);
        let jitter = if self.noise > 0.0 {
            1.0 + self.rng.gen_range(-self.noise..self.noise)
        } else {
            1.0
        };
        (base * jitter).max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub frames: usize,
    pub total_bits: f64,
    pub target_bits: f64,
    pub qps: Vec<u32>,
    pub underflowed: bool,
    pub overflowed: bool,
}

impl SimReport {
    /// Signed relative rate error of the run.
    pub fn rate_error(&self) -> f64 {
        self.total_bits / self.target_bits - 1.0
    }
}

/// Runs the one-pass controller over `types`, replanning before each frame
/// from the next buffer interval of predicted frame types.
pub fn simulate_one_pass(
    cfg: RcConfig,
    types: &[FrameType],
    enc: &mut SyntheticEncoder,
) -> Result<SimReport> {
    let mut model = RcModel::new(cfg.clone());
    let mut total = 0.0;
    let mut qps = Vec::with_capacity(types.len());
    for i in 0..types.len() {
        let window_end = (i + cfg.buffer_frames).min(types.len());
        let plan = model.one_pass_plan(&types[i..window_end]);
        let (qp, _) = model.plan_quantizer(&plan)?;
        let bits = enc.encode(types[i], q_from_qp(qp));
        model.post_frame(types[i], bits, q_from_qp(qp))?;
        total += bits;
        qps.push(qp);
    }
    Ok(SimReport {
        frames: types.len(),
        total_bits: total,
        target_bits: cfg.target_bits_per_frame * types.len() as f64,
        qps,
        underflowed: model.underflowed,
        overflowed: model.overflowed,
    })
}

/// Runs a first pass (the one-pass controller, recording measured scales)
/// and returns its log.
pub fn run_first_pass(
    cfg: RcConfig,
    types: &[FrameType],
    enc: &mut SyntheticEncoder,
    start_frame: u64,
) -> Result<TwoPassLog> {
    let buffer_frames = cfg.buffer_frames;
    let mut model = RcModel::new(cfg);
    let mut log = TwoPassLog::new(start_frame);
    for (i, &t) in types.iter().enumerate() {
        let window_end = (i + buffer_frames).min(types.len());
        let plan = model.one_pass_plan(&types[i..window_end]);
        let (qp, _) = model.plan_quantizer(&plan)?;
        let q = q_from_qp(qp);
        let bits = enc.encode(t, q);
        let scale = bits * q.powf(model.alpha(t));
        log.records.push(TwoPassRecord { frame_type: t, scale, q, bits: bits as u64 });
        model.post_frame(t, bits, q)?;
    }
    Ok(log)
}

/// Runs the second pass from a first-pass log.
pub fn simulate_two_pass(
    cfg: RcConfig,
    log: TwoPassLog,
    enc: &mut SyntheticEncoder,
) -> Result<SimReport> {
    let frames = log.records.len();
    let target_bits = cfg.target_bits_per_frame * frames as f64;
    let mut ctl = TwoPassController::new(RcModel::new(cfg), log);
    let mut total = 0.0;
    let mut qps = Vec::with_capacity(frames);
    while ctl.frames_remaining() > 0 {
        let qp = ctl.next_qp()?;
        let t = ctl.next_type()?;
        let bits = enc.encode(t, q_from_qp(qp));
        ctl.post_frame(qp, bits)?;
        total += bits;
        qps.push(qp);
    }
    Ok(SimReport {
        frames,
        total_bits: total,
        target_bits,
        qps,
        underflowed: ctl.model.underflowed,
        overflowed: ctl.model.overflowed,
    })
}
