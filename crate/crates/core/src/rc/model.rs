//! The bit-reservoir rate model: R = scale * Q^(-alpha) per frame type,
//! Bessel-smoothed scale tracking, and quantizer planning over the
//! remaining buffer interval.

use crate::rc::bessel::BesselFilter2;
use crate::{Error, Result};

pub const NUM_FRAME_TYPES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameType {
    Key,
    Golden,
    P,
    B,
}

impl FrameType {
    pub fn index(self) -> usize {
        match self {
            FrameType::Key => 0,
            FrameType::Golden => 1,
            FrameType::P => 2,
            FrameType::B => 3,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(FrameType::Key),
            1 => Ok(FrameType::Golden),
            2 => Ok(FrameType::P),
            3 => Ok(FrameType::B),
            _ => Err(Error::TwoPassLog(format!("invalid frame type {i}"))),
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'K' => Ok(FrameType::Key),
            'G' => Ok(FrameType::Golden),
            'P' => Ok(FrameType::P),
            'B' => Ok(FrameType::B),
            _ => Err(Error::InvalidArgument(format!(
                "invalid GOP pattern character '{c}' (K|G|P|B)"
            ))),
        }
    }
}

/// Quantization parameter grid: Q = Q0 * 2^(qp/6), qp in [0, 255]. The
/// log-spaced grid makes plan search monotone and bounded.
pub const QP_MAX: u32 = 255;
const Q0: f64 = 0.25;

pub fn q_from_qp(qp: u32) -> f64 {
    Q0 * (2f64).powf(qp as f64 / 6.0)
}

/// Solves R = scale * Q^(-alpha) for scale.
pub fn scale_from_frame(bits: f64, q: f64, alpha: f64) -> Result<f64> {
    if bits <= 0.0 || q <= 0.0 || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "scale_from_frame requires positive inputs (bits={bits}, q={q}, alpha={alpha})"
        )));
    }
    Ok(bits * q.powf(alpha))
}

/// Predicted bits for a frame under the model.
pub fn predict_bits(scale: f64, q: f64, alpha: f64) -> f64 {
    scale * q.powf(-alpha)
}

#[derive(Debug, Clone)]
pub struct RcConfig {
    pub target_bits_per_frame: f64,
    /// Buffer interval in frames; buffer size = interval * per-frame target.
    pub buffer_frames: usize,
    /// Exponent per frame type (KEY, GOLDEN, P, B).
    pub alpha: [f64; NUM_FRAME_TYPES],
}

impl RcConfig {
    pub fn new(target_bits_per_frame: f64, buffer_frames: usize) -> Self {
        Self {
            target_bits_per_frame,
            buffer_frames,
            // Keyframes spend bits more steeply with quality than predicted
            // frames at the default operating point.
            alpha: [1.5, 1.0, 1.0, 1.0],
        }
    }

    pub fn buffer_size(&self) -> f64 {
        self.target_bits_per_frame * self.buffer_frames as f64
    }
}

/// Bit-usage plan over the remaining buffer interval: per-type frame counts
/// and the total bit target.
#[derive(Debug, Clone)]
pub struct RcPlan {
    pub counts: [usize; NUM_FRAME_TYPES],
    pub target_bits: f64,
}

impl RcPlan {
    pub fn from_types(types: &[FrameType], target_bits: f64) -> Self {
        let mut counts = [0usize; NUM_FRAME_TYPES];
        for t in types {
            counts[t.index()] += 1;
        }
        Self { counts, target_bits }
    }

    pub fn num_frames(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Finds the quantizer step whose predicted bits (a strictly decreasing
/// function of qp) are log-nearest to the target; clamps at the grid ends
/// and reports the clamp.
pub fn search_qp(target: f64, bits_at: impl Fn(u32) -> f64) -> (u32, bool) {
    let target = target.max(1e-9);
    let at = |qp: u32| bits_at(qp).max(1e-9);
    let (mut lo, mut hi) = (0u32, QP_MAX);
    if at(lo) <= target {
        return (lo, at(lo) < target);
    }
    if at(hi) >= target {
        return (hi, at(hi) > target);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if at(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dlo = (at(lo).ln() - target.ln()).abs();
    let dhi = (at(hi).ln() - target.ln()).abs();
    (if dlo <= dhi { lo } else { hi }, false)
}

#[derive(Debug, Clone)]
pub struct RcModel {
    pub cfg: RcConfig,
    filters: [BesselFilter2; NUM_FRAME_TYPES],
    pub fullness: f64,
    pub underflowed: bool,
    pub overflowed: bool,
}

impl RcModel {
    pub fn new(cfg: RcConfig) -> Self {
        // Full-scale reaction in half the buffer interval, with fast
        // startup adaptation over the first interval.
        let settle = (cfg.buffer_frames as f64 / 2.0).max(1.0);
        let ramp = cfg.buffer_frames as u64;
        let filters = std::array::from_fn(|_| {
            BesselFilter2::new(settle).with_startup_ramp(ramp)
        });
        let fullness = cfg.buffer_size() / 2.0;
        Self { cfg, filters, fullness, underflowed: false, overflowed: false }
    }

    /// Smoothed scale for a frame type; a conservative default before any
    /// frame of that type has been seen.
    pub fn smoothed_scale(&self, t: FrameType) -> f64 {
        let f = &self.filters[t.index()];
        if f.is_seeded() {
            f.value()
        } else {
            // One nominal frame at Q = 1 — overwritten by the first real
            // measurement thanks to seeding.
            self.cfg.target_bits_per_frame
        }
    }

    pub fn alpha(&self, t: FrameType) -> f64 {
        self.cfg.alpha[t.index()]
    }

    /// Predicted total bits of a plan at quantizer step `qp`.
    pub fn plan_bits(&self, plan: &RcPlan, qp: u32) -> f64 {
        let q = q_from_qp(qp);
        let mut total = 0.0;
        for (i, &n) in plan.counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let t = FrameType::from_index(i as u8).unwrap();
            total += n as f64 * predict_bits(self.smoothed_scale(t), q, self.alpha(t));
        }
        total
    }

    /// Picks the quantizer step whose predicted plan bits best match the
    /// plan target (log-domain nearest on the monotone grid). Returns the
    /// step and whether the target was unreachable (clamped).
    pub fn plan_quantizer(&self, plan: &RcPlan) -> Result<(u32, bool)> {
        if plan.num_frames() == 0 {
            return Err(Error::InvalidArgument("empty rate-control plan".into()));
        }
        Ok(search_qp(plan.target_bits, |qp| self.plan_bits(plan, qp)))
    }

    /// Builds the standard one-pass plan over the next `types` frames:
    /// spend the per-frame target plus whatever is needed to steer buffer
    /// fullness back to its midpoint by the end of the window.
    pub fn one_pass_plan(&self, types: &[FrameType]) -> RcPlan {
        let n = types.len() as f64;
        let steer = self.fullness - self.cfg.buffer_size() / 2.0;
        let target = (n * self.cfg.target_bits_per_frame + steer).max(1.0);
        RcPlan::from_types(types, target)
    }

    /// Absorbs one encoded frame: updates buffer fullness (flagging
    /// under/overflow) and feeds the measured scale to the frame type's
    /// smoother.
    pub fn post_frame(&mut self, t: FrameType, actual_bits: f64, q: f64) -> Result<()> {
        let scale = scale_from_frame(actual_bits.max(1.0), q, self.alpha(t))?;
        self.filters[t.index()].update(scale);
        self.fullness += self.cfg.target_bits_per_frame - actual_bits;
        if self.fullness < 0.0 {
            self.fullness = 0.0;
            self.underflowed = true;
        }
        let size = self.cfg.buffer_size();
        if self.fullness > size {
            self.fullness = size;
            self.overflowed = true;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_inversion_examples() {
        assert_eq!(scale_from_frame(500.0, 2.0, 1.0).unwrap(), 1000.0);
        for alpha in [0.5, 1.0, 1.7] {
            assert_eq!(scale_from_frame(700.0, 1.0, alpha).unwrap(), 700.0);
        }
        let (r, q, a) = (1234.0, 3.7, 1.4);
        let s = scale_from_frame(r, q, a).unwrap();
        assert!((predict_bits(s, q, a) - r).abs() < 1e-9);
        assert!(scale_from_frame(-1.0, 2.0, 1.0).is_err());
        assert!(scale_from_frame(10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn qp_grid_is_log_spaced() {
        assert_eq!(q_from_qp(0), 0.25);
        assert!((q_from_qp(18) - 2.0).abs() < 1e-12);
        assert!((q_from_qp(24) / q_from_qp(18) - 2.0).abs() < 1e-12);
    }

    fn seeded_model(scales: [(FrameType, f64); 2]) -> RcModel {
        let mut m = RcModel::new(RcConfig::new(1000.0, 30));
        for (t, s) in scales {
            // Feed one frame measuring exactly that scale at Q = 1.
            m.post_frame(t, s, 1.0).unwrap();
            m.fullness = m.cfg.buffer_size() / 2.0;
        }
        m
    }

    #[test]
    fn single_type_plan_closed_form() {
        let m = seeded_model([(FrameType::P, 1000.0), (FrameType::P, 1000.0)]);
        let plan = RcPlan::from_types(&[FrameType::P; 10], 5000.0);
        let (qp, clamped) = m.plan_quantizer(&plan).unwrap();
        assert!(!clamped);
        // 10 * 1000 / Q = 5000 -> Q = 2 exactly on the grid.
        assert!((q_from_qp(qp) - 2.0).abs() < 1e-12, "Q = {}", q_from_qp(qp));
    }

    #[test]
    fn infinite_target_clamps_to_finest() {
        let m = seeded_model([(FrameType::P, 1000.0), (FrameType::P, 1000.0)]);
        let plan = RcPlan::from_types(&[FrameType::P; 10], 1e18);
        let (qp, clamped) = m.plan_quantizer(&plan).unwrap();
        assert_eq!(qp, 0);
        assert!(clamped);
    }

    #[test]
    fn plan_quantizer_matches_fine_grid_bisection() {
        let m = seeded_model([(FrameType::Key, 50_000.0), (FrameType::P, 4_000.0)]);
        let mut types = vec![FrameType::Key];
        types.extend(std::iter::repeat(FrameType::P).take(29));
        for target in [10_000.0, 40_000.0, 120_000.0, 500_000.0] {
            let plan = RcPlan::from_types(&types, target);
            let (qp, _) = m.plan_quantizer(&plan).unwrap();
            // Oracle: exhaustive scan of a 10x finer grid, then snap to the
            // coarse grid by log distance.
            let bits_at = |q: f64| {
                 29.0 * predict_bits(m.smoothed_scale(FrameType::P), q, 1.0)
                    + predict_bits(m.smoothed_scale(FrameType::Key), q, 1.5)
            };
            let fine = (0..=2550u32)
                .min_by(|&a, &b| {
                    let qa = Q0 * (2f64).powf(a as f64 / 60.0);
                    let qb = Q0 * (2f64).powf(b as f64 / 60.0);
                    (bits_at(qa).ln() - target.ln())
                        .abs()
                        .total_cmp(&(bits_at(qb).ln() - target.ln()).abs())
                })
                .unwrap();
            let snapped = ((fine + 5) / 10).min(QP_MAX);
            assert!(
                (qp as i64 - snapped as i64).abs() <= 1,
                "qp {qp} vs oracle {snapped} at target {target}"
            );
        }
    }

    #[test]
    fn plan_quantizer_is_monotone_in_target() {
        let m = seeded_model([(FrameType::Key, 50_000.0), (FrameType::P, 4_000.0)]);
        let mut types = vec![FrameType::Key];
        types.extend(std::iter::repeat(FrameType::P).take(29));
        let mut prev_qp = QP_MAX;
        let mut target = 2_000.0;
        while target < 1e7 {
            let plan = RcPlan::from_types(&types, target);
            let (qp, _) = m.plan_quantizer(&plan).unwrap();
            assert!(qp <= prev_qp, "target {target}: qp {qp} > previous {prev_qp}");
            prev_qp = qp;
            target *= 1.07;
        }
    }

    #[test]
    fn post_frame_on_target_leaves_fullness_unchanged() {
        let mut m = RcModel::new(RcConfig::new(1000.0, 30));
        let before = m.fullness;
        m.post_frame(FrameType::P, 1000.0, 2.0).unwrap();
        assert_eq!(m.fullness, before);
        assert!(!m.underflowed && !m.overflowed);
    }

    #[test]
    fn buffer_flags_raise_on_escape() {
        let mut m = RcModel::new(RcConfig::new(1000.0, 4));
        for _ in 0..10 {
            m.post_frame(FrameType::P, 5000.0, 2.0).unwrap();
        }
        assert!(m.underflowed);
        assert_eq!(m.fullness, 0.0);
        for _ in 0..10 {
            m.post_frame(FrameType::P, 1.0, 2.0).unwrap();
        }
        assert!(m.overflowed);
    }

    #[test]
    fn per_type_smoothers_do_not_cross_talk() {
        let mut m = RcModel::new(RcConfig::new(1000.0, 16));
        for _ in 0..100 {
            m.post_frame(FrameType::Key, 10_000.0, 1.0).unwrap();
            m.post_frame(FrameType::P, 1_000.0, 1.0).unwrap();
            m.fullness = m.cfg.buffer_size() / 2.0;
        }
        let sk = m.smoothed_scale(FrameType::Key);
        let sp = m.smoothed_scale(FrameType::P);
        assert!((sk - 10_000.0f64.powf(1.0)).abs() / 10_000.0 < 0.01, "KEY scale {sk}");
        assert!((sp - 1_000.0).abs() / 1_000.0 < 0.01, "P scale {sp}");
    }
}
