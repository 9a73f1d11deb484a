//! Two-pass rate control: the first pass records per-frame measured scales
//! to a binary log; the second pass evaluates the bit-usage plan with those
//! exact values plus a running correction offset. Chunked first passes
//! merge into a log identical to a monolithic one.

use std::collections::VecDeque;
use std::io::{Read, Write};

use crate::rc::model::{
    predict_bits, q_from_qp, search_qp, FrameType, RcModel,
};
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"DTKL";
const VERSION: u8 = 1;
/// Frames averaged for the over/under-estimate correction offset.
const OFFSET_WINDOW: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPassRecord {
    pub frame_type: FrameType,
    pub scale: f64,
    pub q: f64,
    pub bits: u64,
}

/// Ordered first-pass records starting at `start_frame` of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPassLog {
    pub start_frame: u64,
    pub records: Vec<TwoPassRecord>,
}

impl TwoPassLog {
    pub fn new(start_frame: u64) -> Self {
        Self { start_frame, records: Vec::new() }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&self.start_frame.to_le_bytes())?;
        w.write_all(&(self.records.len() as u32).to_le_bytes())?;
        for r in &self.records {
            w.write_all(&[r.frame_type.index() as u8])?;
            w.write_all(&r.scale.to_le_bytes())?;
            w.write_all(&r.q.to_le_bytes())?;
            w.write_all(&r.bits.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut header = [0u8; 17];
        read_exact(r, &mut header)?;
        if header[..4] != MAGIC {
            return Err(Error::TwoPassLog("bad first-pass log magic".into()));
        }
        if header[4] != VERSION {
            return Err(Error::VersionMismatch(header[4]));
        }
        let start_frame = u64::from_le_bytes(header[5..13].try_into().unwrap());
        let count = u32::from_le_bytes(header[13..17].try_into().unwrap()) as usize;
        let mut records = Vec::with_capacity(count);
        for _ in 0..count {
            let mut rec = [0u8; 25];
            read_exact(r, &mut rec)?;
            records.push(TwoPassRecord {
                frame_type: FrameType::from_index(rec[0])?,
                scale: f64::from_le_bytes(rec[1..9].try_into().unwrap()),
                q: f64::from_le_bytes(rec[9..17].try_into().unwrap()),
                bits: u64::from_le_bytes(rec[17..25].try_into().unwrap()),
            });
        }
        Ok(Self { start_frame, records })
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::TwoPassLog("first-pass log truncated".into()))
}

/// Concatenates ordered chunk logs, verifying they tile the sequence with
/// no gaps or overlaps.
pub fn chunk_merge(chunks: &[TwoPassLog]) -> Result<TwoPassLog> {
    let first = chunks
        .first()
        .ok_or_else(|| Error::TwoPassLog("no chunks to merge".into()))?;
    let mut merged = TwoPassLog::new(first.start_frame);
    let mut next = first.start_frame;
    for c in chunks {
        if c.start_frame != next {
            return Err(Error::TwoPassLog(format!(
                "chunk starts at frame {} but {} expected (gap or overlap)",
                c.start_frame, next
            )));
        }
        merged.records.extend_from_slice(&c.records);
        next += c.records.len() as u64;
    }
    Ok(merged)
}

/// Second-pass controller: replans from the exact remaining measured
/// scales before every frame.
#[derive(Debug, Clone)]
pub struct TwoPassController {
    pub model: RcModel,
    log: TwoPassLog,
    pos: usize,
    errors: VecDeque<f64>,
}

impl TwoPassController {
    pub fn new(model: RcModel, log: TwoPassLog) -> Self {
        Self {
            model,
            log,
            pos: 0,
            errors: VecDeque::new(),
        }
    }

    pub fn frames_remaining(&self) -> usize {
        self.log.records.len() - self.pos
    }

    fn offset(&self) -> f64 {
        if self.errors.is_empty() {
            0.0
        } else {
            self.errors.iter().sum::<f64>() / self.errors.len() as f64
        }
    }

    /// Frame type of the next frame per the log.
    pub fn next_type(&self) -> Result<FrameType> {
        self.log
            .records
            .get(self.pos)
            .map(|r| r.frame_type)
            .ok_or_else(|| Error::TwoPassLog("second pass ran past the log".into()))
    }

    /// Plans the quantizer for the next frame: Eq-of-the-model totals with
    /// per-frame measured scales plus the running correction offset,
    /// steering fullness back to the buffer midpoint by the sequence end.
    pub fn next_qp(&self) -> Result<u32> {
        let remaining = &self.log.records[self.pos..];
        if remaining.is_empty() {
            return Err(Error::TwoPassLog("second pass ran past the log".into()));
        }
        let n = remaining.len() as f64;
        let cfg = &self.model.cfg;
        let steer = self.model.fullness - cfg.buffer_size() / 2.0;
        let target = (n * cfg.target_bits_per_frame + steer).max(1.0);
        let offset = self.offset();
        let (qp, _) = search_qp(target, |qp| {
            let q = q_from_qp(qp);
            remaining
                .iter()
                .map(|r| predict_bits(r.scale, q, self.model.alpha(r.frame_type)) + offset)
                .sum()
        });
        Ok(qp)
    }

    /// Absorbs the actual bits spent on the frame just encoded at `qp`.
    pub fn post_frame(&mut self, qp: u32, actual_bits: f64) -> Result<()> {
        let rec = *self
            .log
            .records
            .get(self.pos)
            .ok_or_else(|| Error::TwoPassLog("second pass ran past the log".into()))?;
        let q = q_from_qp(qp);
        let predicted = predict_bits(rec.scale, q, self.model.alpha(rec.frame_type));
        self.errors.push_back(actual_bits - predicted);
        if self.errors.len() > OFFSET_WINDOW {
            self.errors.pop_front();
        }
        self.model.post_frame(rec.frame_type, actual_bits, q)?;
        self.pos += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rc::model::{RcConfig, RcPlan};

    fn p_record(scale: f64) -> TwoPassRecord {
        TwoPassRecord { frame_type: FrameType::P, scale, q: 2.0, bits: 500 }
    }

    #[test]
    fn log_roundtrips_byte_exactly() {
        let mut log = TwoPassLog::new(7);
        for i in 0..20 {
            log.records.push(TwoPassRecord {
                frame_type: FrameType::from_index((i % 4) as u8).unwrap(),
                scale: 1000.0 + i as f64 * 0.125,
                q: 1.5,
                bits: 700 + i,
            });
        }
        let mut buf = Vec::new();
        log.write(&mut buf).unwrap();
        let back = TwoPassLog::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, log);
        let mut buf2 = Vec::new();
        back.write(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn corrupt_and_truncated_logs_rejected() {
        let mut log = TwoPassLog::new(0);
        log.records.push(p_record(1000.0));
        let mut buf = Vec::new();
        log.write(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'x';
        assert!(matches!(TwoPassLog::read(&mut bad.as_slice()), Err(Error::TwoPassLog(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(TwoPassLog::read(&mut bad.as_slice()), Err(Error::VersionMismatch(9))));
        buf.truncate(buf.len() - 3);
        assert!(matches!(TwoPassLog::read(&mut buf.as_slice()), Err(Error::TwoPassLog(_))));
    }

    #[test]
    fn chunk_merge_identity_and_equivalence() {
        let mut full = TwoPassLog::new(0);
        for i in 0..250 {
            full.records.push(p_record(900.0 + i as f64));
        }
        assert_eq!(chunk_merge(&[full.clone()]).unwrap(), full);
        let chunks: Vec<TwoPassLog> = (0..5)
            .map(|c| TwoPassLog {
                start_frame: (c * 50) as u64,
                records: full.records[c * 50..(c + 1) * 50].to_vec(),
            })
            .collect();
        let merged = chunk_merge(&chunks).unwrap();
        assert_eq!(merged, full);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        merged.write(&mut a).unwrap();
        full.write(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaps_overlaps_and_empty_lists_rejected() {
        assert!(matches!(chunk_merge(&[]), Err(Error::TwoPassLog(_))));
        let a = TwoPassLog { start_frame: 0, records: vec![p_record(1.0); 10] };
        let gap = TwoPassLog { start_frame: 11, records: vec![p_record(1.0); 10] };
        let overlap = TwoPassLog { start_frame: 9, records: vec![p_record(1.0); 10] };
        assert!(chunk_merge(&[a.clone(), gap]).is_err());
        assert!(chunk_merge(&[a, overlap]).is_err());
    }

    #[test]
    fn uniform_log_matches_the_converged_one_pass_plan() {
        let cfg = RcConfig::new(1000.0, 20);
        // One-pass model with the P-type smoother converged to scale 3000.
        let mut model = RcModel::new(cfg.clone());
        for _ in 0..200 {
            model.post_frame(FrameType::P, 3000.0, 1.0).unwrap();
            model.fullness = cfg.buffer_size() / 2.0;
        }
        let plan = RcPlan::from_types(
            &vec![FrameType::P; 20],
            20.0 * cfg.target_bits_per_frame,
        );
        let (one_pass_qp, _) = model.plan_quantizer(&plan).unwrap();

        let mut log = TwoPassLog::new(0);
        for _ in 0..20 {
            log.records.push(p_record(3000.0));
        }
        let ctl = TwoPassController::new(RcModel::new(cfg), log);
        assert_eq!(ctl.next_qp().unwrap(), one_pass_qp);
    }
}
