//! Frame and sequence coding: the bitstream container, the per-frame
//! pipeline (pad, pre-filter, RDO, DC hierarchy + band prediction + PVQ,
//! post-filter, in-loop filters, crop), and constant-qp or rate-controlled
//! sequence encoding.

use crate::codec::plane::{
    decode_chroma_plane, decode_luma_plane, derive_chroma_tree, encode_chroma_plane,
    encode_luma_plane, CodecModels, Tools,
};
use crate::dering::inloop::{apply_inloop_decode, apply_inloop_encode};
use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::io::Frame;
use crate::rc::{
    gop_types, q_from_qp, scale_from_frame, FrameType, RcConfig, RcModel, TwoPassController,
    TwoPassLog, TwoPassRecord,
};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"DTK1";
pub const VERSION: u8 = 1;
/// Luma superblock size; chroma superblocks are half this.
pub const SB_SIZE: usize = 32;
/// Header qp value signaling per-frame quantizers chosen by rate control.
pub const QP_PER_FRAME: u8 = 0xFF;

/// How the sequence quantizer is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RateMode {
    /// One fixed quantizer index for every frame.
    ConstantQp(u8),
    /// One-pass rate control toward an average bits-per-frame budget.
    TargetBitrate { bits_per_frame: f64, buffer_frames: usize, gop: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub tools: Tools,
    pub rate: RateMode,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { tools: Tools::default(), rate: RateMode::ConstantQp(36) }
    }
}

/// Everything the encoder produces for a sequence.
pub struct EncodeOutput {
    pub bitstream: Vec<u8>,
    /// Encoder-side reconstructions; the decoder must match these exactly.
    pub recons: Vec<Frame>,
    pub frame_bits: Vec<u64>,
    pub frame_qps: Vec<u8>,
    /// First-pass scale measurements (bits * Q^alpha) per frame.
    pub frame_scales: Vec<f64>,
    pub frame_types: Vec<FrameType>,
}

/// Encodes one frame at a fixed qp. Returns the entropy payload and the
/// encoder-side reconstruction.
pub fn encode_frame(frame: &Frame, qp: u8, tools: &Tools) -> Result<(Vec<u8>, Frame)> {
    if qp == QP_PER_FRAME {
        return Err(Error::InvalidArgument("qp 255 is reserved".into()));
    }
    let mut enc = RangeEncoder::new();
    let mut models = CodecModels::new();

    let padded_y = frame.y.pad_to_multiple(SB_SIZE);
    let luma = encode_luma_plane(&mut enc, &mut models, &padded_y, qp, tools, SB_SIZE)?;
    let mut recon_y = luma.recon;
    if let Some(order) = tools.dering {
        let (filtered, _) =
            apply_inloop_encode(&mut enc, &mut models.inloop, &recon_y, &padded_y, order);
        recon_y = filtered;
    }

    let chroma = match &frame.chroma {
        None => None,
        Some((u, v)) => {
            if frame.y.width % 2 != 0 || frame.y.height % 2 != 0 {
                return Err(Error::InvalidArgument(
                    "4:2:0 input requires even luma dimensions".into(),
                ));
            }
            let chroma_trees: Vec<_> = luma.trees.iter().map(derive_chroma_tree).collect();
            let pu = u.pad_to_multiple(SB_SIZE / 2);
            let pv = v.pad_to_multiple(SB_SIZE / 2);
            let cu = encode_chroma_plane(
                &mut enc, &mut models, &pu, qp, tools, &chroma_trees, &luma.store,
            )?;
            let cv = encode_chroma_plane(
                &mut enc, &mut models, &pv, qp, tools, &chroma_trees, &luma.store,
            )?;
            Some((cu.recon.crop(u.width, u.height), cv.recon.crop(v.width, v.height)))
        }
    };

    let recon = Frame { y: recon_y.crop(frame.y.width, frame.y.height), chroma };
    Ok((enc.finish(), recon))
}

/// Decodes one frame payload given the header geometry.
pub fn decode_frame(
    payload: &[u8],
    width: usize,
    height: usize,
    bit_depth: u8,
    has_chroma: bool,
    qp: u8,
    tools: &Tools,
) -> Result<Frame> {
    let mut dec = RangeDecoder::new(payload);
    let mut models = CodecModels::new();
    let pw = width.div_ceil(SB_SIZE) * SB_SIZE;
    let ph = height.div_ceil(SB_SIZE) * SB_SIZE;
    let luma =
        decode_luma_plane(&mut dec, &mut models, pw, ph, bit_depth, qp, tools, SB_SIZE)?;
    let mut recon_y = luma.recon;
    if let Some(order) = tools.dering {
        recon_y = apply_inloop_decode(&mut dec, &mut models.inloop, &recon_y, order)?;
    }

    let chroma = if has_chroma {
        if width % 2 != 0 || height % 2 != 0 {
            return Err(Error::MalformedStream(
                "4:2:0 stream with odd luma dimensions".into(),
            ));
        }
        let chroma_trees: Vec<_> = luma.trees.iter().map(derive_chroma_tree).collect();
        let (cw, ch) = (width / 2, height / 2);
        let (pcw, pch) = (pw / 2, ph / 2);
        let cu = decode_chroma_plane(
            &mut dec, &mut models, pcw, pch, bit_depth, qp, tools, &chroma_trees, &luma.store,
        )?;
        let cv = decode_chroma_plane(
            &mut dec, &mut models, pcw, pch, bit_depth, qp, tools, &chroma_trees, &luma.store,
        )?;
        Some((cu.recon.crop(cw, ch), cv.recon.crop(cw, ch)))
    } else {
        None
    };

    if dec.overread() {
        return Err(Error::Truncated("frame payload ended early".into()));
    }
    Ok(Frame { y: recon_y.crop(width, height), chroma })
}

fn check_geometry(frames: &[Frame]) -> Result<(usize, usize, u8, bool)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidArgument("no frames to encode".into()))?;
    let geom = (first.y.width, first.y.height, first.y.bit_depth, first.chroma.is_some());
    for f in frames {
        if (f.y.width, f.y.height, f.y.bit_depth, f.chroma.is_some()) != geom {
            return Err(Error::InvalidArgument("frames change geometry mid-sequence".into()));
        }
    }
    if geom.0 == 0 || geom.1 == 0 {
        return Err(Error::InvalidArgument("empty frame".into()));
    }
    Ok(geom)
}

/// Encodes a sequence into one bitstream.
pub fn encode(frames: &[Frame], cfg: &EncoderConfig) -> Result<EncodeOutput> {
    let (width, height, bit_depth, has_chroma) = check_geometry(frames)?;
    let header_qp = match cfg.rate {
        RateMode::ConstantQp(qp) if qp != QP_PER_FRAME => qp,
        RateMode::ConstantQp(_) => {
            return Err(Error::InvalidArgument("qp must be in 0..=254".into()))
        }
        RateMode::TargetBitrate { .. } => QP_PER_FRAME,
    };

    let mut out =
        container_header(width, height, bit_depth, has_chroma, &cfg.tools, header_qp, frames.len());

    let mut recons = Vec::with_capacity(frames.len());
    let mut frame_bits = Vec::with_capacity(frames.len());
    let mut frame_qps = Vec::with_capacity(frames.len());
    let mut frame_scales = Vec::with_capacity(frames.len());
    let mut frame_types = Vec::with_capacity(frames.len());

    let mut rc: Option<(RcModel, Vec<FrameType>)> = match &cfg.rate {
        RateMode::ConstantQp(_) => None,
        RateMode::TargetBitrate { bits_per_frame, buffer_frames, gop } => {
            let cfg_rc = RcConfig::new(*bits_per_frame, *buffer_frames);
            let types = gop_types(gop, frames.len())?;
            Some((RcModel::new(cfg_rc), types))
        }
    };

    for (i, frame) in frames.iter().enumerate() {
        let (qp, ftype) = match &mut rc {
            None => (header_qp, FrameType::Key),
            Some((model, types)) => {
                let end = (i + model.cfg.buffer_frames).min(types.len());
                let plan = model.one_pass_plan(&types[i..end]);
                let (qp, _) = model.plan_quantizer(&plan)?;
                (qp.min(QP_PER_FRAME as u32 - 1) as u8, types[i])
            }
        };
        let (payload, recon) = encode_frame(frame, qp, &cfg.tools)?;
        if header_qp == QP_PER_FRAME {
            out.push(qp);
        }
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        let bits = (payload.len() as u64 + 4 + (header_qp == QP_PER_FRAME) as u64) * 8;
        if let Some((model, _)) = &mut rc {
            model.post_frame(ftype, bits as f64, q_from_qp(qp as u32))?;
        }
        frame_scales.push(scale_from_frame(
            bits as f64,
            q_from_qp(qp as u32),
            rc.as_ref().map(|(m, _)| m.alpha(ftype)).unwrap_or(1.0),
        )?);
        recons.push(recon);
        frame_bits.push(bits);
        frame_qps.push(qp);
        frame_types.push(ftype);
    }

    Ok(EncodeOutput { bitstream: out, recons, frame_bits, frame_qps, frame_scales, frame_types })
}

fn container_header(
    width: usize,
    height: usize,
    bit_depth: u8,
    has_chroma: bool,
    tools: &Tools,
    header_qp: u8,
    nframes: usize,
) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out.push(bit_depth);
    out.push(has_chroma as u8);
    out.push(tools.to_byte());
    out.push(header_qp);
    out.extend_from_slice(&(nframes as u32).to_le_bytes());
    out
}

/// Converts an encode run into a first-pass rate-control log, one record
/// per frame, for a later two-pass encode of the same frames.
pub fn first_pass_log(out: &EncodeOutput, start_frame: u64) -> TwoPassLog {
    let mut log = TwoPassLog::new(start_frame);
    for i in 0..out.frame_bits.len() {
        log.records.push(TwoPassRecord {
            frame_type: out.frame_types[i],
            scale: out.frame_scales[i],
            q: q_from_qp(out.frame_qps[i] as u32),
            bits: out.frame_bits[i],
        });
    }
    log
}

/// Encodes a sequence with two-pass rate control, replanning every frame's
/// quantizer from the first-pass log's measured scales.
pub fn encode_two_pass(
    frames: &[Frame],
    tools: &Tools,
    rc: RcConfig,
    log: TwoPassLog,
) -> Result<EncodeOutput> {
    let (width, height, bit_depth, has_chroma) = check_geometry(frames)?;
    if log.records.len() != frames.len() {
        return Err(Error::TwoPassLog(format!(
            "first-pass log covers {} frames but {} were given",
            log.records.len(),
            frames.len()
        )));
    }
    let mut out =
        container_header(width, height, bit_depth, has_chroma, tools, QP_PER_FRAME, frames.len());
    let mut ctl = TwoPassController::new(RcModel::new(rc), log);

    let mut recons = Vec::with_capacity(frames.len());
    let mut frame_bits = Vec::with_capacity(frames.len());
    let mut frame_qps = Vec::with_capacity(frames.len());
    let mut frame_scales = Vec::with_capacity(frames.len());
    let mut frame_types = Vec::with_capacity(frames.len());

    for frame in frames {
        let ftype = ctl.next_type()?;
        let qp = ctl.next_qp()?.min(QP_PER_FRAME as u32 - 1) as u8;
        let (payload, recon) = encode_frame(frame, qp, tools)?;
        out.push(qp);
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        let bits = (payload.len() as u64 + 4 + 1) * 8;
        ctl.post_frame(qp as u32, bits as f64)?;
        frame_scales.push(scale_from_frame(bits as f64, q_from_qp(qp as u32), ctl.model.alpha(ftype))?);
        recons.push(recon);
        frame_bits.push(bits);
        frame_qps.push(qp);
        frame_types.push(ftype);
    }

    Ok(EncodeOutput { bitstream: out, recons, frame_bits, frame_qps, frame_scales, frame_types })
}

/// Decodes a whole bitstream back to frames.
pub fn decode(bytes: &[u8]) -> Result<Vec<Frame>> {
    const HEADER_LEN: usize = 4 + 1 + 4 + 4 + 1 + 1 + 1 + 1 + 4;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated("bitstream shorter than the header".into()));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::MalformedStream("bad bitstream magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::VersionMismatch(bytes[4]));
    }
    let width = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(Error::MalformedStream("zero frame dimensions".into()));
    }
    let bit_depth = bytes[13];
    if bit_depth != 8 && bit_depth != 10 {
        return Err(Error::MalformedStream(format!("bit depth {bit_depth} not supported")));
    }
    let has_chroma = match bytes[14] {
        0 => false,
        1 => true,
        v => return Err(Error::MalformedStream(format!("unknown chroma format {v}"))),
    };
    let tools = Tools::from_byte(bytes[15])?;
    let header_qp = bytes[16];
    let nframes = u32::from_le_bytes(bytes[17..21].try_into().unwrap()) as usize;

    let mut pos = HEADER_LEN;
    let mut frames = Vec::with_capacity(nframes);
    for _ in 0..nframes {
        let qp = if header_qp == QP_PER_FRAME {
            let v = *bytes
                .get(pos)
                .ok_or_else(|| Error::Truncated("missing per-frame qp".into()))?;
            pos += 1;
            if v == QP_PER_FRAME {
                return Err(Error::MalformedStream("invalid per-frame qp 255".into()));
            }
            v
        } else {
            header_qp
        };
        let len_bytes = bytes
            .get(pos..pos + 4)
            .ok_or_else(|| Error::Truncated("missing frame length".into()))?;
        let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        pos += 4;
        let payload = bytes
            .get(pos..pos + len)
            .ok_or_else(|| Error::Truncated("frame payload cut short".into()))?;
        pos += len;
        frames.push(decode_frame(payload, width, height, bit_depth, has_chroma, qp, &tools)?);
    }
    if pos != bytes.len() {
        return Err(Error::MalformedStream("trailing bytes after the last frame".into()));
    }
    Ok(frames)
}
