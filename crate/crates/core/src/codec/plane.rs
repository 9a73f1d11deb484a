//! Per-plane coefficient coding: partition signaling, the DC hierarchy,
//! and PVQ band coding with AC-copy (luma) or chroma-from-luma prediction,
//! all through one shared range coder per frame.

use std::collections::HashMap;

use crate::codec::rdo::{rdo_partition, MIN_TX_SIZE};
use crate::dering::inloop::{InloopModels, PipelineOrder};
use crate::entropy::cdf::DyadicAdaptCdf;
use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::entropy::freq::FreqCtx;
use crate::entropy::uint::{decode_uint_esc, encode_uint_esc};
use crate::plane::PixelPlane;
use crate::predict::accopy::{ac_copy_predict, NeighborCoeffs};
use crate::predict::cfl::{cfl_shape_predict, tf_merge4};
use crate::predict::haar::{haar_dc_expand, haar_dc_merge, DcTree};
use crate::predict::sbdc::predict_sb_dc;
use crate::pvq::bands::BandLayout;
use crate::pvq::coding::{band_position, pvq_decode_band, pvq_encode_band, PvqModels, PRED_EPS};
use crate::pvq::zigzag;
use crate::rc::q_from_qp;
use crate::transform::dct::{dct2d_forward, dct2d_inverse, round_half_away};
use crate::transform::lapping::{
    apply_edge_op, apply_lapping, interior_cross_ops, EdgeOp, EdgeOrientation, LapDirection,
    LappingFilter4,
};
use crate::transform::partition::{PartitionNode, PartitionTree};
use crate::{Error, Result};

/// Coding-tool toggles carried in the bitstream header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tools {
    pub lapping: bool,
    pub haar_dc: bool,
    pub ac_copy: bool,
    pub cfl: bool,
    pub dering: Option<PipelineOrder>,
}

impl Default for Tools {
    fn default() -> Self {
        Tools { lapping: true, haar_dc: true, ac_copy: true, cfl: true, dering: None }
    }
}

impl Tools {
    pub fn to_byte(self) -> u8 {
        let dering = match self.dering {
            None => 0u8,
            Some(PipelineOrder::Dd) => 1,
            Some(PipelineOrder::Clpf) => 2,
            Some(PipelineOrder::ClpfThenDd) => 3,
            Some(PipelineOrder::DdThenClpf) => 4,
        };
        (self.lapping as u8)
            | (self.haar_dc as u8) << 1
            | (self.ac_copy as u8) << 2
            | (self.cfl as u8) << 3
            | dering << 4
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        if b >> 7 != 0 {
            return Err(Error::MalformedStream(format!("reserved tool bits set: {b:#x}")));
        }
        let dering = match b >> 4 {
            0 => None,
            1 => Some(PipelineOrder::Dd),
            2 => Some(PipelineOrder::Clpf),
            3 => Some(PipelineOrder::ClpfThenDd),
            4 => Some(PipelineOrder::DdThenClpf),
            v => {
                return Err(Error::MalformedStream(format!("invalid dering mode {v}")));
            }
        };
        Ok(Tools {
            lapping: b & 1 != 0,
            haar_dc: b & 2 != 0,
            ac_copy: b & 4 != 0,
            cfl: b & 8 != 0,
            dering,
        })
    }
}

/// Adaptive model state for one frame, shared by every plane.
pub struct CodecModels {
    split: Vec<DyadicAdaptCdf>,
    dc_root: FreqCtx,
    dc_detail: FreqCtx,
    dc_flat: FreqCtx,
    pub pvq: PvqModels,
    pub inloop: InloopModels,
}

impl CodecModels {
    pub fn new() -> Self {
        CodecModels {
            split: (0..3).map(|_| DyadicAdaptCdf::new_uniform(2)).collect(),
            dc_root: FreqCtx::new(16),
            dc_detail: FreqCtx::new(16),
            dc_flat: FreqCtx::new(16),
            pvq: PvqModels::new(),
            inloop: InloopModels::new(),
        }
    }
}

impl Default for CodecModels {
    fn default() -> Self {
        Self::new()
    }
}

/// Reconstructed coefficient blocks keyed by top-left plane position.
pub type CoeffStore = HashMap<(usize, usize), (usize, Vec<f64>)>;

fn encode_int(enc: &mut RangeEncoder, ctx: &mut FreqCtx, v: i64) {
    let mag = v.unsigned_abs().min(u32::MAX as u64) as u32;
    encode_uint_esc(enc, ctx, mag);
    if mag != 0 {
        enc.encode_bit(v < 0);
    }
}

fn decode_int(dec: &mut RangeDecoder<'_>, ctx: &mut FreqCtx) -> i64 {
    let mag = decode_uint_esc(dec, ctx) as i64;
    if mag != 0 && dec.decode_bit() {
        -mag
    } else {
        mag
    }
}

fn encode_tree(enc: &mut RangeEncoder, models: &mut CodecModels, tree: &PartitionTree) {
    fn rec(
        enc: &mut RangeEncoder,
        split: &mut [DyadicAdaptCdf],
        node: &PartitionNode,
        size: usize,
        level: usize,
    ) {
        if size == MIN_TX_SIZE {
            return;
        }
        let ctx = &mut split[level.min(2)];
        let bit = matches!(node, PartitionNode::Split(_)) as usize;
        enc.encode_symbol_q15(bit, &ctx.base.f);
        ctx.update(bit);
        if let PartitionNode::Split(children) = node {
            for c in children.iter() {
                rec(enc, split, c, size / 2, level + 1);
            }
        }
    }
    rec(enc, &mut models.split, &tree.root, tree.sb_size, 0);
}

fn decode_tree(
    dec: &mut RangeDecoder<'_>,
    models: &mut CodecModels,
    sb_size: usize,
) -> PartitionTree {
    fn rec(
        dec: &mut RangeDecoder<'_>,
        split: &mut [DyadicAdaptCdf],
        size: usize,
        level: usize,
    ) -> PartitionNode {
        if size == MIN_TX_SIZE {
            return PartitionNode::Leaf;
        }
        let ctx = &mut split[level.min(2)];
        let bit = dec.decode_symbol_q15(&ctx.base.f);
        ctx.update(bit);
        if bit == 1 {
            let mut children = Vec::with_capacity(4);
            for _ in 0..4 {
                children.push(rec(dec, split, size / 2, level + 1));
            }
            let [tl, tr, bl, br]: [PartitionNode; 4] = children.try_into().unwrap();
            PartitionNode::Split(Box::new([tl, tr, bl, br]))
        } else {
            PartitionNode::Leaf
        }
    }
    PartitionTree { sb_size, root: rec(dec, &mut models.split, sb_size, 0) }
}

/// The chroma partition is the luma partition at half scale; luma splits
/// that would take chroma below the 4x4 transform floor are merged away.
pub fn derive_chroma_tree(luma: &PartitionTree) -> PartitionTree {
    fn rec(node: &PartitionNode, luma_size: usize) -> PartitionNode {
        match node {
            PartitionNode::Leaf => PartitionNode::Leaf,
            PartitionNode::Split(children) => {
                if luma_size / 4 < MIN_TX_SIZE {
                    PartitionNode::Leaf
                } else {
                    PartitionNode::Split(Box::new([
                        rec(&children[0], luma_size / 2),
                        rec(&children[1], luma_size / 2),
                        rec(&children[2], luma_size / 2),
                        rec(&children[3], luma_size / 2),
                    ]))
                }
            }
        }
    }
    PartitionTree { sb_size: luma.sb_size / 2, root: rec(&luma.root, luma.sb_size) }
}

/// Exterior superblock-boundary edges of the lapping order (the prefix of
/// the full op list that does not depend on any partition choice).
fn exterior_ops(width: usize, height: usize, sb: usize) -> Vec<EdgeOp> {
    let mut ops = Vec::new();
    for row in 1..height / sb {
        ops.push(EdgeOp { orientation: EdgeOrientation::Horizontal, x: 0, y: row * sb, len: width });
    }
    for col in 1..width / sb {
        ops.push(EdgeOp { orientation: EdgeOrientation::Vertical, x: col * sb, y: 0, len: height });
    }
    ops
}

fn prefilter_interior(
    buf: &mut [i32],
    stride: usize,
    node: &PartitionNode,
    x: usize,
    y: usize,
    size: usize,
    filter: &LappingFilter4,
) {
    if let PartitionNode::Split(children) = node {
        for op in interior_cross_ops(x, y, size) {
            apply_edge_op(buf, stride, op, filter, LapDirection::Pre);
        }
        let h = size / 2;
        prefilter_interior(buf, stride, &children[0], x, y, h, filter);
        prefilter_interior(buf, stride, &children[1], x + h, y, h, filter);
        prefilter_interior(buf, stride, &children[2], x, y + h, h, filter);
        prefilter_interior(buf, stride, &children[3], x + h, y + h, h, filter);
    }
}

fn block_f64(buf: &[i32], stride: usize, x: usize, y: usize, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push(buf[(y + r) * stride + x + c] as f64);
        }
    }
    out
}

fn usable(pred: &[f64]) -> bool {
    pred.iter().map(|v| v * v).sum::<f64>().sqrt() > PRED_EPS
}

/// TF-gathers the reconstructed luma coefficients covering an aligned
/// `size` x `size` region, merging recursively when the region is split.
fn gather_luma(store: &CoeffStore, x: usize, y: usize, size: usize) -> Option<Vec<f64>> {
    if let Some((s, c)) = store.get(&(x, y)) {
        if *s == size {
            return Some(c.clone());
        }
    }
    if size / 2 < MIN_TX_SIZE {
        return None;
    }
    let h = size / 2;
    let tl = gather_luma(store, x, y, h)?;
    let tr = gather_luma(store, x + h, y, h)?;
    let bl = gather_luma(store, x, y + h, h)?;
    let br = gather_luma(store, x + h, y + h, h)?;
    Some(tf_merge4(&tl, &tr, &bl, &br, h))
}

enum PlaneKind<'a> {
    Luma,
    Chroma { luma_store: &'a CoeffStore },
}

/// Builds the AC predictor block for a leaf, or `None`.
fn predictor_block(
    kind: &PlaneKind<'_>,
    tools: &Tools,
    store: &CoeffStore,
    x: usize,
    y: usize,
    n: usize,
) -> Option<Vec<f64>> {
    match kind {
        PlaneKind::Luma => {
            if !tools.ac_copy {
                return None;
            }
            let neighbor = |nx: usize, ny: usize| {
                store
                    .get(&(nx, ny))
                    .map(|(s, c)| NeighborCoeffs { coeffs: c.as_slice(), size: *s })
            };
            let above = if y >= n { neighbor(x, y - n) } else { None };
            let left = if x >= n { neighbor(x - n, y) } else { None };
            ac_copy_predict(n, above, left)
        }
        PlaneKind::Chroma { luma_store } => {
            if !tools.cfl {
                return None;
            }
            gather_luma(luma_store, 2 * x, 2 * y, 2 * n)
                .map(|luma| cfl_shape_predict(&luma, 2 * n))
        }
    }
}

/// Causal neighbor superblock root DCs for the root predictor.
fn root_neighbors(
    roots: &[Option<f64>],
    sbs_x: usize,
    idx: usize,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let col = idx % sbs_x;
    let row = idx / sbs_x;
    let left = if col > 0 { roots[idx - 1] } else { None };
    let above = if row > 0 { roots[idx - sbs_x] } else { None };
    let above_left = if col > 0 && row > 0 { roots[idx - sbs_x - 1] } else { None };
    (left, above, above_left)
}

/// One coded plane's outputs: the reconstruction (post-filtered, clamped)
/// and the per-superblock trees and coefficient store for dependent planes.
pub struct CodedPlane {
    pub recon: PixelPlane,
    pub trees: Vec<PartitionTree>,
    pub store: CoeffStore,
}

struct PlaneGeometry {
    width: usize,
    height: usize,
    sbs_x: usize,
    sbs_y: usize,
    midrange: f64,
}

impl PlaneGeometry {
    fn of(plane_w: usize, plane_h: usize, sb: usize, bit_depth: u8) -> Result<Self> {
        if plane_w % sb != 0 || plane_h % sb != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{plane_w}x{plane_h} plane is not a multiple of the {sb} superblock"
            )));
        }
        Ok(PlaneGeometry {
            width: plane_w,
            height: plane_h,
            sbs_x: plane_w / sb,
            sbs_y: plane_h / sb,
            midrange: (1i64 << (bit_depth - 1)) as f64 * sb as f64,
        })
    }
}

fn finish_plane(
    mut recon: Vec<i32>,
    geom: &PlaneGeometry,
    trees: &[PartitionTree],
    tools: &Tools,
    filter: &LappingFilter4,
    bit_depth: u8,
) -> Result<PixelPlane> {
    if tools.lapping {
        apply_lapping(&mut recon, geom.width, geom.height, trees, filter, LapDirection::Post)?;
    }
    let max = (1 << bit_depth) - 1;
    for s in recon.iter_mut() {
        *s = (*s).clamp(0, max);
    }
    Ok(PixelPlane {
        width: geom.width,
        height: geom.height,
        bit_depth,
        samples: recon,
    })
}

/// Encodes one padded plane into `enc`. For chroma planes, `given_trees`
/// carries the derived partition (not signaled) and `kind` the luma store.
fn encode_plane_impl(
    enc: &mut RangeEncoder,
    models: &mut CodecModels,
    plane: &PixelPlane,
    qp: u8,
    tools: &Tools,
    sb: usize,
    given_trees: Option<&[PartitionTree]>,
    kind: PlaneKind<'_>,
) -> Result<CodedPlane> {
    let geom = PlaneGeometry::of(plane.width, plane.height, sb, plane.bit_depth)?;
    let filter = LappingFilter4::default();
    let q = q_from_qp(qp as u32);
    let mut buf = plane.samples.clone();
    if tools.lapping {
        for op in exterior_ops(geom.width, geom.height, sb) {
            apply_edge_op(&mut buf, geom.width, op, &filter, LapDirection::Pre);
        }
    }
    let mut recon = vec![0i32; buf.len()];
    let mut trees = Vec::with_capacity(geom.sbs_x * geom.sbs_y);
    let mut roots: Vec<Option<f64>> = vec![None; geom.sbs_x * geom.sbs_y];
    let mut store: CoeffStore = HashMap::new();

    for idx in 0..geom.sbs_x * geom.sbs_y {
        let sx = (idx % geom.sbs_x) * sb;
        let sy = (idx / geom.sbs_x) * sb;
        let tree = match given_trees {
            Some(ts) => ts[idx].clone(),
            None => {
                let region = block_region(&buf, geom.width, sx, sy, sb);
                let lap = tools.lapping.then_some(&filter);
                let (tree, _) = rdo_partition(&region, sb, qp, lap);
                encode_tree(enc, models, &tree);
                tree
            }
        };
        if tools.lapping {
            prefilter_interior(&mut buf, geom.width, &tree.root, sx, sy, sb, &filter);
        }
        let leaves = tree.leaves();
        let coeffs: Vec<Vec<f64>> = leaves
            .iter()
            .map(|l| dct2d_forward(&block_f64(&buf, geom.width, sx + l.x, sy + l.y, l.size), l.size))
            .collect::<Result<_>>()?;
        let dcs: Vec<f64> = coeffs.iter().map(|c| c[0]).collect();

        // DC hierarchy (or flat per-leaf DCs).
        let recon_dcs = if tools.haar_dc {
            let merged = haar_dc_merge(&tree, &dcs);
            let (l, a, al) = root_neighbors(&roots, geom.sbs_x, idx);
            let pred = predict_sb_dc(l, a, al, geom.midrange);
            let rq = round_half_away((merged.root - pred) / q);
            encode_int(enc, &mut models.dc_root, rq);
            let recon_root = pred + rq as f64 * q;
            let details: Vec<[f64; 3]> = merged
                .details
                .iter()
                .map(|d| {
                    let mut r = [0.0; 3];
                    for (i, &v) in d.iter().enumerate() {
                        let vq = round_half_away(v / q);
                        encode_int(enc, &mut models.dc_detail, vq);
                        r[i] = vq as f64 * q;
                    }
                    r
                })
                .collect();
            roots[idx] = Some(recon_root);
            haar_dc_expand(&tree, &DcTree { root: recon_root, details })
        } else {
            dcs.iter()
                .map(|&dc| {
                    let dq = round_half_away(dc / q);
                    encode_int(enc, &mut models.dc_flat, dq);
                    dq as f64 * q
                })
                .collect()
        };

        // AC bands, then reconstruction.
        for ((leaf, coeffs), rdc) in leaves.iter().zip(&coeffs).zip(&recon_dcs) {
            let n = leaf.size;
            let (gx, gy) = (sx + leaf.x, sy + leaf.y);
            let pred_block = predictor_block(&kind, tools, &store, gx, gy, n);
            let mut rec = vec![0.0; n * n];
            rec[0] = *rdc;
            let layout = BandLayout::for_size(n);
            let scan = zigzag(n);
            for band in 0..layout.num_bands() {
                let x = layout.extract(coeffs, &scan, band);
                let pos = band_position(n, band);
                let mut pb = pred_block.as_ref().map(|p| layout.extract(p, &scan, band));
                if let (PlaneKind::Chroma { .. }, Some(p)) = (&kind, pb.as_mut()) {
                    if usable(p) {
                        let dot: f64 = x.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
                        let flip = dot < 0.0;
                        enc.encode_bit(flip);
                        if flip {
                            for v in p.iter_mut() {
                                *v = -*v;
                            }
                        }
                    }
                }
                let (_, rb) = pvq_encode_band(enc, &mut models.pvq, pos, &x, pb.as_deref(), q);
                layout.insert(&mut rec, &scan, band, &rb);
            }
            let spatial = dct2d_inverse(&rec, n)?;
            for r in 0..n {
                for c in 0..n {
                    recon[(gy + r) * geom.width + gx + c] =
                        round_half_away(spatial[r * n + c]) as i32;
                }
            }
            store.insert((gx, gy), (n, rec));
        }
        trees.push(tree);
    }
    let recon = finish_plane(recon, &geom, &trees, tools, &filter, plane.bit_depth)?;
    Ok(CodedPlane { recon, trees, store })
}

fn block_region(buf: &[i32], stride: usize, x: usize, y: usize, size: usize) -> Vec<i32> {
    let mut out = Vec::with_capacity(size * size);
    for r in 0..size {
        out.extend_from_slice(&buf[(y + r) * stride + x..(y + r) * stride + x + size]);
    }
    out
}

fn decode_plane_impl(
    dec: &mut RangeDecoder<'_>,
    models: &mut CodecModels,
    width: usize,
    height: usize,
    bit_depth: u8,
    qp: u8,
    tools: &Tools,
    sb: usize,
    given_trees: Option<&[PartitionTree]>,
    kind: PlaneKind<'_>,
) -> Result<CodedPlane> {
    let geom = PlaneGeometry::of(width, height, sb, bit_depth)?;
    let filter = LappingFilter4::default();
    let q = q_from_qp(qp as u32);
    let mut recon = vec![0i32; width * height];
    let mut trees = Vec::with_capacity(geom.sbs_x * geom.sbs_y);
    let mut roots: Vec<Option<f64>> = vec![None; geom.sbs_x * geom.sbs_y];
    let mut store: CoeffStore = HashMap::new();

    for idx in 0..geom.sbs_x * geom.sbs_y {
        let sx = (idx % geom.sbs_x) * sb;
        let sy = (idx / geom.sbs_x) * sb;
        let tree = match given_trees {
            Some(ts) => ts[idx].clone(),
            None => decode_tree(dec, models, sb),
        };
        let leaves = tree.leaves();

        let recon_dcs: Vec<f64> = if tools.haar_dc {
            let (l, a, al) = root_neighbors(&roots, geom.sbs_x, idx);
            let pred = predict_sb_dc(l, a, al, geom.midrange);
            let rq = decode_int(dec, &mut models.dc_root);
            let recon_root = pred + rq as f64 * q;
            let num_internal = leaves.len().saturating_sub(1) / 3;
            let details: Vec<[f64; 3]> = (0..num_internal)
                .map(|_| {
                    let mut r = [0.0; 3];
                    for v in r.iter_mut() {
                        *v = decode_int(dec, &mut models.dc_detail) as f64 * q;
                    }
                    r
                })
                .collect();
            roots[idx] = Some(recon_root);
            haar_dc_expand(&tree, &DcTree { root: recon_root, details })
        } else {
            (0..leaves.len())
                .map(|_| decode_int(dec, &mut models.dc_flat) as f64 * q)
                .collect()
        };

        for (leaf, rdc) in leaves.iter().zip(&recon_dcs) {
            let n = leaf.size;
            let (gx, gy) = (sx + leaf.x, sy + leaf.y);
            let pred_block = predictor_block(&kind, tools, &store, gx, gy, n);
            let mut rec = vec![0.0; n * n];
            rec[0] = *rdc;
            let layout = BandLayout::for_size(n);
            let scan = zigzag(n);
            for band in 0..layout.num_bands() {
                let pos = band_position(n, band);
                let band_len = layout.bands[band].len();
                let mut pb = pred_block.as_ref().map(|p| layout.extract(p, &scan, band));
                if let (PlaneKind::Chroma { .. }, Some(p)) = (&kind, pb.as_mut()) {
                    if usable(p) {
                        if dec.decode_bit() {
                            for v in p.iter_mut() {
                                *v = -*v;
                            }
                        }
                    }
                }
                let (_, rb) =
                    pvq_decode_band(dec, &mut models.pvq, pos, band_len, pb.as_deref(), q)?;
                layout.insert(&mut rec, &scan, band, &rb);
            }
            let spatial = dct2d_inverse(&rec, n)?;
            for r in 0..n {
                for c in 0..n {
                    recon[(gy + r) * width + gx + c] = round_half_away(spatial[r * n + c]) as i32;
                }
            }
            store.insert((gx, gy), (n, rec));
        }
        trees.push(tree);
    }
    let recon = finish_plane(recon, &geom, &trees, tools, &filter, bit_depth)?;
    Ok(CodedPlane { recon, trees, store })
}

/// Encodes one padded luma plane.
pub fn encode_luma_plane(
    enc: &mut RangeEncoder,
    models: &mut CodecModels,
    plane: &PixelPlane,
    qp: u8,
    tools: &Tools,
    sb: usize,
) -> Result<CodedPlane> {
    encode_plane_impl(enc, models, plane, qp, tools, sb, None, PlaneKind::Luma)
}

/// Encodes one padded chroma plane against the luma coefficient store.
pub fn encode_chroma_plane(
    enc: &mut RangeEncoder,
    models: &mut CodecModels,
    plane: &PixelPlane,
    qp: u8,
    tools: &Tools,
    chroma_trees: &[PartitionTree],
    luma_store: &CoeffStore,
) -> Result<CodedPlane> {
    let sb = chroma_trees.first().map(|t| t.sb_size).unwrap_or(16);
    encode_plane_impl(
        enc,
        models,
        plane,
        qp,
        tools,
        sb,
        Some(chroma_trees),
        PlaneKind::Chroma { luma_store },
    )
}

/// Decodes one padded luma plane.
#[allow(clippy::too_many_arguments)]
pub fn decode_luma_plane(
    dec: &mut RangeDecoder<'_>,
    models: &mut CodecModels,
    width: usize,
    height: usize,
    bit_depth: u8,
    qp: u8,
    tools: &Tools,
    sb: usize,
) -> Result<CodedPlane> {
    decode_plane_impl(dec, models, width, height, bit_depth, qp, tools, sb, None, PlaneKind::Luma)
}

/// Decodes one padded chroma plane against the luma coefficient store.
#[allow(clippy::too_many_arguments)]
pub fn decode_chroma_plane(
    dec: &mut RangeDecoder<'_>,
    models: &mut CodecModels,
    width: usize,
    height: usize,
    bit_depth: u8,
    qp: u8,
    tools: &Tools,
    chroma_trees: &[PartitionTree],
    luma_store: &CoeffStore,
) -> Result<CodedPlane> {
    let sb = chroma_trees.first().map(|t| t.sb_size).unwrap_or(16);
    decode_plane_impl(
        dec,
        models,
        width,
        height,
        bit_depth,
        qp,
        tools,
        sb,
        Some(chroma_trees),
        PlaneKind::Chroma { luma_store },
    )
}
