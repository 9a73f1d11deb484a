//! Rate-distortion-optimal partition search over one superblock.
//!
//! The search runs after the exterior superblock edges have been
//! pre-filtered, so a candidate split only has to apply its own interior
//! cross filters. Split and no-split are compared in a common domain: the
//! no-split cost is measured on the region as handed down, the split cost
//! on a copy with the interior cross pre-filtered, exactly mirroring what
//! encoding that choice would do. Leaf costs use a frozen context (a fresh
//! scratch coder and fresh models per leaf) and no intra-superblock
//! prediction, which makes the total cost decompose over leaves; the greedy
//! bottom-up choice is then exactly the exhaustive minimum over all trees.

use crate::entropy::coder::RangeEncoder;
use crate::entropy::freq::FreqCtx;
use crate::entropy::uint::encode_uint_esc;
use crate::pvq::bands::BandLayout;
use crate::pvq::coding::{band_position, pvq_encode_band, PvqModels};
use crate::pvq::zigzag;
use crate::rc::q_from_qp;
use crate::transform::dct::{dct2d_forward, round_half_away};
use crate::transform::lapping::{
    apply_edge_op, interior_cross_ops, EdgeOp, LapDirection, LappingFilter4,
};
use crate::transform::partition::{PartitionNode, PartitionTree};

/// Smallest transform block the partition search descends to.
pub const MIN_TX_SIZE: usize = 4;

/// Lagrange multiplier for coefficient-domain SSE against rate in bits.
pub fn rdo_lambda(qp: u8) -> f64 {
    let q = q_from_qp(qp as u32);
    0.1 * q * q
}

/// Rate + distortion cost of coding one leaf block standalone: DC scalar
/// quantization plus PVQ for every band, measured with a scratch coder and
/// fresh models (frozen context, no prediction).
pub fn leaf_cost(block: &[f64], n: usize, qp: u8) -> f64 {
    let q = q_from_qp(qp as u32);
    let coeffs = dct2d_forward(block, n).expect("leaf sizes are supported transform sizes");
    let mut enc = RangeEncoder::new();
    let mut models = PvqModels::new();
    let mut dc_ctx = FreqCtx::new(16);

    let dc_q = round_half_away(coeffs[0] / q);
    encode_uint_esc(&mut enc, &mut dc_ctx, dc_q.unsigned_abs().min(u32::MAX as u64) as u32);
    if dc_q != 0 {
        enc.encode_bit(dc_q < 0);
    }
    let dc_err = coeffs[0] - dc_q as f64 * q;
    let mut dist = dc_err * dc_err;

    let layout = BandLayout::for_size(n);
    let scan = zigzag(n);
    for band in 0..layout.num_bands() {
        let x = layout.extract(&coeffs, &scan, band);
        let pos = band_position(n, band);
        let (_, recon) = pvq_encode_band(&mut enc, &mut models, pos, &x, None, q);
        dist += x.iter().zip(&recon).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    let rate_bits = enc.tell_frac() as f64 / 8.0;
    dist + rdo_lambda(qp) * rate_bits
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

fn apply_cross(buf: &mut [i32], stride: usize, ops: [EdgeOp; 2], filter: &LappingFilter4) {
    for op in ops {
        apply_edge_op(buf, stride, op, filter, LapDirection::Pre);
    }
}

fn node_rdo(
    buf: &[i32],
    stride: usize,
    x: usize,
    y: usize,
    size: usize,
    qp: u8,
    filter: Option<&LappingFilter4>,
) -> (PartitionNode, f64) {
    let cost_leaf = leaf_cost(&block_f64(buf, stride, x, y, size), size, qp);
    if size == MIN_TX_SIZE {
        return (PartitionNode::Leaf, cost_leaf);
    }
    let mut split_buf = buf.to_vec();
    if let Some(f) = filter {
        apply_cross(&mut split_buf, stride, interior_cross_ops(x, y, size), f);
    }
    let h = size / 2;
    let mut cost_split = 0.0;
    let mut children = Vec::with_capacity(4);
    for (cx, cy) in [(x, y), (x + h, y), (x, y + h), (x + h, y + h)] {
        let (node, c) = node_rdo(&split_buf, stride, cx, cy, h, qp, filter);
        children.push(node);
        cost_split += c;
    }
    // One split-flag bit is paid either way at this size.
    let flag = rdo_lambda(qp);
    if cost_leaf <= cost_split {
        (PartitionNode::Leaf, cost_leaf + flag)
    } else {
        let [tl, tr, bl, br]: [PartitionNode; 4] = children.try_into().unwrap();
        (PartitionNode::Split(Box::new([tl, tr, bl, br])), cost_split + flag)
    }
}

/// Picks the minimum-cost partition for one superblock region whose
/// exterior edges are already pre-filtered. Returns the tree and its cost.
pub fn rdo_partition(
    sb: &[i32],
    sb_size: usize,
    qp: u8,
    filter: Option<&LappingFilter4>,
) -> (PartitionTree, f64) {
    assert_eq!(sb.len(), sb_size * sb_size);
    let (root, cost) = node_rdo(sb, sb_size, 0, 0, sb_size, qp, filter);
    (PartitionTree { sb_size, root }, cost)
}

fn node_prefilter(
    buf: &mut [i32],
    stride: usize,
    node: &PartitionNode,
    x: usize,
    y: usize,
    size: usize,
    filter: &LappingFilter4,
) {
    if let PartitionNode::Split(children) = node {
        apply_cross(buf, stride, interior_cross_ops(x, y, size), filter);
        let h = size / 2;
        node_prefilter(buf, stride, &children[0], x, y, h, filter);
        node_prefilter(buf, stride, &children[1], x + h, y, h, filter);
        node_prefilter(buf, stride, &children[2], x, y + h, h, filter);
        node_prefilter(buf, stride, &children[3], x + h, y + h, h, filter);
    }
}

fn count_flags(node: &PartitionNode, size: usize) -> usize {
    if size == MIN_TX_SIZE {
        return 0;
    }
    match node {
        PartitionNode::Leaf => 1,
        PartitionNode::Split(children) => {
            1 + children.iter().map(|c| count_flags(c, size / 2)).sum::<usize>()
        }
    }
}

/// Cost of coding the superblock with a fixed tree: interior pre-filtering
/// for that tree, leaf costs, and the tree-signaling flags. This is the
/// exhaustive-search oracle the greedy `rdo_partition` must match.
pub fn tree_cost(
    sb: &[i32],
    sb_size: usize,
    tree: &PartitionTree,
    qp: u8,
    filter: Option<&LappingFilter4>,
) -> f64 {
    assert_eq!(sb.len(), sb_size * sb_size);
    assert_eq!(tree.sb_size, sb_size);
    let mut buf = sb.to_vec();
    if let Some(f) = filter {
        node_prefilter(&mut buf, sb_size, &tree.root, 0, 0, sb_size, f);
    }
    let mut cost = rdo_lambda(qp) * count_flags(&tree.root, sb_size) as f64;
    for leaf in tree.leaves() {
        cost += leaf_cost(&block_f64(&buf, sb_size, leaf.x, leaf.y, leaf.size), leaf.size, qp);
    }
    cost
}
