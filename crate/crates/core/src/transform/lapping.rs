//! Fixed 4-point lapped pre/post filters and the recursive superblock
//! application order.
//!
//! The filter is a sum/difference butterfly around the block edge with
//! dyadic-rational lifting shears applied to the two difference terms. Every
//! step is individually invertible in integer arithmetic, so the post-filter
//! reverses the pre-filter bit-exactly, and a constant input passes through
//! unchanged.

use crate::transform::partition::{PartitionNode, PartitionTree};
use crate::{Error, Result};

/// One lifting shear: the target difference accumulates
/// `(num * source + (1 << (shift - 1))) >> shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftStep {
    pub num: i32,
    pub shift: u8,
}

impl LiftStep {
    #[inline]
    fn apply(&self, src: i32) -> i32 {
        ((self.num as i64 * src as i64 + (1i64 << (self.shift - 1))) >> self.shift) as i32
    }
}

/// The 4-point lapping filter. The three shears act on the outer and inner
/// difference terms (d0, d1) in the fixed order d1 += f(d0), d0 += f(d1),
/// d1 += f(d0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LappingFilter4 {
    pub steps: [LiftStep; 3],
}

impl Default for LappingFilter4 {
    /// Coefficients chosen by grid search over dyadic rationals with
    /// denominators up to 64, maximizing the 1D coding gain of 4-point
    /// lapping plus a 4-point DCT on an AR(1) rho=0.95 source
    /// (7.87 dB vs 7.57 dB for the DCT alone).
    fn default() -> Self {
        LappingFilter4 {
            steps: [
                LiftStep { num: 44, shift: 6 },
                LiftStep { num: 1, shift: 6 },
                LiftStep { num: -22, shift: 6 },
            ],
        }
    }
}

impl LappingFilter4 {
    /// Pre-filter four samples straddling a transform edge; `x[0]`, `x[1]`
    /// sit on one side and `x[2]`, `x[3]` on the other.
    #[inline]
    pub fn pre(&self, x: [i32; 4]) -> [i32; 4] {
        let mut d0 = x[0] - x[3];
        let s0 = x[3] + (d0 >> 1);
        let mut d1 = x[1] - x[2];
        let s1 = x[2] + (d1 >> 1);
        d1 += self.steps[0].apply(d0);
        d0 += self.steps[1].apply(d1);
        d1 += self.steps[2].apply(d0);
        let y3 = s0 - (d0 >> 1);
        let y2 = s1 - (d1 >> 1);
        [y3 + d0, y2 + d1, y2, y3]
    }

    /// Exact inverse of [`Self::pre`].
    #[inline]
    pub fn post(&self, x: [i32; 4]) -> [i32; 4] {
        let mut d0 = x[0] - x[3];
        let s0 = x[3] + (d0 >> 1);
        let mut d1 = x[1] - x[2];
        let s1 = x[2] + (d1 >> 1);
        d1 -= self.steps[2].apply(d0);
        d0 -= self.steps[1].apply(d1);
        d1 -= self.steps[0].apply(d0);
        let y3 = s0 - (d0 >> 1);
        let y2 = s1 - (d1 >> 1);
        [y3 + d0, y2 + d1, y2, y3]
    }

    /// The linearized 4x4 matrix of the pre-filter (rounding ignored), used
    /// by the coding-gain oracle that selected the coefficients.
    pub fn linearized(&self) -> [[f64; 4]; 4] {
        let a: Vec<f64> = self.steps.iter().map(|s| s.num as f64 / (1u64 << s.shift) as f64).collect();
        // butterfly rows: s0, s1, d0, d1
        let b = [
            [0.5, 0.0, 0.0, 0.5],
            [0.0, 0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, -1.0, 0.0],
        ];
        let mut v = [[0.0; 4]; 4];
        for (i, row) in b.iter().enumerate() {
            v[i] = *row;
        }
        // shears on (d0, d1) = rows 2, 3
        let shear = |m: &mut [[f64; 4]; 4], dst: usize, src: usize, c: f64| {
            for j in 0..4 {
                m[dst][j] += c * m[src][j];
            }
        };
        shear(&mut v, 3, 2, a[0]);
        shear(&mut v, 2, 3, a[1]);
        shear(&mut v, 3, 2, a[2]);
        // inverse butterfly: x0 = s0 + d0/2, x1 = s1 + d1/2, x2 = s1 - d1/2, x3 = s0 - d0/2
        let binv = [
            [1.0, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 0.5],
            [0.0, 1.0, 0.0, -0.5],
            [1.0, 0.0, -0.5, 0.0],
        ];
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for (k, vk) in v.iter().enumerate() {
                    out[i][j] += binv[i][k] * vk[j];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LapDirection {
    Pre,
    Post,
}

/// Orientation of a filtered transform edge. A horizontal edge runs along a
/// row boundary and is filtered by vertical 4-taps; a vertical edge runs
/// along a column boundary and is filtered by horizontal 4-taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrientation {
    Horizontal,
    Vertical,
}

/// One edge filtering operation. For `Horizontal`, the edge separates rows
/// `y - 1` and `y` and spans columns `x .. x + len`; for `Vertical`, the edge
/// separates columns `x - 1` and `x` and spans rows `y .. y + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOp {
    pub orientation: EdgeOrientation,
    pub x: usize,
    pub y: usize,
    pub len: usize,
}

fn apply_edge(
    buf: &mut [i32],
    stride: usize,
    op: EdgeOp,
    filter: &LappingFilter4,
    dir: LapDirection,
) {
    match op.orientation {
        EdgeOrientation::Horizontal => {
            for col in op.x..op.x + op.len {
                let i = |r: usize| r * stride + col;
                let x = [
                    buf[i(op.y - 2)],
                    buf[i(op.y - 1)],
                    buf[i(op.y)],
                    buf[i(op.y + 1)],
                ];
                let y = match dir {
                    LapDirection::Pre => filter.pre(x),
                    LapDirection::Post => filter.post(x),
                };
                buf[i(op.y - 2)] = y[0];
                buf[i(op.y - 1)] = y[1];
                buf[i(op.y)] = y[2];
                buf[i(op.y + 1)] = y[3];
            }
        }
        EdgeOrientation::Vertical => {
            for row in op.y..op.y + op.len {
                let base = row * stride;
                let x = [
                    buf[base + op.x - 2],
                    buf[base + op.x - 1],
                    buf[base + op.x],
                    buf[base + op.x + 1],
                ];
                let y = match dir {
                    LapDirection::Pre => filter.pre(x),
                    LapDirection::Post => filter.post(x),
                };
                buf[base + op.x - 2] = y[0];
                buf[base + op.x - 1] = y[1];
                buf[base + op.x] = y[2];
                buf[base + op.x + 1] = y[3];
            }
        }
    }
}

/// Interior cross edges of a split region, horizontal first.
pub fn interior_cross_ops(x: usize, y: usize, size: usize) -> [EdgeOp; 2] {
    let h = size / 2;
    [
        EdgeOp { orientation: EdgeOrientation::Horizontal, x, y: y + h, len: size },
        EdgeOp { orientation: EdgeOrientation::Vertical, x: x + h, y, len: size },
    ]
}

fn node_ops(node: &PartitionNode, x: usize, y: usize, size: usize, out: &mut Vec<EdgeOp>) {
    if let PartitionNode::Split(children) = node {
        out.extend_from_slice(&interior_cross_ops(x, y, size));
        let h = size / 2;
        node_ops(&children[0], x, y, h, out);
        node_ops(&children[1], x + h, y, h, out);
        node_ops(&children[2], x, y + h, h, out);
        node_ops(&children[3], x + h, y + h, h, out);
    }
}

/// The full pre-filter edge sequence for a plane: exterior superblock edges
/// (horizontal rows first, then vertical), then per superblock in raster
/// order the recursive interior edges (horizontal before vertical at each
/// level, then the four quadrants). The post-filter applies the exact
/// reverse sequence.
pub fn lapping_ops(width: usize, height: usize, trees: &[PartitionTree]) -> Result<Vec<EdgeOp>> {
    let sb = trees.first().map(|t| t.sb_size).unwrap_or(32);
    if width % sb != 0 || height % sb != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{width}x{height} plane is not a multiple of the {sb} superblock size"
        )));
    }
    let sbs_x = width / sb;
    let sbs_y = height / sb;
    if trees.len() != sbs_x * sbs_y {
        return Err(Error::DimensionMismatch(format!(
            "expected {} partition trees, got {}",
            sbs_x * sbs_y,
            trees.len()
        )));
    }
    let mut ops = Vec::new();
    for row in 1..sbs_y {
        ops.push(EdgeOp {
            orientation: EdgeOrientation::Horizontal,
            x: 0,
            y: row * sb,
            len: width,
        });
    }
    for col in 1..sbs_x {
        ops.push(EdgeOp {
            orientation: EdgeOrientation::Vertical,
            x: col * sb,
            y: 0,
            len: height,
        });
    }
    for (i, tree) in trees.iter().enumerate() {
        let sx = (i % sbs_x) * sb;
        let sy = (i / sbs_x) * sb;
        node_ops(&tree.root, sx, sy, sb, &mut ops);
    }
    Ok(ops)
}

/// Applies the lapping filter over a whole plane buffer in the recursive
/// order (or its exact reverse for `Post`). `trees` are per superblock in
/// raster order; plane dimensions must be multiples of the superblock size.
pub fn apply_lapping(
    buf: &mut [i32],
    width: usize,
    height: usize,
    trees: &[PartitionTree],
    filter: &LappingFilter4,
    dir: LapDirection,
) -> Result<()> {
    assert_eq!(buf.len(), width * height);
    let ops = lapping_ops(width, height, trees)?;
    match dir {
        LapDirection::Pre => {
            for op in &ops {
                apply_edge(buf, width, *op, filter, LapDirection::Pre);
            }
        }
        LapDirection::Post => {
            for op in ops.iter().rev() {
                apply_edge(buf, width, *op, filter, LapDirection::Post);
            }
        }
    }
    Ok(())
}

/// Applies a single edge op in the given direction on a strided buffer.
/// Used by the RDO search to pre/post-filter interior edges of a candidate
/// region without rebuilding the full op list.
pub fn apply_edge_op(
    buf: &mut [i32],
    stride: usize,
    op: EdgeOp,
    filter: &LappingFilter4,
    dir: LapDirection,
) {
    apply_edge(buf, stride, op, filter, dir);
}
