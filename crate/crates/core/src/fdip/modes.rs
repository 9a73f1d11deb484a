//! The ten 4x4 intra prediction modes (VP8's B_PRED family) expressed as
//! linear maps from the 48-pixel causal context to the 16-pixel block.
//!
//! Context layout: the up, left, and up-left neighboring 4x4 blocks,
//! row-major, concatenated in that order. Directional modes are built by
//! tracing each block pixel back along the mode direction to the causal
//! edge (the row above or the column to the left) and linearly
//! interpolating between the two nearest edge pixels; edge pixels beyond
//! the available context (VP8's above-right samples) are replaced by the
//! nearest available one. Divergences from VP8's exact integer formulas:
//! two-tap interpolation instead of VP8's three-tap smoothing, and
//! replicated above-right samples.

use nalgebra::DMatrix;

pub const CTX_DIM: usize = 48;
pub const BLK_DIM: usize = 16;
pub const NUM_MODES: usize = 10;

pub const MODE_NAMES: [&str; NUM_MODES] =
    ["DC", "TM", "VE", "HE", "LD", "RD", "VR", "VL", "HD", "HU"];

/// Context index of pixel (r, c) of the up neighbor block.
fn up(r: usize, c: usize) -> usize {
    r * 4 + c
}
/// Context index of pixel (r, c) of the left neighbor block.
fn left(r: usize, c: usize) -> usize {
    16 + r * 4 + c
}
/// Context index of pixel (r, c) of the up-left neighbor block.
fn upleft(r: usize, c: usize) -> usize {
    32 + r * 4 + c
}

/// Adds `w` times the top-edge sample at horizontal position `x`
/// (x = -1 is the corner, 0..=3 the above row, beyond 3 replicated).
fn add_top(row: &mut [f64], x: i32, w: f64) {
    let x = x.clamp(-1, 3);
    if x < 0 {
        row[upleft(3, 3)] += w;
    } else {
        row[up(3, x as usize)] += w;
    }
}

/// Adds `w` times the left-edge sample at vertical position `y`.
fn add_left(row: &mut [f64], y: i32, w: f64) {
    let y = y.clamp(-1, 3);
    if y < 0 {
        row[upleft(3, 3)] += w;
    } else {
        row[left(y as usize, 3)] += w;
    }
}

/// Adds a linearly interpolated edge sample at fractional position `pos`.
fn add_interp(row: &mut [f64], top: bool, pos: f64, w: f64) {
    let lo = pos.floor();
    let frac = pos - lo;
    let (w0, w1) = (w * (1.0 - frac), w * frac);
    if top {
        add_top(row, lo as i32, w0);
        if w1 != 0.0 {
            add_top(row, lo as i32 + 1, w1);
        }
    } else {
        add_left(row, lo as i32, w0);
        if w1 != 0.0 {
            add_left(row, lo as i32 + 1, w1);
        }
    }
}

fn directional(dy: f64, dx: f64) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(BLK_DIM, CTX_DIM);
    for r in 0..4 {
        for c in 0..4 {
            let mut wrow = vec![0.0; CTX_DIM];
            // Back-trace to whichever causal edge is hit first.
            let t_top = if dy > 0.0 { (r as f64 + 1.0) / dy } else { f64::INFINITY };
            let t_left = if dx > 0.0 { (c as f64 + 1.0) / dx } else { f64::INFINITY };
            if t_top <= t_left {
                let xpos = c as f64 - t_top * dx;
                add_interp(&mut wrow, true, xpos, 1.0);
            } else {
                let ypos = r as f64 - t_left * dy;
                add_interp(&mut wrow, false, ypos, 1.0);
            }
            for (j, &w) in wrow.iter().enumerate() {
                e[(r * 4 + c, j)] = w;
            }
        }
    }
    e
}

/// Builds the ten spatial mode matrices, DC first (the tie-break winner).
pub fn vp8_modes() -> Vec<DMatrix<f64>> {
    let mut modes = Vec::with_capacity(NUM_MODES);
    // 0: DC — mean of the above row and left column.
    let mut dc = DMatrix::zeros(BLK_DIM, CTX_DIM);
    for p in 0..BLK_DIM {
        for j in 0..4 {
            dc[(p, up(3, j))] = 1.0 / 8.0;
            dc[(p, left(j, 3))] = 1.0 / 8.0;
        }
    }
    modes.push(dc);
    // 1: TM — true motion, p(r,c) = A[c] + L[r] - UL.
    let mut tm = DMatrix::zeros(BLK_DIM, CTX_DIM);
    for r in 0..4 {
        for c in 0..4 {
            tm[(r * 4 + c, up(3, c))] += 1.0;
            tm[(r * 4 + c, left(r, 3))] += 1.0;
            tm[(r * 4 + c, upleft(3, 3))] -= 1.0;
        }
    }
    modes.push(tm);
    // 2..9: directional modes at VP8's eight orientations.
    for (dy, dx) in [
        (1.0, 0.0),   // VE
        (0.0, 1.0),   // HE
        (1.0, -1.0),  // LD
        (1.0, 1.0),   // RD
        (2.0, 1.0),   // VR
        (2.0, -1.0),  // VL
        (1.0, 2.0),   // HD
        (-1.0, 2.0),  // HU
    ] {
        modes.push(directional(dy, dx));
    }
    modes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_mode_preserves_constants() {
        // Each row's weights must sum to 1 (except TM: 1 + 1 - 1 = 1), so a
        // constant context predicts the same constant.
        for (m, e) in vp8_modes().iter().enumerate() {
            for r in 0..BLK_DIM {
                let s: f64 = e.row(r).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "mode {} row {r} sums to {s}", MODE_NAMES[m]);
            }
        }
    }

    #[test]
    fn vertical_mode_copies_above_row() {
        let ve = &vp8_modes()[2];
        let mut ctx = vec![0.0; CTX_DIM];
        for j in 0..4 {
            ctx[up(3, j)] = (j + 1) as f64 * 10.0;
        }
        let ctx = nalgebra::DVector::from_vec(ctx);
        let pred = ve * ctx;
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(pred[r * 4 + c], (c + 1) as f64 * 10.0);
            }
        }
    }

    #[test]
    fn horizontal_mode_copies_left_column() {
        let he = &vp8_modes()[3];
        let mut ctx = vec![0.0; CTX_DIM];
        for i in 0..4 {
            ctx[left(i, 3)] = (i + 1) as f64 * 7.0;
        }
        let ctx = nalgebra::DVector::from_vec(ctx);
        let pred = he * ctx;
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(pred[r * 4 + c], (r + 1) as f64 * 7.0);
            }
        }
    }

    #[test]
    fn true_motion_formula() {
        let tm = &vp8_modes()[1];
        let mut ctx = vec![0.0; CTX_DIM];
        for j in 0..4 {
            ctx[up(3, j)] = 100.0 + j as f64;
            ctx[left(j, 3)] = 50.0 + 2.0 * j as f64;
        }
        ctx[upleft(3, 3)] = 90.0;
        let ctx = nalgebra::DVector::from_vec(ctx);
        let pred = tm * ctx;
        for r in 0..4 {
            for c in 0..4 {
                let want = (100.0 + c as f64) + (50.0 + 2.0 * r as f64) - 90.0;
                assert_eq!(pred[r * 4 + c], want);
            }
        }
    }

    #[test]
    fn diagonal_modes_follow_their_direction() {
        // RD copies the 45-degree down-right diagonal: pixel (1,1) traces
        // back to the corner.
        let rd = &vp8_modes()[5];
        let mut ctx = vec![0.0; CTX_DIM];
        ctx[upleft(3, 3)] = 33.0;
        let ctx = nalgebra::DVector::from_vec(ctx);
        let pred = rd * ctx;
        assert_eq!(pred[0], 33.0);
        assert_eq!(pred[5], 33.0); // (1,1)
        assert_eq!(pred[15], 33.0); // (3,3)
        assert_eq!(pred[3], 0.0); // (0,3) hits the above row instead
    }
}
