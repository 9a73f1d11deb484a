//! The two in-loop filters: the directional conditional-replacement
//! deringing filter and the constrained low-pass filter. Tap geometry and
//! thresholds are non-normative and kept behind these two functions.

use crate::dering::direction::{DIR_BLOCK, DIR_STEPS};

/// Primary tap weights for offsets (+1, -1, +2, -2) along the direction.
const PRIMARY_WEIGHTS: [i32; 4] = [4, 4, 2, 2];
/// Secondary taps sit two steps across the direction, weight 1 each.
const SECONDARY_WEIGHT: i32 = 1;
const WEIGHT_SHIFT: i32 = 16;

/// Per-pixel thresholds for a given strength: primary taps clamp at
/// 2*strength, secondary at strength.
pub fn dering_thresholds(strength: u8) -> (i32, i32) {
    (2 * strength as i32, strength as i32)
}

/// Worst-case per-pixel output deviation of `dering_block`.
pub fn dering_max_deviation(strength: u8) -> i32 {
    let (t1, t2) = dering_thresholds(strength);
    let num = PRIMARY_WEIGHTS.iter().sum::<i32>() * t1 + 2 * SECONDARY_WEIGHT * t2;
    (num + WEIGHT_SHIFT - 1) / WEIGHT_SHIFT
}

#[inline]
fn clamp_diff(d: i32, t: i32) -> i32 {
    d.clamp(-t, t)
}

/// Directional conditional-replacement filter on one 8x8 block. Each tap
/// contributes its difference from the center pixel, clamped to the
/// strength-dependent threshold; taps falling outside the block are
/// skipped. `strength >= 1`.
pub fn dering_block(block: &[i32], dir: usize, strength: u8) -> Vec<i32> {
    assert_eq!(block.len(), DIR_BLOCK * DIR_BLOCK);
    assert!(strength >= 1);
    let (t1, t2) = dering_thresholds(strength);
    let [step1, step2] = DIR_STEPS[dir];
    let [_, xstep2] = DIR_STEPS[(dir + 4) % 8];
    let mut out = block.to_vec();
    let at = |i: i32, j: i32| -> Option<i32> {
        if i < 0 || j < 0 || i >= DIR_BLOCK as i32 || j >= DIR_BLOCK as i32 {
            None
        } else {
            Some(block[(i as usize) * DIR_BLOCK + j as usize])
        }
    };
    for i in 0..DIR_BLOCK as i32 {
        for j in 0..DIR_BLOCK as i32 {
            let x = block[(i as usize) * DIR_BLOCK + j as usize];
            let mut sum = 0i32;
            // Primary taps at +-1, +-2 along the direction.
            let offsets = [
                (step1, PRIMARY_WEIGHTS[0]),
                ((-step1.0, -step1.1), PRIMARY_WEIGHTS[1]),
                (step2, PRIMARY_WEIGHTS[2]),
                ((-step2.0, -step2.1), PRIMARY_WEIGHTS[3]),
            ];
            for ((dy, dx), w) in offsets {
                if let Some(v) = at(i + dy, j + dx) {
                    sum += w * clamp_diff(v - x, t1);
                }
            }
            // Secondary taps two steps across the direction.
            for (dy, dx) in [xstep2, (-xstep2.0, -xstep2.1)] {
                if let Some(v) = at(i + dy, j + dx) {
                    sum += SECONDARY_WEIGHT * clamp_diff(v - x, t2);
                }
            }
            // Round to nearest, symmetrically for negative sums.
            let delta = (sum.abs() + WEIGHT_SHIFT / 2) / WEIGHT_SHIFT * sum.signum();
            out[(i as usize) * DIR_BLOCK + j as usize] = x + delta;
        }
    }
    out
}

/// Constrained low-pass filter over an arbitrary `w` x `h` region: each
/// pixel moves by the clipped average of its 4-neighborhood differences,
/// bounded by `strength` (1, 2, or 4). Border neighbors are replicated,
/// contributing zero.
pub fn clpf_block(block: &[i32], w: usize, h: usize, strength: u8) -> Vec<i32> {
    assert_eq!(block.len(), w * h);
    assert!(matches!(strength, 1 | 2 | 4));
    let s = strength as i32;
    let mut out = block.to_vec();
    for i in 0..h {
        for j in 0..w {
            let x = block[i * w + j];
            let nb = |ii: isize, jj: isize| -> i32 {
                if ii < 0 || jj < 0 || ii >= h as isize || jj >= w as isize {
                    x
                } else {
                    block[ii as usize * w + jj as usize]
                }
            };
            let (i, j) = (i as isize, j as isize);
            let sum = clamp_diff(nb(i - 1, j) - x, s)
                + clamp_diff(nb(i + 1, j) - x, s)
                + clamp_diff(nb(i, j - 1) - x, s)
                + clamp_diff(nb(i, j + 1) - x, s);
            let delta = (sum.abs() + 2) / 4 * sum.signum();
            out[i as usize * w + j as usize] = x + delta;
        }
    }
    out
}
