//! Rendering of post-filtered DC basis functions, for visualizing the
//! partition structure and the spatial support of the lapped transform.

use crate::plane::PixelPlane;
use crate::transform::lapping::{apply_lapping, LapDirection, LappingFilter4};
use crate::transform::partition::PartitionTree;
use crate::Result;

/// Renders the post-filtered DC basis of a single leaf: a coefficient
/// plane that is zero except for that leaf's DC (set to `amplitude`), run
/// through the inverse transform and the post-filter. Returns the raw
/// spatial response; with lapping, its support is the leaf extent plus two
/// pixels past each edge.
pub fn render_dc_impulse(
    width: usize,
    height: usize,
    trees: &[PartitionTree],
    leaf_x: usize,
    leaf_y: usize,
    leaf_size: usize,
    amplitude: f64,
    lapping: bool,
) -> Result<Vec<i32>> {
    let mut buf = vec![0i32; width * height];
    // The inverse DCT of a lone DC coefficient `a` in an n x n block is the
    // constant a / n.
    let v = (amplitude / leaf_size as f64).round() as i32;
    for r in 0..leaf_size {
        for c in 0..leaf_size {
            buf[(leaf_y + r) * width + leaf_x + c] = v;
        }
    }
    if lapping {
        apply_lapping(&mut buf, width, height, trees, &LappingFilter4::default(), LapDirection::Post)?;
    }
    Ok(buf)
}

/// Renders every leaf's DC basis at once: each leaf becomes a constant
/// block of `amplitude / leaf_size`, post-filtered, offset to mid-gray and
/// clamped to 8 bits. Larger leaves render darker, which makes the chosen
/// partition and the lapped basis overlap directly visible.
pub fn render_dc_basis(
    width: usize,
    height: usize,
    trees: &[PartitionTree],
    amplitude: f64,
    lapping: bool,
) -> Result<PixelPlane> {
    let sb = trees.first().map(|t| t.sb_size).unwrap_or(32);
    let mut buf = vec![0i32; width * height];
    for (i, tree) in trees.iter().enumerate() {
        let sbs_x = width / sb;
        let sx = (i % sbs_x) * sb;
        let sy = (i / sbs_x) * sb;
        for leaf in tree.leaves() {
            let v = (amplitude / leaf.size as f64).round() as i32;
            for r in 0..leaf.size {
                for c in 0..leaf.size {
                    buf[(sy + leaf.y + r) * width + sx + leaf.x + c] = v;
                }
            }
        }
    }
    if lapping {
        apply_lapping(&mut buf, width, height, trees, &LappingFilter4::default(), LapDirection::Post)?;
    }
    let samples = buf.into_iter().map(|v| (v + 128).clamp(0, 255)).collect();
    Ok(PixelPlane { width, height, bit_depth: 8, samples })
}
