//! Quality metrics.

use crate::io::Frame;
use crate::plane::PixelPlane;

/// Capped PSNR in dB between two planes of identical geometry. Identical
/// planes (and anything above the cap) report 99 dB.
pub const PSNR_CAP: f64 = 99.0;

pub fn psnr(a: &PixelPlane, b: &PixelPlane) -> f64 {
    assert_eq!((a.width, a.height), (b.width, b.height), "plane geometry mismatch");
    assert_eq!(a.bit_depth, b.bit_depth, "bit depth mismatch");
    let n = (a.width * a.height) as f64;
    let sse: f64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| {
            let d = (x - y) as f64;
            d * d
        })
        .sum();
    if sse == 0.0 {
        return PSNR_CAP;
    }
    let peak = a.max_value() as f64;
    (10.0 * (peak * peak * n / sse).log10()).min(PSNR_CAP)
}

/// Per-plane PSNR of a frame: Y, then U and V when present.
pub fn psnr_frame(a: &Frame, b: &Frame) -> Vec<f64> {
    let mut out = vec![psnr(&a.y, &b.y)];
    if let (Some((au, av)), Some((bu, bv))) = (&a.chroma, &b.chroma) {
        out.push(psnr(au, bu));
        out.push(psnr(av, bv));
    }
    out
}
