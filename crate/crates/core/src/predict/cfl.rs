//! Frequency-domain chroma-from-luma: co-located luma coefficients used
//! directly as the PVQ shape predictor for chroma bands.

use crate::transform::wht::wht2x2_real_forward;

/// TF-merges four `n`x`n` frequency blocks (TL, TR, BL, BR of a 2n x 2n
/// area) into one 2n x 2n coefficient block: each coefficient position is
/// combined across the four blocks with the 2x2 WHT and scattered into the
/// four frequency quadrants (sum to low-low, horizontal difference to the
/// top-right quadrant, and so on).
pub fn tf_merge4(tl: &[f64], tr: &[f64], bl: &[f64], br: &[f64], n: usize) -> Vec<f64> {
    assert!(tl.len() == n * n && tr.len() == n * n && bl.len() == n * n && br.len() == n * n);
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            let (a, b, c, d) = wht2x2_real_forward(tl[idx], tr[idx], bl[idx], br[idx]);
            out[i * m + j] = a;
            out[i * m + j + n] = b;
            out[(i + n) * m + j] = c;
            out[(i + n) * m + j + n] = d;
        }
    }
    out
}

/// Shape predictor for an `n`x`n` chroma block from the co-located
/// 2n x 2n luma coefficient block (4:2:0 sampling maps chroma frequency
/// (i, j) onto the low-frequency luma quadrant). The DC entry is zeroed:
/// chroma DC is coded through the Haar DC hierarchy, not predicted here.
pub fn cfl_shape_predict(luma: &[f64], two_n: usize) -> Vec<f64> {
    assert_eq!(luma.len(), two_n * two_n);
    assert!(two_n >= 8 && two_n.is_power_of_two());
    let n = two_n / 2;
    let mut pred = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            pred[i * n + j] = luma[i * two_n + j];
        }
    }
    pred[0] = 0.0;
    pred
}
