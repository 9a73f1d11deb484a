//! Householder reflection aligning a predictor with the first axis.

/// Reflection `H(x) = x - 2 (v.x)/(v.v) v` built from a predictor so that
/// `H(pred) = axis_sign * |pred| * e_0`. `H` is an involution and an
/// isometry, so applying it twice recovers the input and angles are
/// preserved.
#[derive(Debug, Clone)]
pub struct Householder {
    v: Vec<f64>,
    vv: f64,
    /// Sign of the axis image of the predictor: `H(pred)[0] = axis_sign * |pred|`.
    pub axis_sign: f64,
}

impl Householder {
    /// Panics on a (numerically) zero predictor; callers must fall back to
    /// noref coding instead.
    pub fn from_predictor(pred: &[f64]) -> Self {
        let norm: f64 = pred.iter().map(|p| p * p).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero predictor has no direction; use noref");
        // Reflect toward -sign(pred[0]) e0 so the reflection vector
        // v = pred + sign(pred[0]) |pred| e0 never cancels.
        let s = if pred[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = pred.to_vec();
        v[0] += s * norm;
        let vv: f64 = v.iter().map(|c| c * c).sum();
        Householder { v, vv, axis_sign: -s }
    }

    pub fn apply(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.v.len());
        if self.vv == 0.0 {
            return;
        }
        let d: f64 = self.v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        let f = 2.0 * d / self.vv;
        for (xi, vi) in x.iter_mut().zip(&self.v) {
            *xi -= f * vi;
        }
    }
}
