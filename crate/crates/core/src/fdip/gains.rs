//! Coding-gain and prediction-gain metrics.

/// Coding gain, prediction gain, and their sum, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport {
    pub coding_gain_db: f64,
    pub prediction_gain_db: f64,
}

impl GainReport {
    pub fn total_db(&self) -> f64 {
        self.coding_gain_db + self.prediction_gain_db
    }
}

/// Coding gain of a set of coefficient variances:
/// `10 log10(arithmetic mean / geometric mean)`. Non-positive variances are
/// excluded (they carry no rate) and reported in the second return value.
pub fn coding_gain_db(variances: &[f64]) -> (f64, usize) {
    let kept: Vec<f64> = variances.iter().copied().filter(|&v| v > 0.0).collect();
    let excluded = variances.len() - kept.len();
    if kept.is_empty() {
        return (0.0, excluded);
    }
    let am = kept.iter().sum::<f64>() / kept.len() as f64;
    let gm = (kept.iter().map(|v| v.ln()).sum::<f64>() / kept.len() as f64).exp();
    (10.0 * (am / gm).log10(), excluded)
}

/// Prediction gain: `10 log10(geomean input variance / geomean residual
/// variance)` over coefficient positions where both are positive.
pub fn prediction_gain_db(input_var: &[f64], residual_var: &[f64]) -> f64 {
    assert_eq!(input_var.len(), residual_var.len());
    let pairs: Vec<(f64, f64)> = input_var
        .iter()
        .zip(residual_var)
        .filter(|&(&i, &r)| i > 0.0 && r > 0.0)
        .map(|(&i, &r)| (i, r))
        .collect();
    if pairs.is_empty() {
        return 0.0;
    }
    let gm_in = (pairs.iter().map(|(i, _)| i.ln()).sum::<f64>() / pairs.len() as f64).exp();
    let gm_res = (pairs.iter().map(|(_, r)| r.ln()).sum::<f64>() / pairs.len() as f64).exp();
    10.0 * (gm_in / gm_res).log10()
}
