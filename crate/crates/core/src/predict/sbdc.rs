//! Static linear prediction of the superblock root DC from causal
//! neighbors.

/// Predicts a superblock's root DC from its left, above, and above-left
/// neighbors' root DCs. With all three present this is the clamped gradient
/// predictor `left + above - above_left`, clamped to the interval spanned
/// by left and above; with fewer neighbors it degrades to their average,
/// a copy, or `midrange` when the superblock has no causal neighbor.
pub fn predict_sb_dc(
    left: Option<f64>,
    above: Option<f64>,
    above_left: Option<f64>,
    midrange: f64,
) -> f64 {
    match (left, above) {
        (Some(l), Some(a)) => match above_left {
            Some(al) => (l + a - al).clamp(l.min(a), l.max(a)),
            None => (l + a) / 2.0,
        },
        (Some(l), None) => l,
        (None, Some(a)) => a,
        (None, None) => midrange,
    }
}
