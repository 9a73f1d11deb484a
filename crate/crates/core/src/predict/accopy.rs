//! AC copy prediction: first row / first column of transform coefficients
//! copied verbatim from same-sized neighbors.

use crate::pvq::bands::BandLayout;
use crate::pvq::zigzag;

/// One neighbor's coefficients: row-major `size`x`size` block.
#[derive(Debug, Clone, Copy)]
pub struct NeighborCoeffs<'a> {
    pub coeffs: &'a [f64],
    pub size: usize,
}

/// Builds the AC-copy predictor for an `n`x`n` block: the first row comes
/// from a same-sized above neighbor, the first column from a same-sized
/// left neighbor; everything else predicts zero (bands rely on noref).
/// Within the lowest band, which spans parts of both the first row and
/// first column, only the higher-energy source is kept.
///
/// Returns `None` when no same-sized neighbor exists.
pub fn ac_copy_predict(
    n: usize,
    above: Option<NeighborCoeffs<'_>>,
    left: Option<NeighborCoeffs<'_>>,
) -> Option<Vec<f64>> {
    let above = above.filter(|nb| nb.size == n);
    let left = left.filter(|nb| nb.size == n);
    if above.is_none() && left.is_none() {
        return None;
    }
    let mut pred = vec![0.0; n * n];
    let mut row_energy = 0.0;
    let mut col_energy = 0.0;
    if let Some(nb) = above {
        assert_eq!(nb.coeffs.len(), n * n);
        for j in 1..n {
            pred[j] = nb.coeffs[j];
            row_energy += nb.coeffs[j] * nb.coeffs[j];
        }
    }
    if let Some(nb) = left {
        assert_eq!(nb.coeffs.len(), n * n);
        for i in 1..n {
            pred[i * n] = nb.coeffs[i * n];
            col_energy += nb.coeffs[i * n] * nb.coeffs[i * n];
        }
    }
    if above.is_some() && left.is_some() {
        // Keep only the higher-energy source inside the lowest band.
        let layout = BandLayout::for_size(n);
        let scan = zigzag(n);
        let keep_row = row_energy >= col_energy;
        for p in layout.bands[0].clone() {
            let (r, c) = scan[p];
            if keep_row && r > 0 && c == 0 {
                pred[r * n] = 0.0;
            }
            if !keep_row && r == 0 && c > 0 {
                pred[c] = 0.0;
            }
        }
    }
    Some(pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..n * n).map(|i| f(i / n, i % n)).collect()
    }

    #[test]
    fn same_size_above_copies_first_row_verbatim() {
        let n = 8;
        let nb = block(n, |r, c| (r * n + c) as f64);
        let pred =
            ac_copy_predict(n, Some(NeighborCoeffs { coeffs: &nb, size: n }), None).unwrap();
        for j in 1..n {
            assert_eq!(pred[j], nb[j]);
        }
        // Nothing else predicted.
        for i in 1..n {
            for j in 0..n {
                assert_eq!(pred[i * n + j], 0.0);
            }
        }
    }

    #[test]
    fn lowest_band_keeps_higher_energy_source_only() {
        let n = 8;
        // Above row has energy 100, left column energy 10.
        let mut above = vec![0.0; n * n];
        for j in 1..n {
            above[j] = (100.0f64 / (n - 1) as f64).sqrt();
        }
        let mut left = vec![0.0; n * n];
        for i in 1..n {
            left[i * n] = (10.0f64 / (n - 1) as f64).sqrt();
        }
        let pred = ac_copy_predict(
            n,
            Some(NeighborCoeffs { coeffs: &above, size: n }),
            Some(NeighborCoeffs { coeffs: &left, size: n }),
        )
        .unwrap();
        let layout = BandLayout::for_size(n);
        let scan = zigzag(n);
        for p in layout.bands[0].clone() {
            let (r, c) = scan[p];
            if r > 0 && c == 0 {
                assert_eq!(pred[r * n], 0.0, "column entry in lowest band must be dropped");
            }
            if r == 0 && c > 0 {
                assert_eq!(pred[c], above[c], "row entry in lowest band must be kept");
            }
        }
        // Outside the lowest band both sources remain.
        for p in layout.bands[1].clone().chain(layout.bands[2].clone()) {
            let (r, c) = scan[p];
            if r > 0 && c == 0 {
                assert_eq!(pred[r * n], left[r * n]);
            }
        }
    }

    #[test]
    fn different_size_neighbor_gives_no_predictor() {
        let nb = block(16, |r, c| (r + c) as f64);
        assert!(ac_copy_predict(8, Some(NeighborCoeffs { coeffs: &nb, size: 16 }), None)
            .is_none());
        // Mixed: only the matching neighbor contributes.
        let same = block(8, |r, c| (r * 8 + c) as f64);
        let pred = ac_copy_predict(
            8,
            Some(NeighborCoeffs { coeffs: &nb, size: 16 }),
            Some(NeighborCoeffs { coeffs: &same, size: 8 }),
        )
        .unwrap();
        for j in 1..8 {
            assert_eq!(pred[j], 0.0, "row must not be predicted from a mismatched size");
        }
        for i in 1..8 {
            assert_eq!(pred[i * 8], same[i * 8]);
        }
    }

    #[test]
    fn predictor_values_are_bit_identical_to_source() {
        let n = 4;
        let above = block(n, |r, c| ((r * 31 + c * 17) as f64).sin() * 1e3);
        let left = block(n, |r, c| ((r * 13 + c * 7) as f64).cos() * 1e-3);
        let pred = ac_copy_predict(
            n,
            Some(NeighborCoeffs { coeffs: &above, size: n }),
            Some(NeighborCoeffs { coeffs: &left, size: n }),
        )
        .unwrap();
        for j in 1..n {
            assert!(pred[j] == above[j] || pred[j] == 0.0);
        }
        for i in 1..n {
            assert!(pred[i * n] == left[i * n] || pred[i * n] == 0.0);
        }
    }
}
