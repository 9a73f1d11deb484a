//! Frequency-band layout over zig-zag coefficient order.

use std::ops::Range;

/// Zig-zag scan order for an `n`x`n` block: position `p` in the scan maps
/// to `(row, col)`. Standard serpentine traversal of anti-diagonals.
pub fn zigzag(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n);
    for d in 0..(2 * n - 1) {
        let lo = d.saturating_sub(n - 1);
        let hi = d.min(n - 1);
        if d % 2 == 0 {
            // Up-right: row decreasing.
            for r in (lo..=hi).rev() {
                out.push((r, d - r));
            }
        } else {
            for r in lo..=hi {
                out.push((r, d - r));
            }
        }
    }
    out
}

/// Ordered AC coefficient bands over zig-zag positions `1..n*n`. Each
/// octave above 8x8 splits into three bands (low/mid/high), so the band
/// sizes are 15; 16, 32; 64, 64, 64; 256, 256, 256.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandLayout {
    pub block_size: usize,
    pub bands: Vec<Range<usize>>,
}

impl BandLayout {
    pub fn for_size(n: usize) -> Self {
        assert!(matches!(n, 4 | 8 | 16 | 32));
        let sizes: &[usize] = match n {
            4 => &[15],
            8 => &[15, 16, 32],
            16 => &[15, 16, 32, 64, 64, 64],
            _ => &[15, 16, 32, 64, 64, 64, 256, 256, 256],
        };
        let mut bands = Vec::with_capacity(sizes.len());
        let mut at = 1; // position 0 is DC
        for &s in sizes {
            bands.push(at..at + s);
            at += s;
        }
        debug_assert_eq!(at, n * n);
        BandLayout { block_size: n, bands }
    }

    pub fn num_bands(&self) -> usize {
        self.bands.len()
    }

    /// Gathers one band from a row-major coefficient block, in zig-zag
    /// order.
    pub fn extract(&self, coeffs: &[f64], scan: &[(usize, usize)], band: usize) -> Vec<f64> {
        let n = self.block_size;
        self.bands[band]
            .clone()
            .map(|p| {
                let (r, c) = scan[p];
                coeffs[r * n + c]
            })
            .collect()
    }

    /// Scatters one band back into a row-major coefficient block.
    pub fn insert(
        &self,
        coeffs: &mut [f64],
        scan: &[(usize, usize)],
        band: usize,
        values: &[f64],
    ) {
        let n = self.block_size;
        assert_eq!(values.len(), self.bands[band].len());
        for (p, &v) in self.bands[band].clone().zip(values) {
            let (r, c) = scan[p];
            coeffs[r * n + c] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn zigzag_is_a_permutation_with_known_prefix() {
        for n in [4usize, 8, 16, 32] {
            let z = zigzag(n);
            assert_eq!(z.len(), n * n);
            let set: HashSet<_> = z.iter().collect();
            assert_eq!(set.len(), n * n);
            // Classic start of the serpentine scan.
            assert_eq!(&z[..4], &[(0, 0), (0, 1), (1, 0), (2, 0)]);
        }
    }

    #[test]
    fn bands_partition_all_ac_positions() {
        for n in [4usize, 8, 16, 32] {
            let layout = BandLayout::for_size(n);
            let mut covered = vec![false; n * n];
            covered[0] = true; // DC excluded by construction
            for b in &layout.bands {
                for p in b.clone() {
                    assert!(!covered[p], "position {p} covered twice");
                    covered[p] = true;
                }
            }
            assert!(covered.iter().all(|&c| c));
        }
    }

    #[test]
    fn extract_insert_roundtrip() {
        let n = 8;
        let layout = BandLayout::for_size(n);
        let scan = zigzag(n);
        let coeffs: Vec<f64> = (0..n * n).map(|i| i as f64).collect();
        let mut rebuilt = vec![0.0; n * n];
        rebuilt[0] = coeffs[0];
        for b in 0..layout.num_bands() {
            let band = layout.extract(&coeffs, &scan, b);
            layout.insert(&mut rebuilt, &scan, b, &band);
        }
        assert_eq!(coeffs, rebuilt);
    }
}
