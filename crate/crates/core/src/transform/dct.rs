//! Orthonormal block DCT (type II) via separable double-precision matrix
//! transforms. Correctness-first: fast integer butterflies are out of scope.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::{Error, Result};

pub const SUPPORTED_SIZES: [usize; 4] = [4, 8, 16, 32];

/// N x N transform coefficients in signed fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffBlock {
    pub size: usize,
    pub frac_bits: u8,
    pub coeffs: Vec<i32>,
}

impl CoeffBlock {
    pub fn from_f64(size: usize, frac_bits: u8, values: &[f64]) -> Self {
        assert_eq!(values.len(), size * size);
        let scale = (1i64 << frac_bits) as f64;
        let coeffs = values.iter().map(|&v| round_half_away(v * scale) as i32).collect();
        CoeffBlock { size, frac_bits, coeffs }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let scale = (1i64 << self.frac_bits) as f64;
        self.coeffs.iter().map(|&c| c as f64 / scale).collect()
    }
}

/// Round half away from zero, the fixed-point conversion used at the codec
/// boundary.
#[inline]
pub fn round_half_away(v: f64) -> i64 {
    if v >= 0.0 { (v + 0.5).floor() as i64 } else { (v - 0.5).ceil() as i64 }
}

fn matrix_cache() -> &'static Mutex<HashMap<usize, Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Row-major orthonormal DCT-II matrix of size `n`. Row `k`, column `i` is
/// `c(k) * cos(pi/n * (i + 1/2) * k)` with `c(0) = sqrt(1/n)`, else
/// `sqrt(2/n)`.
pub fn dct_matrix(n: usize) -> Vec<f64> {
    let cache = matrix_cache();
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut m = vec![0.0; n * n];
            for k in 0..n {
                let c = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                for i in 0..n {
                    m[k * n + i] =
                        c * (std::f64::consts::PI / n as f64 * (i as f64 + 0.5) * k as f64).cos();
                }
            }
            m
        })
        .clone()
}

fn check_size(n: usize) -> Result<()> {
    if SUPPORTED_SIZES.contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(n))
    }
}

/// 2D forward DCT of a row-major `n`x`n` block.
pub fn dct2d_forward(block: &[f64], n: usize) -> Result<Vec<f64>> {
    check_size(n)?;
    Ok(transform2d(block, n, false))
}

/// 2D inverse DCT of a row-major `n`x`n` coefficient block.
pub fn dct2d_inverse(coeffs: &[f64], n: usize) -> Result<Vec<f64>> {
    check_size(n)?;
    Ok(transform2d(coeffs, n, true))
}

fn transform2d(data: &[f64], n: usize, inverse: bool) -> Vec<f64> {
    assert_eq!(data.len(), n * n);
    let m = dct_matrix(n);
    // Rows, then columns. Forward applies M, inverse applies M^T (the matrix
    // is orthonormal).
    let mut tmp = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                let w = if inverse { m[i * n + k] } else { m[k * n + i] };
                acc += w * data[r * n + i];
            }
            tmp[r * n + k] = acc;
        }
    }
    let mut out = vec![0.0; n * n];
    for c in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                let w = if inverse { m[i * n + k] } else { m[k * n + i] };
                acc += w * tmp[i * n + c];
            }
            out[k * n + c] = acc;
        }
    }
    out
}
