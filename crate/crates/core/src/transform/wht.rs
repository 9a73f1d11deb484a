//! Exactly reversible integer 2x2 Walsh-Hadamard transform.
//!
//! The forward transform costs seven additions/subtractions and one shift and
//! has orthonormal scaling, so it can merge or split frequency coefficients
//! without changing their magnitude.

use std::ops::{Add, Shr, Sub};

/// Number types the lifting steps operate on. Implemented for plain integers
/// and by instrumented wrappers in tests that audit the operation count.
pub trait WhtNum: Copy + Add<Output = Self> + Sub<Output = Self> + Shr<u32, Output = Self> {}

impl WhtNum for i32 {}
impl WhtNum for i64 {}

/// Forward 2x2 WHT of
/// ```text
/// | a b |
/// | c d |
/// ```
/// returning `(A, B, C, D)` in the same layout.
#[inline]
pub fn wht2x2_forward<T: WhtNum>(a: T, b: T, c: T, d: T) -> (T, T, T, T) {
    let e = a + c;
    let f = d - b;
    let g = (e - f) >> 1;
    let bb = g - b;
    let cc = g - c;
    let aa = e - bb;
    let dd = f + cc;
    (aa, bb, cc, dd)
}

/// Exact inverse of [`wht2x2_forward`].
#[inline]
pub fn wht2x2_inverse<T: WhtNum>(aa: T, bb: T, cc: T, dd: T) -> (T, T, T, T) {
    let e = aa + bb;
    let f = dd - cc;
    let g = (e - f) >> 1;
    let b = g - bb;
    let c = g - cc;
    let a = e - c;
    let d = f + b;
    (a, b, c, d)
}

/// Real-valued 2x2 WHT, `(1/2) H X H` with `H = [[1,1],[1,-1]]`. Reference
/// for the integer lifting version and the transform used for the Haar DC
/// hierarchy, where exactness of the real matrix product matters more than
/// integer reversibility.
#[inline]
pub fn wht2x2_real_forward(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64, f64) {
    (
        (a + b + c + d) / 2.0,
        (a - b + c - d) / 2.0,
        (a + b - c - d) / 2.0,
        (a - b - c + d) / 2.0,
    )
}

/// Exact inverse of [`wht2x2_real_forward`] (the transform is an involution
/// up to layout).
#[inline]
pub fn wht2x2_real_inverse(aa: f64, bb: f64, cc: f64, dd: f64) -> (f64, f64, f64, f64) {
    wht2x2_real_forward(aa, bb, cc, dd)
}
