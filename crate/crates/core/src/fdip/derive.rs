//! Frequency-domain equivalent of a spatial predictor: with the block
//! transform `T_b` and the (invertible) context transform `T_c`, the
//! spatial map `E` becomes `F = T_b . E . T_c^-1`, satisfying
//! `F . T_c(x) == T_b(E . x)` for every context `x`.

use nalgebra::DMatrix;

use crate::fdip::modes::{BLK_DIM, CTX_DIM};
use crate::transform::dct::dct_matrix;
use crate::{Error, Result};

/// Kronecker product `a (x) b`.
fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// The 16x16 operator applying the 2D 4x4 DCT to a row-major vectorized
/// block: `vec(D X D^T) = (D (x) D) vec(X)`.
pub fn block_dct_operator() -> DMatrix<f64> {
    let d = DMatrix::from_row_slice(4, 4, &dct_matrix(4));
    kron(&d, &d)
}

/// The 48x48 operator transforming the three context blocks independently.
pub fn context_dct_operator() -> DMatrix<f64> {
    let k = block_dct_operator();
    let mut t = DMatrix::zeros(CTX_DIM, CTX_DIM);
    for b in 0..3 {
        t.view_mut((b * BLK_DIM, b * BLK_DIM), (BLK_DIM, BLK_DIM)).copy_from(&k);
    }
    t
}

/// Derives the frequency-domain predictor equivalent to spatial `e` under
/// the given output (block) and input (context) transforms. Errors if the
/// context transform is singular.
pub fn derive_f(
    e: &DMatrix<f64>,
    t_out: &DMatrix<f64>,
    t_in: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let inv = t_in
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular context transform".into()))?;
    Ok(t_out * e * inv)
}

/// Convenience for the toolkit's fixed geometry: 16x48 spatial predictor
/// over DCT'd block and context.
pub fn derive_f_dct(e: &DMatrix<f64>) -> DMatrix<f64> {
    derive_f(e, &block_dct_operator(), &context_dct_operator())
        .expect("orthonormal DCT operator is invertible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_maps_to_identity() {
        // When context and block share the same geometry, the similarity
        // transform of the identity is the identity.
        let t = block_dct_operator();
        let e = DMatrix::identity(BLK_DIM, BLK_DIM);
        let f = derive_f(&e, &t, &t).unwrap();
        assert!((f - DMatrix::<f64>::identity(BLK_DIM, BLK_DIM)).norm() < 1e-12);
    }

    #[test]
    fn zero_maps_to_zero() {
        let e = DMatrix::zeros(BLK_DIM, CTX_DIM);
        let f = derive_f_dct(&e);
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn defining_identity_holds_for_random_predictors() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let t_out = block_dct_operator();
        let t_in = context_dct_operator();
        for _ in 0..5 {
            let e = DMatrix::from_fn(BLK_DIM, CTX_DIM, |_, _| rng.gen_range(-1.0..1.0));
            let f = derive_f_dct(&e);
            for _ in 0..20 {
                let x = DVector::from_fn(CTX_DIM, |_, _| rng.gen_range(-255.0..255.0));
                let lhs = &f * (&t_in * &x);
                let rhs = &t_out * (&e * &x);
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_transform_rejected() {
        let e = DMatrix::zeros(BLK_DIM, CTX_DIM);
        let t_out = block_dct_operator();
        let t_in = DMatrix::zeros(CTX_DIM, CTX_DIM);
        assert!(derive_f(&e, &t_out, &t_in).is_err());
    }
}
