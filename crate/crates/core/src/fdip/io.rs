//! Serialization of trained predictor sets: a small versioned header
//! followed by each mode's dense matrix (little-endian f64, row-major) and
//! its sparsity mask (one byte per entry).

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::fdip::modes::{BLK_DIM, CTX_DIM};
use crate::fdip::train::{SparsePredictor, TrainedPredictors};
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"FDIP";
const VERSION: u8 = 1;

pub fn write_predictors<W: Write>(w: &mut W, preds: &TrainedPredictors) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&[VERSION, preds.modes.len() as u8, BLK_DIM as u8, CTX_DIM as u8])?;
    for p in &preds.modes {
        assert_eq!(p.f.shape(), (BLK_DIM, CTX_DIM));
        assert_eq!(p.mask.len(), BLK_DIM * CTX_DIM);
        for i in 0..BLK_DIM {
            for j in 0..CTX_DIM {
                w.write_all(&p.f[(i, j)].to_le_bytes())?;
            }
        }
        let mask_bytes: Vec<u8> = p.mask.iter().map(|&b| b as u8).collect();
        w.write_all(&mask_bytes)?;
    }
    Ok(())
}

pub fn read_predictors<R: Read>(r: &mut R) -> Result<TrainedPredictors> {
    let mut header = [0u8; 8];
    read_exact(r, &mut header, "header")?;
    if header[..4] != MAGIC {
        return Err(Error::MalformedStream("bad predictor file magic".into()));
    }
    if header[4] != VERSION {
        return Err(Error::VersionMismatch(header[4]));
    }
    let num_modes = header[5] as usize;
    if header[6] as usize != BLK_DIM || header[7] as usize != CTX_DIM {
        return Err(Error::MalformedStream(format!(
            "unsupported predictor geometry {}x{}",
            header[6], header[7]
        )));
    }
    let mut modes = Vec::with_capacity(num_modes);
    for _ in 0..num_modes {
        let mut buf = vec![0u8; BLK_DIM * CTX_DIM * 8];
        read_exact(r, &mut buf, "predictor matrix")?;
        let mut f = DMatrix::zeros(BLK_DIM, CTX_DIM);
        for i in 0..BLK_DIM {
            for j in 0..CTX_DIM {
                let off = (i * CTX_DIM + j) * 8;
                f[(i, j)] = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
            }
        }
        let mut mask_bytes = vec![0u8; BLK_DIM * CTX_DIM];
        read_exact(r, &mut mask_bytes, "sparsity mask")?;
        let mask: Vec<bool> = mask_bytes.iter().map(|&b| b != 0).collect();
        // Masked-off weights must be zero in a well-formed file.
        for (k, &keep) in mask.iter().enumerate() {
            if !keep && f[(k / CTX_DIM, k % CTX_DIM)] != 0.0 {
                return Err(Error::MalformedStream(
                    "nonzero weight outside sparsity mask".into(),
                ));
            }
        }
        modes.push(SparsePredictor { f, mask });
    }
    Ok(TrainedPredictors { modes })
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Truncated(format!("predictor file ended inside {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_predictors() -> TrainedPredictors {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let modes = (0..10)
            .map(|_| {
                let mut mask = vec![false; BLK_DIM * CTX_DIM];
                let mut f = DMatrix::zeros(BLK_DIM, CTX_DIM);
                for i in 0..BLK_DIM {
                    for _ in 0..4 {
                        let j = rng.gen_range(0..CTX_DIM);
                        mask[i * CTX_DIM + j] = true;
                        f[(i, j)] = rng.gen_range(-2.0..2.0);
                    }
                }
                SparsePredictor { f, mask }
            })
            .collect();
        TrainedPredictors { modes }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let preds = sample_predictors();
        let mut buf = Vec::new();
        write_predictors(&mut buf, &preds).unwrap();
        let back = read_predictors(&mut buf.as_slice()).unwrap();
        assert_eq!(back.modes.len(), preds.modes.len());
        for (a, b) in preds.modes.iter().zip(&back.modes) {
            assert_eq!(a.mask, b.mask);
            for i in 0..BLK_DIM {
                for j in 0..CTX_DIM {
                    assert_eq!(a.f[(i, j)].to_bits(), b.f[(i, j)].to_bits());
                }
            }
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let mut buf = Vec::new();
        write_predictors(&mut buf, &sample_predictors()).unwrap();
        buf[0] = b'X';
        assert!(matches!(
            read_predictors(&mut buf.as_slice()),
            Err(Error::MalformedStream(_))
        ));
    }

    #[test]
    fn wrong_version_rejected() {
        let mut buf = Vec::new();
        write_predictors(&mut buf, &sample_predictors()).unwrap();
        buf[4] = 9;
        assert!(matches!(read_predictors(&mut buf.as_slice()), Err(Error::VersionMismatch(9))));
    }

    #[test]
    fn truncated_file_rejected() {
        let mut buf = Vec::new();
        write_predictors(&mut buf, &sample_predictors()).unwrap();
        buf.truncate(buf.len() - 10);
        assert!(matches!(read_predictors(&mut buf.as_slice()), Err(Error::Truncated(_))));
    }

    #[test]
    fn weight_outside_mask_rejected() {
        let preds = sample_predictors();
        let mut buf = Vec::new();
        write_predictors(&mut buf, &preds).unwrap();
        // Overwrite the first masked-off weight of mode 0 with a nonzero.
        let k = preds.modes[0].mask.iter().position(|&b| !b).unwrap();
        let off = 8 + k * 8;
        buf[off..off + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(
            read_predictors(&mut buf.as_slice()),
            Err(Error::MalformedStream(_))
        ));
    }
}
