use crate::{Error, Result};

/// A single image plane of integer samples in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPlane {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub samples: Vec<i32>,
}

impl PixelPlane {
    pub fn new(width: usize, height: usize, bit_depth: u8, samples: Vec<i32>) -> Result<Self> {
        if bit_depth != 8 && bit_depth != 10 {
            return Err(Error::InvalidArgument(format!(
                "bit depth {bit_depth} not supported (must be 8 or 10)"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        let max = 1i32 << bit_depth;
        if samples.iter().any(|&s| s < 0 || s >= max) {
            return Err(Error::InvalidArgument(format!(
                "sample out of [0, 2^{bit_depth}) range"
            )));
        }
        Ok(Self { width, height, bit_depth, samples })
    }

    pub fn filled(width: usize, height: usize, bit_depth: u8, value: i32) -> Self {
        Self { width, height, bit_depth, samples: vec![value; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: i32) {
        self.samples[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[i32] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn max_value(&self) -> i32 {
        (1 << self.bit_depth) - 1
    }

    /// Pads the plane out to a multiple of `align` in both dimensions by
    /// replicating edge samples.
    pub fn pad_to_multiple(&self, align: usize) -> PixelPlane {
        let pw = self.width.div_ceil(align) * align;
        let ph = self.height.div_ceil(align) * align;
        if pw == self.width && ph == self.height {
            return self.clone();
        }
        let mut samples = vec![0; pw * ph];
        for y in 0..ph {
            let sy = y.min(self.height - 1);
            for x in 0..pw {
                let sx = x.min(self.width - 1);
                samples[y * pw + x] = self.get(sx, sy);
            }
        }
        PixelPlane { width: pw, height: ph, bit_depth: self.bit_depth, samples }
    }

    /// Returns the top-left `width`×`height` sub-plane.
    pub fn crop(&self, width: usize, height: usize) -> PixelPlane {
        assert!(width <= self.width && height <= self.height);
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            samples.extend_from_slice(&self.samples[y * self.width..y * self.width + width]);
        }
        PixelPlane { width, height, bit_depth: self.bit_depth, samples }
    }
}
