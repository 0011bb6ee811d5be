use super::matrix::Matrix;
use crate::error::{Error, Result};

/// `T × H` latent frames at `rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSequence {
    pub frames: Matrix,
    pub rate: u32,
}

impl LatentSequence {
    pub fn new(frames: Matrix, rate: u32) -> Result<Self> {
        if !frames.is_finite() {
            return Err(Error::NonFinite("latent frames".into()));
        }
        Ok(Self { frames, rate })
    }

    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }
}

/// Upsamples by an integer `factor` with linear interpolation between
/// consecutive frames; the last frame is held for its whole segment.
///
/// Output frame `factor·i` is input frame `i`, bit for bit.
pub fn interpolate_latents(seq: &LatentSequence, factor: usize) -> Result<LatentSequence> {
    if seq.is_empty() {
        return Err(Error::Empty("latent sequence"));
    }
    if factor == 0 {
        return Err(Error::Config("interpolation factor must be at least 1".into()));
    }
    let t = seq.frames.rows();
    let h = seq.frames.cols();
    let mut out = Matrix::zeros(t * factor, h);
    for i in 0..t {
        let cur = seq.frames.row(i);
        let next = seq.frames.row((i + 1).min(t - 1));
        for j in 0..factor {
            let row = out.row_mut(i * factor + j);
            if j == 0 || i + 1 == t {
                row.copy_from_slice(cur);
                continue;
            }
            let w = j as f64 / factor as f64;
            for ((o, a), b) in row.iter_mut().zip(cur).zip(next) {
                *o = (1.0 - w) * a + w * b;
            }
        }
    }
    LatentSequence::new(out, seq.rate * factor as u32)
}
