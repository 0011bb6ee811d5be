use super::frame::ConditioningLatents;
use crate::error::{Error, Result};
use crate::signal::Matrix;

pub const DEFAULT_LATENT_SLOTS: usize = 32;
pub const DEFAULT_SUBSAMPLE: usize = 2;

/// One reference recording as a `T × H` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAudio {
    pub id: String,
    pub frames: Matrix,
}

/// Maps subsampled reference frames to a fixed number of latent slots.
/// Implementations must be deterministic.
pub trait ReferenceEncoder {
    fn slots(&self) -> usize;

    /// `frames` is `T' × H` with `T' ≥ 1`; returns `slots() × H'`.
    fn encode(&self, frames: &Matrix) -> Result<Matrix>;
}

/// Splits the time axis into `slots` contiguous stretches and averages
/// each. With fewer frames than slots, stretches repeat frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanPoolEncoder {
    pub slots: usize,
}

impl Default for MeanPoolEncoder {
    fn default() -> Self {
        Self {
            slots: DEFAULT_LATENT_SLOTS,
        }
    }
}

impl ReferenceEncoder for MeanPoolEncoder {
    fn slots(&self) -> usize {
        self.slots
    }

    fn encode(&self, frames: &Matrix) -> Result<Matrix> {
        let t = frames.rows();
        if t == 0 {
            return Err(Error::Empty("reference frames"));
        }
        let m = self.slots;
        let mut out = Matrix::zeros(m, frames.cols());
        for s in 0..m {
            let start = (s * t / m).min(t - 1);
            let end = ((s + 1) * t / m).max(start + 1);
            let row = out.row_mut(s);
            for f in start..end {
                for (o, v) in row.iter_mut().zip(frames.row(f)) {
                    *o += v;
                }
            }
            let n = (end - start) as f64;
            row.iter_mut().for_each(|o| *o /= n);
        }
        Ok(out)
    }
}

/// Keeps every `factor`-th frame starting at 0.
pub fn subsample(frames: &Matrix, factor: usize) -> Result<Matrix> {
    if factor == 0 {
        return Err(Error::Config("subsample factor must be at least 1".into()));
    }
    let rows: Vec<Vec<f64>> = (0..frames.rows())
        .step_by(factor)
        .map(|r| frames.row(r).to_vec())
        .collect();
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, frames.cols()));
    }
    Matrix::from_rows(&rows)
}

/// Subsamples and encodes each reference, then averages the encodings
/// element-wise. Encodings are summed in a canonical order so the result
/// does not depend on the order of `refs`.
pub fn aggregate_references(
    refs: &[ReferenceAudio],
    encoder: &dyn ReferenceEncoder,
    factor: usize,
) -> Result<ConditioningLatents> {
    if refs.is_empty() {
        return Err(Error::Empty("reference list"));
    }
    let mut encoded = Vec::with_capacity(refs.len());
    for r in refs {
        if !r.frames.is_finite() {
            return Err(Error::NonFinite(format!("reference `{}`", r.id)));
        }
        let enc = encoder.encode(&subsample(&r.frames, factor)?)?;
        if let Some(first) = encoded.first() {
            let first: &Matrix = first;
            if (first.rows(), first.cols()) != (enc.rows(), enc.cols()) {
                return Err(Error::Dimension {
                    expected: first.cols(),
                    got: enc.cols(),
                });
            }
        }
        encoded.push(enc);
    }
    encoded.sort_by(|a, b| {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (rows, cols) = (encoded[0].rows(), encoded[0].cols());
    let mut sum = vec![0.0; rows * cols];
    for e in &encoded {
        for (s, v) in sum.iter_mut().zip(e.data()) {
            *s += v;
        }
    }
    let n = encoded.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    ConditioningLatents::new(
        Matrix::new(rows, cols, sum)?,
        refs.iter().map(|r| r.id.clone()).collect(),
    )
}
