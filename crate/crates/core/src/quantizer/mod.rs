//! Acoustic-token quantizers and codebook analytics.

mod codebook;
mod fsq;
mod ste;
pub mod toy;
mod utilization;

pub use codebook::{Codebook, CODEBOOK_MAGIC, CODEBOOK_VERSION, EMA_DECAY, EMA_EPSILON};
pub use fsq::{FsqCode, FsqConfig, FSQ_SCHEME};
pub use ste::{straight_through, StraightThrough};
pub use toy::{run_toy_experiment, ToyConfig, ToyResult, ToyVaeModel};
pub use utilization::{ReportSummary, UtilizationReport, REPORT_FRACTIONS};

/// Nearest-code assignment; see [`Codebook::quantize`].
pub fn vq_quantize<'a>(z: &[f64], cb: &'a Codebook) -> crate::Result<(usize, &'a [f64])> {
    cb.quantize(z)
}

/// See [`FsqConfig::quantize`].
pub fn fsq_quantize(z: &[f64], cfg: &FsqConfig) -> crate::Result<FsqCode> {
    cfg.quantize(z)
}
