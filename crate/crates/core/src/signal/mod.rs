//! Frame-rate arithmetic, latent interpolation, mel extraction and the
//! binary matrix format.

mod frames;
mod interp;
mod matrix;
mod mel;
mod wav;

pub use frames::FrameSpec;
pub use interp::{interpolate_latents, LatentSequence};
pub use matrix::{
    load_matrix, read_matrix, save_matrix, write_matrix, Matrix, MATRIX_MAGIC, MATRIX_VERSION,
};
pub use mel::{
    hz_to_mel, mel_centers, mel_edges, mel_extract, mel_to_hz, MelExtractor, MelOutput,
    DEFAULT_MEL_BINS, LOG_FLOOR, WINDOW_HOPS,
};
pub use wav::{read_wav, write_wav};

/// Sample span `[start, end)` of token `index`.
pub fn token_window(index: usize, spec: &FrameSpec) -> (usize, usize) {
    spec.token_window(index)
}
