//! Frame arithmetic, a log-mel spectrogram of a synthetic tone read back
//! from WAV, and 25 → 100 Hz latent interpolation.

use ttskit::signal::{
    interpolate_latents, mel_centers, mel_extract, read_wav, write_wav, FrameSpec, LatentSequence, Matrix,
    DEFAULT_MEL_BINS,
};

fn main() -> anyhow::Result<()> {
    let spec = FrameSpec::CODEC;
    println!(
        "{} Hz audio, {} Hz tokens: {} samples per token, upsample x{}",
        spec.sample_rate,
        spec.token_rate,
        spec.samples_per_token(),
        spec.upsample_factor()
    );
    for i in [0, 1, 24] {
        let (a, b) = spec.token_window(i);
        println!("token {i:>2}: samples [{a}, {b})");
    }

    let tone: Vec<f64> = (0..spec.sample_rate as usize)
        .map(|n| 0.4 * (2.0 * std::f64::consts::PI * 440.0 * n as f64 / spec.sample_rate as f64).sin())
        .collect();
    let wav = std::env::temp_dir().join("ttskit-example-tone.wav");
    write_wav(&wav, &tone, spec.sample_rate)?;
    let audio = read_wav(&wav, spec.sample_rate)?;
    let mel = mel_extract(&audio, spec, DEFAULT_MEL_BINS)?;
    let middle = mel.frames.row(mel.frames.rows() / 2);
    let peak = (0..middle.len()).max_by(|a, b| middle[*a].total_cmp(&middle[*b])).unwrap_or(0);
    println!(
        "mel: {} frames x {} bins, peak bin {peak} (center {:.0} Hz), {} values clamped",
        mel.frames.rows(),
        mel.frames.cols(),
        mel_centers(spec.sample_rate, DEFAULT_MEL_BINS)[peak],
        mel.clamped
    );

    let latents = Matrix::from_rows(&[vec![0.0, 1.0], vec![4.0, -1.0], vec![8.0, 0.0]])?;
    let up = interpolate_latents(&LatentSequence::new(latents, spec.token_rate)?, spec.upsample_factor())?;
    println!("latents at {} Hz:", up.rate);
    for row in up.frames.iter_rows() {
        println!("  {row:?}");
    }
    Ok(())
}
