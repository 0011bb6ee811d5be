use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Audio, token and vocoder-latent rates of the codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub sample_rate: u32,
    pub token_rate: u32,
    pub latent_rate_out: u32,
}

impl FrameSpec {
    /// 24 kHz audio, 25 Hz tokens, 100 Hz vocoder input.
    pub const CODEC: FrameSpec = FrameSpec {
        sample_rate: 24_000,
        token_rate: 25,
        latent_rate_out: 100,
    };

    pub fn new(sample_rate: u32, token_rate: u32, latent_rate_out: u32) -> Result<Self> {
        if sample_rate == 0 || token_rate == 0 || latent_rate_out == 0 {
            return Err(Error::Config("rates must be positive".into()));
        }
        if sample_rate % token_rate != 0 {
            return Err(Error::Config(format!(
                "sample rate {sample_rate} is not a multiple of token rate {token_rate}"
            )));
        }
        if latent_rate_out % token_rate != 0 {
            return Err(Error::Config(format!(
                "latent rate {latent_rate_out} is not a multiple of token rate {token_rate}"
            )));
        }
        Ok(Self {
            sample_rate,
            token_rate,
            latent_rate_out,
        })
    }

    pub fn samples_per_token(&self) -> usize {
        (self.sample_rate / self.token_rate) as usize
    }

    pub fn upsample_factor(&self) -> usize {
        (self.latent_rate_out / self.token_rate) as usize
    }

    /// Half-open sample span `[start, end)` covered by token `index`.
    pub fn token_window(&self, index: usize) -> (usize, usize) {
        let hop = self.samples_per_token();
        (index * hop, (index + 1) * hop)
    }

    /// Tokens needed to cover `samples` audio samples.
    pub fn token_count(&self, samples: usize) -> usize {
        samples.div_ceil(self.samples_per_token())
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self::CODEC
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_arithmetic() {
        let s = FrameSpec::CODEC;
        assert_eq!(s.samples_per_token(), 960);
        assert_eq!(s.upsample_factor(), 4);
        assert_eq!(s.token_window(0), (0, 960));
        assert_eq!(s.token_window(25), (24_000, 24_960));
        assert_eq!(s.token_count(48_000), 50);
        assert_eq!(s.token_count(48_001), 51);
    }

    #[test]
    fn sixteen_khz() {
        let s = FrameSpec::new(16_000, 25, 100).unwrap();
        assert_eq!(s.token_window(0), (0, 640));
    }

    #[test]
    fn rejects_non_divisible_rates() {
        assert!(FrameSpec::new(22_050, 40, 120).is_err());
        assert!(FrameSpec::new(24_000, 25, 110).is_err());
        assert!(FrameSpec::new(24_000, 0, 100).is_err());
    }
}
