//! Finite scalar quantization with an implicit mixed-radix codebook.
//!
//! Per dimension with `L` levels: bound with `tanh`, then
//! `code = round((L − 1)·(b + 1)/2)` with ties away from zero, and
//! `value = 2·code/(L − 1) − 1`. The flat index is the mixed-radix number
//! of the codes with the last dimension varying fastest.

use crate::error::{Error, Result};

/// Human-readable form of the scheme, written into persisted code files.
pub const FSQ_SCHEME: &str = "fsq-tanh-v1: b=tanh(z); code=round_half_away((L-1)*(b+1)/2); \
value=2*code/(L-1)-1; index=sum(code_i*prod(L_j, j>i))";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsqConfig {
    levels: Vec<u32>,
    code_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsqCode {
    pub index: u64,
    pub values: Vec<f64>,
    pub codes: Vec<u32>,
}

impl FsqConfig {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("fsq needs at least one dimension".into()));
        }
        if let Some(l) = levels.iter().find(|l| **l < 2) {
            return Err(Error::Config(format!("fsq level count {l} is below 2")));
        }
        let code_count = levels
            .iter()
            .try_fold(1u64, |acc, l| acc.checked_mul(u64::from(*l)))
            .ok_or_else(|| Error::Config("fsq code count overflows u64".into()))?;
        Ok(Self { levels, code_count })
    }

    /// `[8, 8, 8, 6, 5]`, the codec configuration.
    pub fn codec_default() -> Self {
        Self::new(vec![8, 8, 8, 6, 5]).expect("valid levels")
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn code_count(&self) -> u64 {
        self.code_count
    }

    pub fn quantize(&self, z: &[f64]) -> Result<FsqCode> {
        self.check_dim(z.len())?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fsq input".into()));
        }
        let bounded: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
        Ok(self.quantize_bounded_unchecked(&bounded))
    }

    /// Quantizes values already in `[−1, 1]`, skipping the `tanh` bound.
    /// Dequantized values are fixed points of this map.
    pub fn quantize_bounded(&self, b: &[f64]) -> Result<FsqCode> {
        self.check_dim(b.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fsq input".into()));
        }
        Ok(self.quantize_bounded_unchecked(b))
    }

    fn quantize_bounded_unchecked(&self, b: &[f64]) -> FsqCode {
        let codes: Vec<u32> = b
            .iter()
            .zip(&self.levels)
            .map(|(v, l)| {
                let top = f64::from(l - 1);
                ((top * (v.clamp(-1.0, 1.0) + 1.0) / 2.0).round()).clamp(0.0, top) as u32
            })
            .collect();
        let values = self.dequantize(&codes);
        let index = self.index_of(&codes).expect("codes in range");
        FsqCode { index, values, codes }
    }

    pub fn dequantize(&self, codes: &[u32]) -> Vec<f64> {
        codes
            .iter()
            .zip(&self.levels)
            .map(|(c, l)| 2.0 * f64::from(*c) / f64::from(l - 1) - 1.0)
            .collect()
    }

    pub fn index_of(&self, codes: &[u32]) -> Result<u64> {
        self.check_dim(codes.len())?;
        let mut index = 0u64;
        for (position, (c, l)) in codes.iter().zip(&self.levels).enumerate() {
            if c >= l {
                return Err(Error::OutOfRange {
                    position,
                    id: u64::from(*c),
                    limit: u64::from(*l),
                });
            }
            index = index * u64::from(*l) + u64::from(*c);
        }
        Ok(index)
    }

    pub fn codes_of(&self, index: u64) -> Result<Vec<u32>> {
        if index >= self.code_count {
            return Err(Error::OutOfRange {
                position: 0,
                id: index,
                limit: self.code_count,
            });
        }
        let mut rest = index;
        let mut codes = vec![0u32; self.levels.len()];
        for (c, l) in codes.iter_mut().zip(&self.levels).rev() {
            *c = (rest % u64::from(*l)) as u32;
            rest /= u64::from(*l);
        }
        Ok(codes)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.levels.len() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.levels.len(),
                got,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent mixed-radix oracle: enumerate codes in odometer order.
    fn odometer(levels: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for l in levels {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..*l).map(move |c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn codec_levels_have_15360_codes() {
        assert_eq!(FsqConfig::codec_default().code_count(), 8 * 8 * 8 * 6 * 5);
        assert_eq!(FsqConfig::codec_default().code_count(), 15_360);
    }

    #[test]
    fn zero_maps_to_midpoints() {
        let cfg = FsqConfig::codec_default();
        let q = cfg.quantize(&[0.0; 5]).unwrap();
        assert_eq!(q.codes, [4, 4, 4, 3, 2]);
        let oracle = odometer(cfg.levels())
            .iter()
            .position(|c| c == &[4, 4, 4, 3, 2])
            .unwrap() as u64;
        assert_eq!(q.index, oracle);
        assert_eq!(q.index, 4 * 1920 + 4 * 240 + 4 * 30 + 3 * 5 + 2);
    }

    #[test]
    fn extremes_and_saturation() {
        let cfg = FsqConfig::codec_default();
        assert_eq!(cfg.index_of(&[0; 5]).unwrap(), 0);
        assert_eq!(cfg.index_of(&[7, 7, 7, 5, 4]).unwrap(), 15_359);
        let q = cfg.quantize(&[10.0, 12.0, 50.0, 10.0, 1e9]).unwrap();
        assert_eq!(q.codes, [7, 7, 7, 5, 4]);
        assert_eq!(q.values, [1.0; 5]);
        let q = cfg.quantize(&[-30.0; 5]).unwrap();
        assert_eq!(q.index, 0);
    }

    #[test]
    fn odometer_agrees_with_index_of() {
        let cfg = FsqConfig::new(vec![3, 2, 4]).unwrap();
        for (i, codes) in odometer(cfg.levels()).iter().enumerate() {
            assert_eq!(cfg.index_of(codes).unwrap(), i as u64);
            assert_eq!(&cfg.codes_of(i as u64).unwrap(), codes);
        }
    }

    #[test]
    fn errors() {
        let cfg = FsqConfig::codec_default();
        assert!(matches!(cfg.quantize(&[0.0; 4]), Err(Error::Dimension { expected: 5, got: 4 })));
        assert!(cfg.codes_of(15_360).is_err());
        assert!(cfg.index_of(&[8, 0, 0, 0, 0]).is_err());
        assert!(FsqConfig::new(vec![]).is_err());
        assert!(FsqConfig::new(vec![4, 1]).is_err());
    }

    #[test]
    fn bounded_quantizer_is_idempotent_on_its_grid() {
        let cfg = FsqConfig::codec_default();
        for index in 0..cfg.code_count() {
            let codes = cfg.codes_of(index).unwrap();
            let v = cfg.dequantize(&codes);
            assert_eq!(cfg.quantize_bounded(&v).unwrap().codes, codes);
        }
    }
}
