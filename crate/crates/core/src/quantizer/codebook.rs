use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const CODEBOOK_MAGIC: &[u8; 5] = b"IDXCB";
pub const CODEBOOK_VERSION: u32 = 1;

/// Defaults of the EMA codebook learning rule.
pub const EMA_DECAY: f64 = 0.99;
pub const EMA_EPSILON: f64 = 1e-5;

/// `K` code vectors of width `D` with EMA usage statistics.
///
/// Invariant maintained by every constructor and update: each vector equals
/// its running sum divided by its Laplace-smoothed running count.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    k: usize,
    d: usize,
    vectors: Vec<f64>,
    ema_counts: Vec<f64>,
    ema_sums: Vec<f64>,
}

impl Codebook {
    /// Codebook with unit usage mass on every code.
    pub fn new(k: usize, d: usize, vectors: Vec<f64>) -> Result<Self> {
        Self::with_counts(k, d, vectors, vec![1.0; k])
    }

    pub fn with_counts(k: usize, d: usize, vectors: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::Config(format!("codebook shape {k}x{d} must be non-empty")));
        }
        if vectors.len() != k * d {
            return Err(Error::Dimension {
                expected: k * d,
                got: vectors.len(),
            });
        }
        if counts.len() != k {
            return Err(Error::Dimension {
                expected: k,
                got: counts.len(),
            });
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("codebook vectors".into()));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Config("ema counts must be finite and non-negative".into()));
        }
        // All-zero mass has no smoothed denominator; restart from unit mass.
        let counts = if counts.iter().sum::<f64>() > 0.0 { counts } else { vec![1.0; k] };
        let smoothed = smooth(&counts, EMA_EPSILON);
        let mut ema_sums = vectors.clone();
        for (row, s) in ema_sums.chunks_mut(d).zip(&smoothed) {
            row.iter_mut().for_each(|v| *v *= s);
        }
        Ok(Self {
            k,
            d,
            vectors,
            ema_counts: counts,
            ema_sums,
        })
    }

    /// Entries drawn i.i.d. from `N(0, scale²)`.
    pub fn random<R: Rng + ?Sized>(k: usize, d: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let vectors = (0..k * d)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(k, d, vectors)
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn code(&self, index: usize) -> &[f64] {
        &self.vectors[index * self.d..(index + 1) * self.d]
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn ema_counts(&self) -> &[f64] {
        &self.ema_counts
    }

    /// Nearest code by squared Euclidean distance; ties go to the lowest
    /// index.
    pub fn quantize(&self, z: &[f64]) -> Result<(usize, &[f64])> {
        if z.len() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vq input".into()));
        }
        let index = self.nearest(z);
        Ok((index, self.code(index)))
    }

    pub(crate) fn nearest(&self, z: &[f64]) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, code) in self.vectors.chunks_exact(self.d).enumerate() {
            let dist: f64 = code.iter().zip(z).map(|(c, x)| (c - x) * (c - x)).sum();
            if dist < best_dist {
                best_dist = dist;
                best = i;
            }
        }
        best
    }

    /// One EMA step over `(z, assigned index)` pairs.
    ///
    /// `counts ← γ·counts + (1−γ)·batch_counts`, `sums ← γ·sums + (1−γ)·batch_sums`,
    /// then every vector is recomputed as `sums / smoothed(counts)` with
    /// `smoothed_k = (counts_k + ε) / (N + K·ε) · N`.
    pub fn update_ema(&mut self, batch: &[(&[f64], usize)], gamma: f64, epsilon: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("ema decay {gamma} outside [0, 1]")));
        }
        if epsilon <= 0.0 {
            return Err(Error::Config(format!("laplace epsilon {epsilon} must be positive")));
        }
        let mut batch_counts = vec![0.0; self.k];
        let mut batch_sums = vec![0.0; self.k * self.d];
        for (z, index) in batch {
            if *index >= self.k {
                return Err(Error::OutOfRange {
                    position: 0,
                    id: *index as u64,
                    limit: self.k as u64,
                });
            }
            if z.len() != self.d {
                return Err(Error::Dimension {
                    expected: self.d,
                    got: z.len(),
                });
            }
            batch_counts[*index] += 1.0;
            let row = &mut batch_sums[index * self.d..(index + 1) * self.d];
            row.iter_mut().zip(z.iter()).for_each(|(s, x)| *s += x);
        }
        for (c, b) in self.ema_counts.iter_mut().zip(&batch_counts) {
            *c = gamma * *c + (1.0 - gamma) * b;
        }
        for (s, b) in self.ema_sums.iter_mut().zip(&batch_sums) {
            *s = gamma * *s + (1.0 - gamma) * b;
        }
        let smoothed = smooth(&self.ema_counts, epsilon);
        for ((row, sums), n) in self
            .vectors
            .chunks_mut(self.d)
            .zip(self.ema_sums.chunks(self.d))
            .zip(&smoothed)
        {
            for (v, s) in row.iter_mut().zip(sums) {
                *v = if *n > 0.0 { s / n } else { *v };
            }
        }
        Ok(())
    }

    /// `IDXCB` file: magic, version, K, D (u32 LE), K·D f32 row-major, K f32 counts.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CODEBOOK_MAGIC)?;
        for v in [CODEBOOK_VERSION, self.k as u32, self.d as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in self.vectors.iter().chain(&self.ema_counts) {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != CODEBOOK_MAGIC {
            return Err(Error::Parse("not a codebook file (bad magic)".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CODEBOOK_VERSION {
            return Err(Error::Parse(format!("unsupported codebook version {version}")));
        }
        let k = read_u32(&mut r)? as usize;
        let d = read_u32(&mut r)? as usize;
        let vectors = read_f32s(&mut r, k * d)?;
        let counts = read_f32s(&mut r, k)?;
        Self::with_counts(k, d, vectors, counts)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn smooth(counts: &[f64], epsilon: f64) -> Vec<f64> {
    let n: f64 = counts.iter().sum();
    let k = counts.len() as f64;
    counts
        .iter()
        .map(|c| (c + epsilon) / (n + k * epsilon) * n)
        .collect()
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 4];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn two_codes() -> Codebook {
        Codebook::new(2, 2, vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn nearest_and_tie_break() {
        let cb = two_codes();
        assert_eq!(cb.quantize(&[0.2, 0.1]).unwrap().0, 0);
        assert_eq!(cb.quantize(&[0.5, 0.5]).unwrap().0, 0);
        assert_eq!(cb.quantize(&[0.6, 0.5]).unwrap(), (1, &[1.0, 1.0][..]));
    }

    #[test]
    fn rejects_bad_input() {
        let cb = two_codes();
        assert!(matches!(cb.quantize(&[0.0]), Err(Error::Dimension { .. })));
        assert!(matches!(cb.quantize(&[f64::NAN, 0.0]), Err(Error::NonFinite(_))));
        assert!(Codebook::new(0, 2, vec![]).is_err());
        assert!(Codebook::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn matches_exhaustive_scan() {
        let mut r = rng::substream(5, rng::QUANT_INIT);
        let cb = Codebook::random(64, 8, 1.0, &mut r).unwrap();
        for _ in 0..500 {
            let z: Vec<f64> = (0..8).map(|_| r.gen_range(-2.0..2.0)).collect();
            let mut all: Vec<(f64, usize)> = (0..64)
                .map(|k| {
                    let d: f64 = cb.code(k).iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum();
                    (d, k)
                })
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            assert_eq!(cb.quantize(&z).unwrap().0, all[0].1);
        }
    }

    #[test]
    fn ema_fixed_point() {
        let mut cb = Codebook::new(1, 2, vec![0.3, -0.7]).unwrap();
        let z = [0.3, -0.7];
        cb.update_ema(&[(&z, 0), (&z, 0)], 0.9, EMA_EPSILON).unwrap();
        assert!((cb.code(0)[0] - 0.3).abs() < 1e-12);
        assert!((cb.code(0)[1] + 0.7).abs() < 1e-12);
    }

    #[test]
    fn ema_one_step_by_hand() {
        // K=2, D=1, vectors [1, 3], counts [1, 1]; batch {0.5 -> 0, 2.5 -> 0}.
        // counts = 0.5*[1,1] + 0.5*[2,0] = [1.5, 0.5]
        // sums   = 0.5*[1,3] + 0.5*[3,0] = [2.0, 1.5]
        // N = 2, smoothed_k = (c_k + e) / (2 + 2e) * 2
        let e = 0.01;
        let mut cb = Codebook::new(2, 1, vec![1.0, 3.0]).unwrap();
        cb.update_ema(&[(&[0.5], 0), (&[2.5], 0)], 0.5, e).unwrap();
        let n0 = (1.5 + e) / (2.0 + 2.0 * e) * 2.0;
        let n1 = (0.5 + e) / (2.0 + 2.0 * e) * 2.0;
        assert!((cb.code(0)[0] - 2.0 / n0).abs() < 1e-12);
        assert!((cb.code(1)[0] - 1.5 / n1).abs() < 1e-12);
        assert_eq!(cb.ema_counts(), &[1.5, 0.5]);
    }

    #[test]
    fn ema_extremes() {
        let mut r = rng::substream(9, rng::QUANT_INIT);
        let mut cb = Codebook::random(4, 3, 1.0, &mut r).unwrap();
        let before = cb.clone();
        let z = [0.1, 0.2, 0.3];
        cb.update_ema(&[(&z, 2)], 1.0, EMA_EPSILON).unwrap();
        assert_eq!(cb.vectors(), before.vectors());

        // gamma = 0: assigned code lands on its (smoothed) batch mean
        let a = [1.0, 1.0, 1.0];
        let b = [3.0, 1.0, -1.0];
        cb.update_ema(&[(&a, 1), (&b, 1)], 0.0, 1e-9).unwrap();
        for (v, m) in cb.code(1).iter().zip([2.0, 1.0, 0.0]) {
            assert!((v - m).abs() < 1e-6, "{v} vs {m}");
        }
    }

    #[test]
    fn empty_batch_keeps_direction() {
        let mut cb = Codebook::new(2, 2, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        for _ in 0..50 {
            cb.update_ema(&[], 0.9, EMA_EPSILON).unwrap();
        }
        assert!(cb.vectors().iter().all(|v| v.is_finite()));
        let c = cb.code(0);
        assert!((c[1] / c[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn file_round_trip() {
        let cb = Codebook::with_counts(2, 3, vec![0.5, -1.0, 2.0, 0.0, 0.25, 8.0], vec![3.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        cb.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"IDXCB");
        assert_eq!(buf.len(), 5 + 12 + 4 * (6 + 2));
        let back = Codebook::read_from(&buf[..]).unwrap();
        assert_eq!(back.vectors(), cb.vectors());
        assert_eq!(back.ema_counts(), cb.ema_counts());
        assert!(Codebook::read_from(&b"IDXMT\0\0\0\0"[..]).is_err());
    }
}
