//! Desk-scale VQ-VAE used to compare codebook utilization of VQ and FSQ.
//!
//! An affine encoder feeds the quantizer, an affine decoder reconstructs the
//! input. Gradients are derived by hand; the quantizer is crossed with the
//! straight-through estimator (through `tanh` for FSQ). The VQ codebook is
//! learned with EMA updates, never by gradient.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::codebook::{Codebook, EMA_DECAY, EMA_EPSILON};
use super::fsq::FsqConfig;
use super::ste::StraightThrough;
use super::utilization::UtilizationReport;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QuantizerSpec {
    Vq { codebook_size: usize, latent_dim: usize },
    Fsq { levels: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSpec {
    /// Isotropic Gaussian clusters with means uniform in `[−1, 1]^dim`.
    /// Cluster `k` (0-based) is drawn with weight `(k + 1)^−tail`, so a
    /// positive `tail` gives a long tail of rare modes that only large
    /// datasets cover.
    Mixture { clusters: usize, spread: f64, tail: f64 },
    /// Uniform on `[−1, 1]^dim`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub quantizer: QuantizerSpec,
    pub data: DataSpec,
    pub input_dim: usize,
    pub dataset_size: usize,
    /// Size of the held-out stream the final report is computed on.
    pub eval_samples: usize,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Commitment weight β (VQ only).
    pub commitment: f64,
    pub ema_decay: f64,
    pub ema_epsilon: f64,
    /// Standard deviation of the initial VQ codebook entries.
    pub codebook_init_scale: f64,
    /// Number of evenly spaced points at which utilization is tracked.
    pub checkpoints: usize,
    pub seed: u64,
}

pub const TOY_CODEBOOK_SIZE: usize = 512;
pub const TOY_VQ_LATENT: usize = 32;
/// 4·4·4·4·2 = 512 codes, matched to the VQ codebook.
pub const TOY_FSQ_LEVELS: [u32; 5] = [4, 4, 4, 4, 2];
pub const TOY_INPUT_DIM: usize = 16;
pub const TOY_SPREAD: f64 = 0.05;
pub const TOY_TAIL: f64 = 0.0;

impl ToyConfig {
    pub fn vq(clusters: usize, dataset_size: usize, seed: u64) -> Self {
        Self::base(
            QuantizerSpec::Vq {
                codebook_size: TOY_CODEBOOK_SIZE,
                latent_dim: TOY_VQ_LATENT,
            },
            clusters,
            dataset_size,
            seed,
        )
    }

    pub fn fsq(clusters: usize, dataset_size: usize, seed: u64) -> Self {
        Self::base(
            QuantizerSpec::Fsq {
                levels: TOY_FSQ_LEVELS.to_vec(),
            },
            clusters,
            dataset_size,
            seed,
        )
    }

    fn base(quantizer: QuantizerSpec, clusters: usize, dataset_size: usize, seed: u64) -> Self {
        Self {
            quantizer,
            data: DataSpec::Mixture {
                clusters,
                spread: TOY_SPREAD,
                tail: TOY_TAIL,
            },
            input_dim: TOY_INPUT_DIM,
            dataset_size,
            eval_samples: 20_000,
            steps: 2_000,
            batch_size: 64,
            learning_rate: 3e-3,
            commitment: 0.25,
            ema_decay: EMA_DECAY,
            ema_epsilon: EMA_EPSILON,
            codebook_init_scale: 1.0,
            checkpoints: 5,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.input_dim == 0 || self.dataset_size == 0 || self.eval_samples == 0 {
            return bad("input_dim, dataset_size and eval_samples must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if let DataSpec::Mixture { clusters: 0, .. } = self.data {
            return bad("mixture needs at least one cluster");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// Samples from the configured synthetic distribution.
pub struct DataSource {
    dim: usize,
    means: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
    spread: f64,
}

impl DataSource {
    pub fn new(spec: &DataSpec, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        match *spec {
            DataSpec::Mixture { clusters, spread, tail } => {
                let means = (0..clusters)
                    .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                let mut acc = 0.0;
                let mut cumulative: Vec<f64> = (0..clusters)
                    .map(|k| {
                        acc += ((k + 1) as f64).powf(-tail);
                        acc
                    })
                    .collect();
                cumulative.iter_mut().for_each(|c| *c /= acc);
                Self {
                    dim,
                    means,
                    cumulative,
                    spread,
                }
            }
            DataSpec::Uniform => Self {
                dim,
                means: Vec::new(),
                cumulative: Vec::new(),
                spread: 0.0,
            },
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.means.is_empty() {
            return (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
        let u: f64 = rng.gen();
        let k = self.cumulative.partition_point(|c| *c <= u).min(self.means.len() - 1);
        let mean = &self.means[k];
        mean.iter()
            .map(|m| m + self.spread * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    pub fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Quantizer {
    Vq(Codebook),
    Fsq(FsqConfig),
}

impl Quantizer {
    pub fn code_count(&self) -> usize {
        match self {
            Quantizer::Vq(cb) => cb.size(),
            Quantizer::Fsq(cfg) => cfg.code_count() as usize,
        }
    }
}

/// Affine encoder → quantizer → affine decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyVaeModel {
    input_dim: usize,
    latent_dim: usize,
    /// `latent × input`, row-major.
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    /// `input × latent`, row-major.
    pub dec_w: Vec<f64>,
    pub dec_b: Vec<f64>,
    pub quantizer: Quantizer,
    pub commitment: f64,
}

/// Per-sample quantization result captured for the gradient check: the
/// straight-through offset `q − pre` and the quantized value itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenQuantization {
    offsets: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    pub dec_w: Vec<f64>,
    pub dec_b: Vec<f64>,
}

impl Gradients {
    fn zeros(m: &ToyVaeModel) -> Self {
        Self {
            enc_w: vec![0.0; m.enc_w.len()],
            enc_b: vec![0.0; m.enc_b.len()],
            dec_w: vec![0.0; m.dec_w.len()],
            dec_b: vec![0.0; m.dec_b.len()],
        }
    }
}

struct Pass {
    /// Quantizer input: `z` for VQ, `tanh(z)` for FSQ.
    pre: Vec<f64>,
    q: Vec<f64>,
    index: usize,
    xhat: Vec<f64>,
}

impl ToyVaeModel {
    pub fn new(input_dim: usize, quantizer: Quantizer, commitment: f64, rng: &mut ChaCha8Rng) -> Self {
        let latent_dim = match &quantizer {
            Quantizer::Vq(cb) => cb.dim(),
            Quantizer::Fsq(cfg) => cfg.dim(),
        };
        let enc_scale = 1.0 / (input_dim as f64).sqrt();
        let dec_scale = 1.0 / (latent_dim as f64).sqrt();
        let mut normal = |n: usize, s: f64| -> Vec<f64> {
            (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let enc_w = normal(latent_dim * input_dim, enc_scale);
        let dec_w = normal(input_dim * latent_dim, dec_scale);
        Self {
            input_dim,
            latent_dim,
            enc_w,
            enc_b: vec![0.0; latent_dim],
            dec_w,
            dec_b: vec![0.0; input_dim],
            quantizer,
            commitment,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        affine(&self.enc_w, &self.enc_b, x)
    }

    fn decode(&self, q: &[f64]) -> Vec<f64> {
        affine(&self.dec_w, &self.dec_b, q)
    }

    /// Code id of `x`.
    pub fn tokenize(&self, x: &[f64]) -> usize {
        let z = self.encode(x);
        match &self.quantizer {
            Quantizer::Vq(cb) => cb.nearest(&z),
            Quantizer::Fsq(cfg) => {
                let b: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
                cfg.quantize_bounded(&b).expect("latent width matches levels").index as usize
            }
        }
    }

    fn pass(&self, x: &[f64]) -> Pass {
        let z = self.encode(x);
        let (pre, q, index) = match &self.quantizer {
            Quantizer::Vq(cb) => {
                let index = cb.nearest(&z);
                let q = cb.code(index).to_vec();
                (z, q, index)
            }
            Quantizer::Fsq(cfg) => {
                let b: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
                let code = cfg.quantize_bounded(&b).expect("latent width matches levels");
                (b, code.values, code.index as usize)
            }
        };
        let out = StraightThrough::forward(&pre, &q);
        let xhat = self.decode(&out);
        Pass { pre, q, index, xhat }
    }

    fn sample_loss(&self, x: &[f64], xhat: &[f64], pre: &[f64], target: &[f64]) -> f64 {
        let recon = sq_dist(xhat, x) / self.input_dim as f64;
        match self.quantizer {
            Quantizer::Vq(_) => recon + self.commitment * sq_dist(pre, target) / self.latent_dim as f64,
            Quantizer::Fsq(_) => recon,
        }
    }

    /// Mean reconstruction error (no commitment term) over `xs`.
    pub fn reconstruction_loss(&self, xs: &[Vec<f64>]) -> f64 {
        let total: f64 = xs
            .iter()
            .map(|x| sq_dist(&self.pass(x).xhat, x) / self.input_dim as f64)
            .sum();
        total / xs.len().max(1) as f64
    }

    /// Batch loss, its analytic gradient, and the `(z, code)` assignments.
    pub fn loss_grad(&self, batch: &[&[f64]]) -> (f64, Gradients, Vec<(Vec<f64>, usize)>) {
        let n = batch.len() as f64;
        let (ni, nl) = (self.input_dim, self.latent_dim);
        let mut g = Gradients::zeros(self);
        let mut loss = 0.0;
        let mut assignments = Vec::with_capacity(batch.len());
        for x in batch {
            let p = self.pass(x);
            loss += self.sample_loss(x, &p.xhat, &p.pre, &p.q);

            let g_xhat: Vec<f64> = p
                .xhat
                .iter()
                .zip(x.iter())
                .map(|(a, b)| 2.0 * (a - b) / (ni as f64 * n))
                .collect();
            for r in 0..ni {
                g.dec_b[r] += g_xhat[r];
                for c in 0..nl {
                    g.dec_w[r * nl + c] += g_xhat[r] * p.q[c];
                }
            }
            let mut g_out = vec![0.0; nl];
            for r in 0..ni {
                for c in 0..nl {
                    g_out[c] += self.dec_w[r * nl + c] * g_xhat[r];
                }
            }
            let mut g_pre = StraightThrough::backward(&g_out);
            let g_z: Vec<f64> = match self.quantizer {
                Quantizer::Vq(_) => {
                    for c in 0..nl {
                        g_pre[c] += 2.0 * self.commitment * (p.pre[c] - p.q[c]) / (nl as f64 * n);
                    }
                    g_pre
                }
                Quantizer::Fsq(_) => g_pre
                    .iter()
                    .zip(&p.pre)
                    .map(|(g, t)| g * (1.0 - t * t))
                    .collect(),
            };
            for r in 0..nl {
                g.enc_b[r] += g_z[r];
                for c in 0..ni {
                    g.enc_w[r * ni + c] += g_z[r] * x[c];
                }
            }
            if let Quantizer::Vq(_) = self.quantizer {
                assignments.push((p.pre, p.index));
            } else {
                assignments.push((Vec::new(), p.index));
            }
        }
        (loss / n, g, assignments)
    }

    /// Captures the current quantization of `batch` so it can be replayed as
    /// a constant while parameters are perturbed.
    pub fn freeze(&self, batch: &[&[f64]]) -> FrozenQuantization {
        let mut offsets = Vec::with_capacity(batch.len());
        let mut targets = Vec::with_capacity(batch.len());
        for x in batch {
            let p = self.pass(x);
            offsets.push(p.q.iter().zip(&p.pre).map(|(q, z)| q - z).collect());
            targets.push(p.q);
        }
        FrozenQuantization { offsets, targets }
    }

    /// Loss with quantization replaced by the frozen straight-through
    /// surrogate `pre + stop_gradient(q − pre)`. Its true derivative is what
    /// `loss_grad` computes analytically.
    pub fn frozen_loss(&self, batch: &[&[f64]], frozen: &FrozenQuantization) -> f64 {
        let mut loss = 0.0;
        for ((x, off), target) in batch.iter().zip(&frozen.offsets).zip(&frozen.targets) {
            let z = self.encode(x);
            let pre: Vec<f64> = match self.quantizer {
                Quantizer::Vq(_) => z,
                Quantizer::Fsq(_) => z.iter().map(|v| v.tanh()).collect(),
            };
            let out: Vec<f64> = pre.iter().zip(off).map(|(p, o)| p + o).collect();
            let xhat = self.decode(&out);
            loss += self.sample_loss(x, &xhat, &pre, target);
        }
        loss / batch.len() as f64
    }

    /// How far `x` sits from a change of code: for VQ the gap between the
    /// two nearest squared distances, for FSQ the smallest distance (in
    /// level units) of any scaled coordinate to a rounding edge.
    pub fn boundary_margin(&self, x: &[f64]) -> f64 {
        let z = self.encode(x);
        match &self.quantizer {
            Quantizer::Vq(cb) => {
                let mut d: Vec<f64> = (0..cb.size()).map(|k| sq_dist(cb.code(k), &z)).collect();
                d.sort_by(f64::total_cmp);
                d.get(1).map_or(f64::INFINITY, |second| second - d[0])
            }
            Quantizer::Fsq(cfg) => z
                .iter()
                .zip(cfg.levels())
                .map(|(v, l)| {
                    let s = f64::from(l - 1) * (v.tanh() + 1.0) / 2.0;
                    (s - s.floor() - 0.5).abs()
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn all_finite(&self) -> bool {
        let cb_ok = match &self.quantizer {
            Quantizer::Vq(cb) => cb.vectors().iter().all(|v| v.is_finite()),
            Quantizer::Fsq(_) => true,
        };
        cb_ok
            && [&self.enc_w, &self.enc_b, &self.dec_w, &self.dec_b]
                .iter()
                .all(|p| p.iter().all(|v| v.is_finite()))
    }
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    b.iter()
        .enumerate()
        .map(|(r, bias)| {
            bias + w[r * n_in..(r + 1) * n_in]
                .iter()
                .zip(x)
                .map(|(a, v)| a * v)
                .sum::<f64>()
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Adam state for one parameter tensor.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, t: i32) {
        let c1 = 1.0 - Self::B1.powi(t);
        let c2 = 1.0 - Self::B2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyResult {
    pub config: ToyConfig,
    /// Final per-code usage on the held-out stream.
    pub report: UtilizationReport,
    /// Training loss after every step.
    pub loss_curve: Vec<f64>,
    /// `(step, utilization)` on a held-out subset at each checkpoint.
    pub utilization_curve: Vec<(usize, f64)>,
    pub eval_reconstruction: f64,
    pub model: ToyVaeModel,
}

/// Builds the model and data for `config` without training.
pub fn setup(config: &ToyConfig) -> Result<(ToyVaeModel, Vec<Vec<f64>>, Vec<Vec<f64>>, ChaCha8Rng)> {
    config.validate()?;
    let mut data_rng = rng::substream(config.seed, rng::QUANT_DATA);
    let mut init_rng = rng::substream(config.seed, rng::QUANT_INIT);
    let source = DataSource::new(&config.data, config.input_dim, &mut data_rng);
    let train = source.draw(config.dataset_size, &mut data_rng);
    let held_out = source.draw(config.eval_samples, &mut data_rng);
    let quantizer = match &config.quantizer {
        QuantizerSpec::Vq {
            codebook_size,
            latent_dim,
        } => Quantizer::Vq(Codebook::random(
            *codebook_size,
            *latent_dim,
            config.codebook_init_scale,
            &mut init_rng,
        )?),
        QuantizerSpec::Fsq { levels } => Quantizer::Fsq(FsqConfig::new(levels.clone())?),
    };
    let model = ToyVaeModel::new(config.input_dim, quantizer, config.commitment, &mut init_rng);
    Ok((model, train, held_out, data_rng))
}

/// Trains the toy model and reports held-out codebook usage.
pub fn run_toy_experiment(config: &ToyConfig) -> Result<ToyResult> {
    let (mut model, train, held_out, mut batch_rng) = setup(config)?;
    let mut opt = [
        Adam::new(model.enc_w.len()),
        Adam::new(model.enc_b.len()),
        Adam::new(model.dec_w.len()),
        Adam::new(model.dec_b.len()),
    ];
    let probe = &held_out[..held_out.len().min(5_000)];
    let checkpoint_every = if config.checkpoints == 0 {
        usize::MAX
    } else {
        (config.steps / config.checkpoints).max(1)
    };
    let mut loss_curve = Vec::with_capacity(config.steps);
    let mut utilization_curve = Vec::new();
    for step in 0..config.steps {
        let batch: Vec<&[f64]> = (0..config.batch_size)
            .map(|_| train[batch_rng.gen_range(0..train.len())].as_slice())
            .collect();
        let (loss, grads, assignments) = model.loss_grad(&batch);
        if !loss.is_finite() {
            return Err(Error::Divergence { step });
        }
        let t = step as i32 + 1;
        let lr = config.learning_rate;
        opt[0].step(&mut model.enc_w, &grads.enc_w, lr, t);
        opt[1].step(&mut model.enc_b, &grads.enc_b, lr, t);
        opt[2].step(&mut model.dec_w, &grads.dec_w, lr, t);
        opt[3].step(&mut model.dec_b, &grads.dec_b, lr, t);
        if let Quantizer::Vq(cb) = &mut model.quantizer {
            let pairs: Vec<(&[f64], usize)> = assignments.iter().map(|(z, i)| (z.as_slice(), *i)).collect();
            cb.update_ema(&pairs, config.ema_decay, config.ema_epsilon)?;
        }
        if !model.all_finite() {
            return Err(Error::Divergence { step });
        }
        loss_curve.push(loss);
        if (step + 1) % checkpoint_every == 0 {
            let ids = probe.iter().map(|x| model.tokenize(x) as u64);
            let r = UtilizationReport::from_ids(ids, model.quantizer.code_count())?;
            utilization_curve.push((step + 1, r.utilization()));
        }
    }
    let ids = held_out.iter().map(|x| model.tokenize(x) as u64);
    let report = UtilizationReport::from_ids(ids, model.quantizer.code_count())?;
    let eval_reconstruction = model.reconstruction_loss(&held_out);
    Ok(ToyResult {
        config: config.clone(),
        report,
        loss_curve,
        utilization_curve,
        eval_reconstruction,
        model,
    })
}

/// Cluster counts and dataset sizes of the default comparison grid.
pub const GRID_CLUSTERS: [usize; 3] = [8, 64, 512];
pub const GRID_SAMPLES: [usize; 2] = [1_000, 100_000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub clusters: usize,
    pub samples: usize,
    pub vq_utilization: f64,
    pub fsq_utilization: f64,
    pub vq_top_half_mass: f64,
    pub fsq_top_half_mass: f64,
}

/// Runs VQ and FSQ on every cell of the default grid with one seed.
pub fn run_default_grid(seed: u64) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    for &clusters in &GRID_CLUSTERS {
        for &samples in &GRID_SAMPLES {
            let vq = run_toy_experiment(&ToyConfig::vq(clusters, samples, seed))?;
            let fsq = run_toy_experiment(&ToyConfig::fsq(clusters, samples, seed))?;
            cells.push(GridCell {
                clusters,
                samples,
                vq_utilization: vq.report.utilization(),
                fsq_utilization: fsq.report.utilization(),
                vq_top_half_mass: vq.report.topk_mass(0.5),
                fsq_top_half_mass: fsq.report.topk_mass(0.5),
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_data_covers_fsq_grid() {
        // Uniform data already inside [−1, 1] hits every level of every axis.
        let cfg = FsqConfig::new(vec![4; 5]).unwrap();
        let mut rng = rng::substream(11, rng::QUANT_DATA);
        let source = DataSource::new(&DataSpec::Uniform, 5, &mut rng);
        let ids = source
            .draw(100_000, &mut rng)
            .iter()
            .map(|x| cfg.quantize_bounded(x).unwrap().index)
            .collect::<Vec<_>>();
        let r = UtilizationReport::from_ids(ids, 1024).unwrap();
        assert!(r.utilization() >= 0.99, "{}", r.utilization());
    }

    #[test]
    fn vq_collapses_on_few_tight_clusters() {
        let res = run_toy_experiment(&ToyConfig::vq(8, 10_000, 0)).unwrap();
        assert_eq!(res.report.code_count(), 512);
        assert!(res.report.utilization() <= 0.25, "{}", res.report.utilization());
        assert_eq!(res.loss_curve.len(), 2_000);
        assert_eq!(res.utilization_curve.len(), 5);
    }

    #[test]
    fn same_seed_same_report() {
        let mut cfg = ToyConfig::fsq(64, 2_000, 5);
        cfg.steps = 300;
        let a = run_toy_experiment(&cfg).unwrap();
        let b = run_toy_experiment(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        let json = |r: &ToyResult| serde_json::to_string(&r.report.summary(None)).unwrap();
        assert_eq!(json(&a), json(&b));
        assert_eq!(a.loss_curve.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.loss_curve.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        cfg.seed = 6;
        assert_ne!(run_toy_experiment(&cfg).unwrap().loss_curve, a.loss_curve);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ToyConfig::vq(8, 100, 0);
        cfg.batch_size = 0;
        assert!(run_toy_experiment(&cfg).is_err());
        let mut cfg = ToyConfig::fsq(0, 100, 0);
        cfg.steps = 1;
        assert!(run_toy_experiment(&cfg).is_err());
    }
}
