//! Nearest-code assignment and EMA codebook updates on a clustered stream,
//! followed by a utilization report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ttskit::quantizer::{Codebook, UtilizationReport, EMA_DECAY, EMA_EPSILON};

const K: usize = 64;
const D: usize = 4;

fn main() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cb = Codebook::random(K, D, 1.0, &mut rng)?;
    let centers: Vec<Vec<f64>> = (0..6).map(|_| (0..D).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let c = &centers[rng.gen_range(0..centers.len())];
        c.iter().map(|m| m + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect()
    };

    for step in 0..200 {
        let batch: Vec<Vec<f64>> = (0..64).map(|_| sample(&mut rng)).collect();
        let mut ids = Vec::with_capacity(batch.len());
        for z in &batch {
            ids.push(cb.quantize(z)?.0);
        }
        let pairs: Vec<(&[f64], usize)> = batch.iter().map(Vec::as_slice).zip(ids.iter().copied()).collect();
        cb.update_ema(&pairs, EMA_DECAY, EMA_EPSILON)?;
        if step % 50 == 0 {
            let r = UtilizationReport::from_ids(ids.iter().map(|i| *i as u64), K)?;
            println!("step {step:>3}: {} codes in use", r.codes_seen());
        }
    }

    let mut ids = Vec::new();
    for _ in 0..10_000 {
        ids.push(cb.quantize(&sample(&mut rng))?.0 as u64);
    }
    let report = UtilizationReport::from_ids(ids, K)?;
    println!("{}", serde_json::to_string_pretty(&report.summary(None))?);
    Ok(())
}
