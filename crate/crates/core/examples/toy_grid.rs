//! Runs the VQ vs FSQ utilization grid and prints one row per cell.

use std::time::Instant;

use ttskit::quantizer::toy::{run_toy_experiment, ToyConfig, GRID_CLUSTERS, GRID_SAMPLES};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    println!("{:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>7}", "clusters", "samples", "vq", "fsq", "vq_top50", "fsq_top50", "secs");
    for &clusters in &GRID_CLUSTERS {
        for &samples in &GRID_SAMPLES {
            let t = Instant::now();
            let vq = run_toy_experiment(&ToyConfig::vq(clusters, samples, seed))?;
            let fsq = run_toy_experiment(&ToyConfig::fsq(clusters, samples, seed))?;
            println!(
                "{:>8} {:>8} {:>8.4} {:>8.4} {:>10.4} {:>10.4} {:>7.2}  recon vq {:.4} fsq {:.4}",
                clusters,
                samples,
                vq.report.utilization(),
                fsq.report.utilization(),
                vq.report.topk_mass(0.5),
                fsq.report.topk_mass(0.5),
                t.elapsed().as_secs_f64(),
                vq.eval_reconstruction,
                fsq.eval_reconstruction,
            );
        }
    }
    Ok(())
}
