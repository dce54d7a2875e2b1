//! Error of the composite estimator as the sample size grows.
//!
//! cargo run --release --example rate_study

use loglin::experiments::{run_rate_study, RateConfig};

fn main() -> loglin::Result<()> {
    let r = run_rate_study(&RateConfig::default(), true)?;
    for p in &r.points {
        println!("N = {:<5} median ||θ̂ - θ*|| = {:.4}", p.n, p.median_error);
    }
    println!("log-log slope {:.3} (expected about -0.5)", r.slope);
    println!("successive ratios {:?}", r.successive_ratios);
    println!("sum d_v / |J| = {} / {} = {}", r.sum_d_v, r.j_len, r.efficiency_ratio);
    Ok(())
}
