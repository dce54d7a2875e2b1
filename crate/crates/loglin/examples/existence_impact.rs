//! What happens to the five estimators when the data lie on a face of the cone.
//!
//! cargo run --release --example existence_impact

use loglin::experiments::{run_existence_study, ExistenceConfig};

fn main() -> loglin::Result<()> {
    let cfg = ExistenceConfig { replicates: 4, ..Default::default() };
    let r = run_existence_study(&cfg, true)?;
    println!("{:>4} {:<9} {:<7} {:>12} {:>9}", "N", "regime", "est.", "median rMSE", "poisoned");
    for row in &r.rows {
        println!(
            "{:>4} {:<9} {:<7} {:>12.4} {:>6}/{}",
            row.n, row.regime, row.estimator.name(), row.median_relative_mse, row.poisoned_replicates, row.replicates
        );
    }
    println!("on-face error above off-face everywhere: {}", r.ordering_holds);
    println!("{:.1}s", r.seconds.unwrap_or_default());
    Ok(())
}
