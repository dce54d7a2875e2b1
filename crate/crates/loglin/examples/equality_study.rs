//! Conditional (pseudo-likelihood) and relaxed marginal local estimates agree
//! whenever the buffer of the neighbourhood is its whole outer shell.
//!
//! cargo run --release --example equality_study

use loglin::experiments::{run_equality_study, EqualityConfig};

fn main() -> loglin::Result<()> {
    let r = run_equality_study(&EqualityConfig::default(), true)?;
    println!("max |ps - m1| over all vertices:           {:.2e}", r.max_discrepancy_hop1);
    println!("max |ps2 - m2| where buffer = two-hop shell: {:.2e}", r.max_discrepancy_hop2_hypothesis);
    println!("vertices where the buffer is smaller: {:?}", r.hypothesis_fails);
    for v in [25, 39] {
        for row in r.rows.iter().filter(|x| x.vertex == v) {
            println!("vertex {v}, hop {} (discrepancy {:.2e}):", row.hop, row.max_discrepancy);
            for p in &row.parameters {
                println!("  {:<14} conditional {:>8.4}  marginal {:>8.4}", p.label, p.conditional, p.marginal);
            }
        }
    }
    println!("{:.1}s", r.seconds.unwrap_or_default());
    Ok(())
}
