//! Exact and Gibbs sampling, datasets on a face, and the samples CSV format.
//!
//! cargo run --release --example sampling

use loglin::data::sufficient_statistics;
use loglin::io::samples_to_csv;
use loglin::model::Model;
use loglin::param::mean_statistic;
use loglin::sampler::{make_face_dataset, sample_exact, sample_gibbs, FaceSpec, SamplerConfig};

fn main() -> loglin::Result<()> {
    let m = Model::lattice(2, 2)?;
    let theta = vec![0.5, -0.5, 0.2, 0.0, 1.0, -1.0, 0.3, 0.6];
    let n = 20000;
    let exact = sample_exact(&m, &theta, &SamplerConfig::exact(n, 1))?;
    let gibbs = sample_gibbs(&m, &theta, &SamplerConfig::gibbs(n, 1))?;
    let mu = mean_statistic(&theta, &m)?;
    let (te, tg) = (sufficient_statistics(&exact, &m)?, sufficient_statistics(&gibbs, &m)?);
    println!("{:<12} {:>8} {:>8} {:>8}", "term", "E[f]", "exact", "gibbs");
    for j in 0..m.j_len() {
        println!(
            "{:<12} {:>8.4} {:>8.4} {:>8.4}",
            m.j_label(j),
            mu[j],
            te.t[j] as f64 / n as f64,
            tg.t[j] as f64 / n as f64
        );
    }

    // no observation with X1 = 1 and X2 = 1: the data sit on a proper face
    let spec = FaceSpec { forbid: vec![vec![(0, 1), (1, 1)]] };
    let d = make_face_dataset(&m, &theta, &SamplerConfig::exact(30, 2), &spec)?;
    println!("rejected {} of {} draws", d.rejected, d.drawn);
    if let Some(f) = &d.face {
        println!("proper face: {}, g = [{}]", f.is_proper(), f.g_strings().join(", "));
    }
    print!("{}", samples_to_csv(&d.samples, &m)?.lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
