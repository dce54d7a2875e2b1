//! Models, the J index set, and the baseline parametrization.
//!
//! cargo run --example model_basics

use loglin::model::Model;
use loglin::param::{probabilities_to_theta, theta_to_probabilities};

fn main() -> loglin::Result<()> {
    // a 2x3 binary lattice: 6 vertex terms and 7 edge terms
    let m = Model::lattice(2, 3)?;
    println!("p = {}, |J| = {}, cells = {}", m.p(), m.j_len(), m.table_size()?);
    for j in 0..m.j_len() {
        println!("  j{j:<2} {}", m.j_label(j));
    }

    // a three-level chain with an explicit generating class
    let chain = Model::from_generating_class(vec![3, 2, 3], &[vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]])?;
    println!("chain: |J| = {} (2 + 1 + 2 + 2 + 2)", chain.j_len());

    // θ -> p -> θ is the identity on the baseline coordinates
    let theta: Vec<f64> = (0..chain.j_len()).map(|j| 0.3 * j as f64 - 1.0).collect();
    let p = theta_to_probabilities(&theta, &chain)?;
    let back = probabilities_to_theta(&p, &chain)?;
    let err = theta.iter().zip(&back.theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("roundtrip max error {err:.2e}, theta0 = {:.4}", back.theta0);

    // the rows of the design matrix: f_i(j) = 1 iff j ⊴ i
    let cell = [2, 1, 1];
    let active: Vec<String> = chain.active_j(&cell).into_iter().map(|j| chain.j_label(j)).collect();
    println!("active terms at {:?}: {}", cell, active.join(" "));
    Ok(())
}
