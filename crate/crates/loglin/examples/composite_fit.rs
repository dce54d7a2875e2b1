//! Local conditional and marginal fits on a lattice, averaged into the composite
//! estimate, with the design and curvature diagnostics.
//!
//! cargo run --release --example composite_fit

use loglin::estimation::{
    assumption_diagnostics, consensus, fit_all_local, fit_global, relative_mse, NewtonOptions,
};
use loglin::experiments::draw_theta;
use loglin::local::LocalKind;
use loglin::model::Model;
use loglin::sampler::{sample_exact, SamplerConfig};

fn main() -> loglin::Result<()> {
    let m = Model::lattice(3, 3)?;
    let theta = draw_theta(&m, 11, 0.5);
    let s = sample_exact(&m, &theta, &SamplerConfig::exact(2000, 11))?;
    let opts = NewtonOptions::default();

    let g = fit_global(&s, &m, &opts)?;
    println!("global: {} iterations, relative MSE {:.4}", g.iterations, relative_mse(&g.theta_hat, &theta)?);

    for kind in [LocalKind::Ps, LocalKind::M1, LocalKind::Ps2, LocalKind::M2] {
        let local = fit_all_local(kind, &s, &m, &opts)?;
        let c = consensus(&local, &m);
        println!(
            "{:<3}: relative MSE {:.4}, contributors per term {:?}",
            kind.name(),
            relative_mse(&c.theta_hat, &theta)?,
            &c.contributors[..]
        );
    }

    let d = assumption_diagnostics(&s, &m, &theta)?;
    println!("d_v = {:?}", d.d_v);
    println!("D_max = {:.4}, C_min = {:.4}", d.d_max_hat, d.c_min_hat);
    Ok(())
}
