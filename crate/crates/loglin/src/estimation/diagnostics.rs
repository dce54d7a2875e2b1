//! Sample versions of the design and Fisher-information conditions used in the
//! error bounds for the one-hop conditional estimator.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::local::conditional_index_set;
use crate::model::Model;
use crate::param::log_sum_exp;

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionDiagnostics {
    /// `max_v λ_max((1/N) Σ_n W W^t)`
    pub d_max_hat: f64,
    /// `min_v λ_min` of the per-vertex Fisher matrix at the reference parameter.
    pub c_min_hat: f64,
    pub d_v: Vec<usize>,
    pub lambda_max: Vec<f64>,
    pub lambda_min: Vec<f64>,
    /// Some Fisher matrix is singular (within 1e-12) or negative.
    pub violated: bool,
}

/// Per-vertex pieces: the index set, `(1/N) Σ W Wᵗ` and the Fisher matrix `(1/N) Σ H ∘ W Wᵗ`.
pub struct VertexDesign {
    pub j_indices: Vec<usize>,
    pub gram: DMatrix<f64>,
    pub fisher: DMatrix<f64>,
}

/// `theta_ref` is a global-J vector (intercept excluded).
pub fn vertex_design(samples: &Samples, model: &Model, v: usize, theta_ref: &[f64]) -> Result<VertexDesign> {
    let cm = conditional_index_set(model, v, 1)?;
    let d = cm.dim();
    let levels = model.levels()[v];
    // level of v in each j (never 0, since v ∈ S(j))
    let jv: Vec<usize> = cm.j_indices.iter().map(|&j| model.j_cell(j)[v]).collect();
    let mut gram = DMatrix::zeros(d, d);
    let mut fisher = DMatrix::zeros(d, d);
    let n = samples.len();
    if n == 0 {
        return Err(Error::Invalid("no samples".into()));
    }
    let mut cell = vec![0usize; model.p()];
    for row in samples.rows() {
        cell.copy_from_slice(row);
        let w: DVector<f64> = DVector::from_iterator(
            d,
            cm.j_indices.iter().zip(&jv).map(|(&j, &l)| {
                cell[v] = l;
                if model.precedes(j, &cell) { 1.0 } else { 0.0 }
            }),
        );
        let mut z = vec![0.0; levels];
        for (k, &j) in cm.j_indices.iter().enumerate() {
            z[jv[k]] += theta_ref[j] * w[k];
        }
        let lz = log_sum_exp(&z);
        let prob: Vec<f64> = z.iter().map(|x| (x - lz).exp()).collect();
        let ww = &w * w.transpose();
        for k in 0..d {
            for l in 0..d {
                if ww[(k, l)] == 0.0 {
                    continue;
                }
                let (a, b) = (prob[jv[k]], prob[jv[l]]);
                let eta = if jv[k] == jv[l] { a - a * a } else { -a * b };
                fisher[(k, l)] += eta;
            }
        }
        gram += ww;
    }
    gram /= n as f64;
    fisher /= n as f64;
    Ok(VertexDesign { j_indices: cm.j_indices, gram, fisher })
}

fn extreme_eigenvalues(m: DMatrix<f64>) -> (f64, f64) {
    let ev = m.symmetric_eigen().eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn assumption_diagnostics(
    samples: &Samples,
    model: &Model,
    theta_ref: &[f64],
) -> Result<AssumptionDiagnostics> {
    samples.validate(model)?;
    if theta_ref.len() != model.j_len() {
        return Err(Error::Invalid(format!(
            "reference parameter has {} entries, model has {}",
            theta_ref.len(),
            model.j_len()
        )));
    }
    let mut d_v = Vec::new();
    let mut lambda_max = Vec::new();
    let mut lambda_min = Vec::new();
    for v in 0..model.p() {
        let vd = vertex_design(samples, model, v, theta_ref)?;
        d_v.push(vd.j_indices.len());
        lambda_max.push(extreme_eigenvalues(vd.gram).1);
        lambda_min.push(extreme_eigenvalues(vd.fisher).0);
    }
    let d_max_hat = lambda_max.iter().copied().fold(0.0, f64::max);
    let c_min_hat = lambda_min.iter().copied().fold(f64::INFINITY, f64::min);
    let violated = c_min_hat <= 1e-12;
    if violated {
        log::warn!("minimum Fisher eigenvalue {c_min_hat:.3e} is not positive");
    }
    Ok(AssumptionDiagnostics { d_max_hat, c_min_hat, d_v, lambda_max, lambda_min, violated })
}
