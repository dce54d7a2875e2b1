//! Baseline parametrization: θ ↔ p through Möbius inversion on the full table.

use crate::error::{Error, Result};
use crate::model::Model;

/// Canonical parameters `(θ₀, θ_j, j ∈ J)` in j-order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    pub theta0: f64,
    pub theta: Vec<f64>,
}

impl ThetaVector {
    pub fn zeros(model: &Model) -> ThetaVector {
        ThetaVector { theta0: 0.0, theta: vec![0.0; model.j_len()] }
    }

    /// Attach the normalizing intercept `θ₀ = −k(θ)`.
    pub fn normalized(model: &Model, theta: Vec<f64>) -> Result<ThetaVector> {
        let k = log_partition(&theta, model)?;
        Ok(ThetaVector { theta0: -k, theta })
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Un-normalized `⟨θ, f_i⟩` for every cell, via a per-axis zeta transform.
pub fn linear_predictor(theta: &[f64], model: &Model) -> Result<Vec<f64>> {
    let n = model.table_size()?;
    check_len(theta, model)?;
    let mut x = vec![0.0; n];
    for (j, &t) in theta.iter().enumerate() {
        x[model.cell_index(&model.j_cell(j))] = t;
    }
    zeta(&mut x, model);
    Ok(x)
}

/// `k(θ) = log Σ_i exp ⟨θ, f_i⟩`.
pub fn log_partition(theta: &[f64], model: &Model) -> Result<f64> {
    Ok(log_sum_exp(&linear_predictor(theta, model)?))
}

/// The probability table over I, in cell-index order.
pub fn theta_to_probabilities(theta: &[f64], model: &Model) -> Result<Vec<f64>> {
    let eta = linear_predictor(theta, model)?;
    let k = log_sum_exp(&eta);
    Ok(eta.into_iter().map(|e| (e - k).exp()).collect())
}

/// Baseline coefficients `θ_i` for *every* cell of a strictly positive table
/// (`θ₀` sits at cell 0). Entries off J vanish exactly when `log p` lies in the model.
pub fn baseline_coefficients(p: &[f64], model: &Model) -> Result<Vec<f64>> {
    let n = model.table_size()?;
    if p.len() != n {
        return Err(Error::Invalid(format!("table has {} cells, expected {n}", p.len())));
    }
    let mut x = Vec::with_capacity(n);
    for (k, &q) in p.iter().enumerate() {
        if !(q > 0.0) {
            return Err(Error::ZeroProbability { cell: model.cell_at(k) });
        }
        x.push(q.ln());
    }
    mobius(&mut x, model);
    Ok(x)
}

/// Inverse of [`theta_to_probabilities`], discarding coefficients off J.
pub fn probabilities_to_theta(p: &[f64], model: &Model) -> Result<ThetaVector> {
    let x = baseline_coefficients(p, model)?;
    let theta = (0..model.j_len())
        .map(|j| x[model.cell_index(&model.j_cell(j))])
        .collect();
    Ok(ThetaVector { theta0: x[0], theta })
}

/// `E_θ[f]`, the analytic gradient of `k`.
pub fn mean_statistic(theta: &[f64], model: &Model) -> Result<Vec<f64>> {
    let p = theta_to_probabilities(theta, model)?;
    // Σ_{i ⪰ j} p(i) is the transpose-zeta of p read at j.
    let mut q = p;
    upward_sum(&mut q, model);
    Ok((0..model.j_len())
        .map(|j| q[model.cell_index(&model.j_cell(j))])
        .collect())
}

/// Per axis: `x[i] += x[i with i_v = 0]` for `i_v ≠ 0`.
pub fn zeta(x: &mut [f64], model: &Model) {
    axis_pass(x, model, |x, base, k| x[k] += x[base]);
}

/// Per axis: `x[i] -= x[i with i_v = 0]` for `i_v ≠ 0`.
pub fn mobius(x: &mut [f64], model: &Model) {
    axis_pass(x, model, |x, base, k| x[k] -= x[base]);
}

/// Per axis, for each level `l ≠ 0`: move mass down, so that afterwards `x[j]` is the sum
/// of the original entries over all cells agreeing with `j` on S(j).
fn upward_sum(x: &mut [f64], model: &Model) {
    let levels = model.levels();
    let strides = model.strides();
    for v in 0..model.p() {
        let s = strides[v];
        let block = s * levels[v];
        for start in (0..x.len()).step_by(block) {
            for off in 0..s {
                let base = start + off;
                let total: f64 = (0..levels[v]).map(|l| x[base + l * s]).sum();
                x[base] = total;
            }
        }
    }
}

fn axis_pass(x: &mut [f64], model: &Model, f: impl Fn(&mut [f64], usize, usize)) {
    let levels = model.levels();
    let strides = model.strides();
    for v in 0..model.p() {
        let s = strides[v];
        let block = s * levels[v];
        for start in (0..x.len()).step_by(block) {
            for l in 1..levels[v] {
                for off in 0..s {
                    f(x, start + off, start + l * s + off);
                }
            }
        }
    }
}

fn check_len(theta: &[f64], model: &Model) -> Result<()> {
    if theta.len() != model.j_len() {
        return Err(Error::Invalid(format!(
            "θ has {} entries, model has |J| = {}",
            theta.len(),
            model.j_len()
        )));
    }
    Ok(())
}
