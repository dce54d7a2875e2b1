//! Simple-average consensus of local estimates.

use serde::Serialize;

use super::fit::LocalEstimate;
use crate::error::{Error, Result};
use crate::model::Model;

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusEstimate {
    /// Global-J vector in j-order; coordinates without contributors are 0.
    pub theta_hat: Vec<f64>,
    pub contributors: Vec<usize>,
    /// Coordinates fed by at least one fit flagged as non-existent.
    pub poisoned: Vec<bool>,
    /// Some coordinate has no contributor.
    pub partial: bool,
}

impl ConsensusEstimate {
    pub fn any_poisoned(&self) -> bool {
        self.poisoned.iter().any(|&p| p)
    }
}

/// Per-coordinate arithmetic mean over the contributing local estimates.
///
/// Contributions are accumulated in vertex order whatever the input order, so the
/// result does not depend on how the fits were scheduled.
pub fn consensus(estimates: &[LocalEstimate], model: &Model) -> ConsensusEstimate {
    let d = model.j_len();
    let mut order: Vec<&LocalEstimate> = estimates.iter().collect();
    order.sort_by_key(|e| (e.v, e.kind.hop()));
    let mut sum = vec![0.0; d];
    let mut contributors = vec![0usize; d];
    let mut poisoned = vec![false; d];
    for e in order {
        for &(j, x) in &e.ps_block {
            sum[j] += x;
            contributors[j] += 1;
            poisoned[j] |= e.fit.nonexistence_flag;
        }
    }
    let theta_hat = sum
        .iter()
        .zip(&contributors)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let partial = contributors.iter().any(|&c| c == 0);
    if partial {
        log::warn!("consensus estimate is partial: some coordinates have no contributor");
    }
    ConsensusEstimate { theta_hat, contributors, poisoned, partial }
}

/// `‖θ̂ − θ*‖² / ‖θ*‖²`
pub fn relative_mse(theta_hat: &[f64], theta_star: &[f64]) -> Result<f64> {
    if theta_hat.len() != theta_star.len() {
        return Err(Error::Invalid("vectors differ in length".into()));
    }
    let den: f64 = theta_star.iter().map(|x| x * x).sum();
    if den == 0.0 {
        return Err(Error::Invalid("relative error against a zero parameter".into()));
    }
    let num: f64 = theta_hat.iter().zip(theta_star).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(num / den)
}

/// `‖θ̂ − θ*‖₂`
pub fn frobenius_error(theta_hat: &[f64], theta_star: &[f64]) -> f64 {
    theta_hat
        .iter()
        .zip(theta_star)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}
