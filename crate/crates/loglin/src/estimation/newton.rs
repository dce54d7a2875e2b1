//! Damped Newton ascent for concave objectives, with a divergence flag for
//! likelihoods whose supremum is not attained.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Objective value, gradient and (optionally) the negated Hessian.
pub struct Eval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub neg_hessian: Option<DMatrix<f64>>,
}

pub trait Objective {
    fn dim(&self) -> usize;
    fn evaluate(&self, theta: &[f64], hessian: bool) -> Eval;
    /// Size of a point for the divergence test, in the coordinates the caller reports.
    fn divergence_norm(&self, theta: &[f64]) -> f64 {
        sup_norm(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Cholesky of the negated Hessian, with a small ridge on failure.
    Cholesky,
    /// Symmetric eigendecomposition, inverting only the non-negligible spectrum.
    /// For objectives with unidentified directions.
    PseudoInverse,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    /// Convergence also requires the Newton step to be this small, which separates a
    /// true optimum from a vanishing gradient along a divergent direction.
    pub step_tol: f64,
    pub max_iter: usize,
    /// `‖θ‖_∞` beyond which the maximizer is declared not to exist.
    pub divergence: f64,
    pub ridge: f64,
    pub mode: SolveMode,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            grad_tol: 1e-8,
            step_tol: 1e-6,
            max_iter: 200,
            divergence: 30.0,
            ridge: 1e-10,
            mode: SolveMode::Cholesky,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub nonexistence_flag: bool,
    pub nonexistence_reason: Option<String>,
    pub loglik: f64,
    /// Factor applied to the log-likelihood: 1 for global fits, `1/N` for local ones.
    pub scale: f64,
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn newton_step(h: &DMatrix<f64>, g: &DVector<f64>, opts: &NewtonOptions) -> Result<DVector<f64>> {
    match opts.mode {
        SolveMode::Cholesky => {
            if let Some(ch) = h.clone().cholesky() {
                return Ok(ch.solve(g));
            }
            let scale = h.diagonal().iter().fold(1.0f64, |a, d| a.max(d.abs()));
            let ridged = h + DMatrix::identity(h.nrows(), h.ncols()) * (opts.ridge * scale);
            ridged
                .cholesky()
                .map(|ch| ch.solve(g))
                .ok_or_else(|| Error::Numerical("Hessian not positive definite after ridge".into()))
        }
        SolveMode::PseudoInverse => {
            let eig = h.clone().symmetric_eigen();
            let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
            let cut = top * 1e-10;
            let mut step = DVector::zeros(g.len());
            for (k, &l) in eig.eigenvalues.iter().enumerate() {
                if l > cut && l > 0.0 {
                    let u = eig.eigenvectors.column(k);
                    step += u * (u.dot(g) / l);
                }
            }
            Ok(step)
        }
    }
}

pub fn newton_maximize(
    obj: &dyn Objective,
    init: &[f64],
    opts: &NewtonOptions,
    scale: f64,
) -> Result<FitResult> {
    if init.len() != obj.dim() {
        return Err(Error::Invalid(format!(
            "initial point has {} entries, objective has {}",
            init.len(),
            obj.dim()
        )));
    }
    let mut theta = init.to_vec();
    let mut ev = obj.evaluate(&theta, true);
    if !ev.value.is_finite() {
        return Err(Error::Numerical("objective is not finite at the initial point".into()));
    }
    let mut converged = false;
    let mut reason = None;
    let mut iterations = 0;
    let mut gnorm = sup_norm(ev.gradient.as_slice());
    while iterations < opts.max_iter {
        let h = ev.neg_hessian.take().expect("hessian requested");
        let step = newton_step(&h, &ev.gradient, opts)?;
        let snorm = sup_norm(step.as_slice());
        if gnorm < opts.grad_tol && snorm < opts.step_tol {
            converged = true;
            break;
        }
        if obj.divergence_norm(&theta) > opts.divergence {
            reason = Some(format!(
                "parameter divergence: ‖θ‖∞ exceeded {} while the likelihood kept increasing",
                opts.divergence
            ));
            break;
        }
        iterations += 1;
        let f0 = ev.value;
        let slack = 1e-13 * (1.0 + f0.abs());
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + alpha * s).collect();
            let v = obj.evaluate(&trial, false).value;
            if v.is_finite() && v >= f0 - slack {
                accepted = Some(trial);
                break;
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            // no ascent possible along the Newton direction: we are at numerical precision
            converged = gnorm < opts.grad_tol;
            break;
        };
        theta = next;
        ev = obj.evaluate(&theta, true);
        gnorm = sup_norm(ev.gradient.as_slice());
    }
    let nonexistence_flag = reason.is_some();
    Ok(FitResult {
        theta_hat: theta,
        converged: converged && !nonexistence_flag,
        iterations,
        final_gradient_norm: gnorm,
        nonexistence_flag,
        nonexistence_reason: reason,
        loglik: ev.value,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;
    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&self, t: &[f64], h: bool) -> Eval {
            Eval {
                value: -(t[0] - 1.0).powi(2) / 2.0,
                gradient: DVector::from_element(1, 1.0 - t[0]),
                neg_hessian: h.then(|| DMatrix::from_element(1, 1, 1.0)),
            }
        }
    }

    #[test]
    fn quadratic_in_one_step() {
        let r = newton_maximize(&Quadratic, &[0.0], &NewtonOptions::default(), 1.0).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!((r.theta_hat[0] - 1.0).abs() < 1e-12);
    }

    /// `l(θ) = 5θ − 5 log(1 + e^θ)`: supremum approached as θ → ∞.
    struct Unbounded;
    impl Objective for Unbounded {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&self, t: &[f64], h: bool) -> Eval {
            let p = 1.0 / (1.0 + (-t[0]).exp());
            let lse = if t[0] > 0.0 { t[0] + (-t[0]).exp().ln_1p() } else { t[0].exp().ln_1p() };
            Eval {
                value: 5.0 * t[0] - 5.0 * lse,
                gradient: DVector::from_element(1, 5.0 - 5.0 * p),
                neg_hessian: h.then(|| DMatrix::from_element(1, 1, 5.0 * p * (1.0 - p))),
            }
        }
    }

    #[test]
    fn divergence_is_flagged() {
        let r = newton_maximize(&Unbounded, &[0.0], &NewtonOptions::default(), 1.0).unwrap();
        assert!(r.nonexistence_flag);
        assert!(!r.converged);
        assert!(r.theta_hat[0] > 30.0);
    }

    #[test]
    fn pseudo_inverse_handles_flat_directions() {
        // −(a + b − 1)²/2 is flat along a − b
        struct Ridge;
        impl Objective for Ridge {
            fn dim(&self) -> usize {
                2
            }
            fn evaluate(&self, t: &[f64], h: bool) -> Eval {
                let r = t[0] + t[1] - 1.0;
                Eval {
                    value: -r * r / 2.0,
                    gradient: DVector::from_vec(vec![-r, -r]),
                    neg_hessian: h.then(|| DMatrix::from_element(2, 2, 1.0)),
                }
            }
        }
        let opts = NewtonOptions { mode: SolveMode::PseudoInverse, ..Default::default() };
        let r = newton_maximize(&Ridge, &[0.0, 0.0], &opts, 1.0).unwrap();
        assert!(r.converged);
        assert!((r.theta_hat[0] - 0.5).abs() < 1e-12 && (r.theta_hat[1] - 0.5).abs() < 1e-12);
    }
}
