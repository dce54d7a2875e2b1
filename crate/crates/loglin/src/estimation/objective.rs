//! Multinomial-logit likelihoods over groups of alternatives.
//!
//! A table likelihood is one group whose alternatives are the cells; a
//! conditional likelihood has one group per observed context, whose
//! alternatives are the configurations of the free block.

use nalgebra::{DMatrix, DVector};

use super::newton::{sup_norm, Eval, Objective};
use crate::param::log_sum_exp;

#[derive(Debug, Clone)]
pub struct Group {
    /// Alternatives × parameters, 0/1 sufficient-statistic features.
    pub features: DMatrix<f64>,
    /// Observed count for each alternative.
    pub counts: DVector<f64>,
}

impl Group {
    pub fn total(&self) -> f64 {
        self.counts.sum()
    }
}

/// `scale · Σ_groups [ Σ_a n_a η_a − n · log Σ_a exp η_a ]`, `η = F θ`.
#[derive(Debug, Clone)]
pub struct GroupedLikelihood {
    pub groups: Vec<Group>,
    pub dim: usize,
    pub scale: f64,
    /// For a restricted likelihood, the map `φ ↦ θ = Qφ` back to the original coordinates.
    pub embedding: Option<DMatrix<f64>>,
}

impl GroupedLikelihood {
    pub fn new(groups: Vec<Group>, dim: usize, scale: f64) -> Self {
        GroupedLikelihood { groups, dim, scale, embedding: None }
    }

    /// Orthonormal basis of the identified directions: those that move some group's
    /// fitted probabilities. Read off the Fisher information at `θ = 0`, where every
    /// alternative has positive probability, so its null space is exactly the set of
    /// directions the likelihood cannot see.
    pub fn identified_basis(&self) -> DMatrix<f64> {
        let mut info = DMatrix::zeros(self.dim, self.dim);
        for g in &self.groups {
            let k = g.features.nrows() as f64;
            let mu = g.features.row_sum().transpose() / k;
            info += g.features.tr_mul(&g.features) / k - &mu * mu.transpose();
        }
        let eig = info.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
        let keep: Vec<usize> = (0..self.dim).filter(|&k| eig.eigenvalues[k] > top * 1e-10).collect();
        DMatrix::from_fn(self.dim, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
    }

    /// The same likelihood in coordinates `φ`, `θ = Qφ`.
    pub fn restrict(&self, q: &DMatrix<f64>) -> GroupedLikelihood {
        GroupedLikelihood {
            groups: self
                .groups
                .iter()
                .map(|g| Group { features: &g.features * q, counts: g.counts.clone() })
                .collect(),
            dim: q.ncols(),
            scale: self.scale,
            embedding: Some(q.clone()),
        }
    }

    pub fn embed(&self, phi: &[f64]) -> Vec<f64> {
        match &self.embedding {
            Some(q) => (q * DVector::from_column_slice(phi)).as_slice().to_vec(),
            None => phi.to_vec(),
        }
    }

    /// Fitted alternative probabilities for each group.
    pub fn probabilities(&self, theta: &[f64]) -> Vec<DVector<f64>> {
        let th = DVector::from_column_slice(theta);
        self.groups
            .iter()
            .map(|g| {
                let eta = &g.features * &th;
                let k = log_sum_exp(eta.as_slice());
                eta.map(|e| (e - k).exp())
            })
            .collect()
    }
}

impl Objective for GroupedLikelihood {
    fn dim(&self) -> usize {
        self.dim
    }

    fn divergence_norm(&self, theta: &[f64]) -> f64 {
        sup_norm(&self.embed(theta))
    }

    fn evaluate(&self, theta: &[f64], hessian: bool) -> Eval {
        let th = DVector::from_column_slice(theta);
        let mut value = 0.0;
        let mut gradient = DVector::zeros(self.dim);
        let mut neg_h = hessian.then(|| DMatrix::zeros(self.dim, self.dim));
        for g in &self.groups {
            let n = g.total();
            if n == 0.0 {
                continue;
            }
            let eta = &g.features * &th;
            let k = log_sum_exp(eta.as_slice());
            value += g.counts.dot(&eta) - n * k;
            let pi = eta.map(|e| (e - k).exp());
            let mu = g.features.tr_mul(&pi);
            gradient += g.features.tr_mul(&g.counts) - &mu * n;
            if let Some(h) = neg_h.as_mut() {
                let mut weighted = g.features.clone();
                for (mut row, &p) in weighted.row_iter_mut().zip(pi.iter()) {
                    row *= p;
                }
                let cov = g.features.tr_mul(&weighted) - &mu * mu.transpose();
                *h += cov * n;
            }
        }
        Eval {
            value: value * self.scale,
            gradient: gradient * self.scale,
            neg_hessian: neg_h.map(|h| h * self.scale),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> GroupedLikelihood {
        let f1 = DMatrix::from_row_slice(3, 2, &[0., 0., 1., 0., 1., 1.]);
        let f2 = DMatrix::from_row_slice(2, 2, &[0., 0., 0., 1.]);
        GroupedLikelihood::new(
            vec![
                Group { features: f1, counts: DVector::from_vec(vec![2., 3., 1.]) },
                Group { features: f2, counts: DVector::from_vec(vec![4., 1.]) },
            ],
            2,
            0.25,
        )
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let obj = toy();
        let th = [0.3, -0.7];
        let ev = obj.evaluate(&th, true);
        let h = ev.neg_hessian.unwrap();
        let e = 1e-5;
        for k in 0..2 {
            let mut a = th;
            let mut b = th;
            a[k] += e;
            b[k] -= e;
            let ea = obj.evaluate(&a, false);
            let eb = obj.evaluate(&b, false);
            let fd = (ea.value - eb.value) / (2.0 * e);
            assert!((fd - ev.gradient[k]).abs() < 1e-8 * (1.0 + fd.abs()));
            for l in 0..2 {
                let fdh = -(ea.gradient[l] - eb.gradient[l]) / (2.0 * e);
                assert!((fdh - h[(k, l)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn restriction_drops_invisible_directions() {
        // the second column is constant within the only group
        let f = DMatrix::from_row_slice(3, 2, &[0., 1., 1., 1., 2., 1.]);
        let obj = GroupedLikelihood::new(vec![Group { features: f, counts: DVector::from_vec(vec![1., 2., 3.]) }], 2, 1.0);
        let q = obj.identified_basis();
        assert_eq!(q.ncols(), 1);
        assert!(q[(1, 0)].abs() < 1e-12);
        let r = obj.restrict(&q);
        let phi = [0.7];
        let theta = r.embed(&phi);
        assert!((r.evaluate(&phi, false).value - obj.evaluate(&theta, false).value).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        for p in toy().probabilities(&[1.0, 2.0]) {
            assert!((p.sum() - 1.0).abs() < 1e-14);
        }
    }
}
