//! Global, conditional and relaxed-marginal likelihood fits.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::newton::{newton_maximize, FitResult, NewtonOptions};
use super::objective::{Group, GroupedLikelihood};
use crate::data::{cell_counts, Samples};
use crate::error::{Error, Result};
use crate::local::{
    conditional_index_set, relaxed_marginal_model, ConditionalModel, LocalKind, RelaxedModel,
};
use crate::model::{vars_of, Model};

/// Full-table likelihood `⟨θ, t⟩ − N k(θ)`, optionally restricted to a subset of cells.
pub fn table_likelihood(
    counts: &[u64],
    model: &Model,
    cells: Option<&[usize]>,
    scale: f64,
) -> Result<GroupedLikelihood> {
    let size = model.table_size()?;
    let all: Vec<usize>;
    let cells = match cells {
        Some(c) => c,
        None => {
            all = (0..size).collect();
            &all
        }
    };
    let d = model.j_len();
    let mut features = DMatrix::zeros(cells.len(), d);
    let mut n = DVector::zeros(cells.len());
    for (r, &k) in cells.iter().enumerate() {
        for j in model.active_j(&model.cell_at(k)) {
            features[(r, j)] = 1.0;
        }
        n[r] = counts[k] as f64;
    }
    Ok(GroupedLikelihood::new(vec![Group { features, counts: n }], d, scale))
}

pub fn fit_global(samples: &Samples, model: &Model, opts: &NewtonOptions) -> Result<FitResult> {
    fit_global_counts(&cell_counts(samples, model)?, model, opts)
}

pub fn fit_global_counts(counts: &[u64], model: &Model, opts: &NewtonOptions) -> Result<FitResult> {
    let obj = table_likelihood(counts, model, None, 1.0)?;
    newton_maximize(&obj, &vec![0.0; model.j_len()], opts, 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalEstimate {
    /// 0-based vertex.
    pub v: usize,
    pub kind: LocalKind,
    pub fit: FitResult,
    /// `(global j, value)` over the conditional index set of `v`.
    pub ps_block: Vec<(usize, f64)>,
    pub equality_hypothesis: bool,
}

fn local_scale(samples: &Samples) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Invalid("no samples".into()));
    }
    Ok(1.0 / samples.len() as f64)
}

/// Enumerate all level tuples for `vars`, first variable most significant.
fn configurations(vars: &[usize], model: &Model) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &v in vars {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..model.levels()[v]).map(move |l| {
                    let mut c = c.clone();
                    c.push(l);
                    c
                })
            })
            .collect();
    }
    out
}

/// Conditional likelihood of the free block given the shell, `1/N` scaled.
pub fn conditional_likelihood(
    samples: &Samples,
    model: &Model,
    cm: &ConditionalModel,
) -> Result<GroupedLikelihood> {
    samples.validate(model)?;
    let scale = local_scale(samples)?;
    let block = vars_of(cm.nbhd.block_mask());
    let context: Vec<usize> =
        cm.nbhd.m.iter().copied().filter(|w| !block.contains(w)).collect();
    let alts = configurations(&block, model);
    let radix: Vec<usize> = block.iter().map(|&v| model.levels()[v]).collect();

    let mut by_context: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for row in samples.rows() {
        let key: Vec<usize> = context.iter().map(|&w| row[w]).collect();
        let a = block.iter().zip(&radix).fold(0usize, |acc, (&v, &r)| acc * r + row[v]);
        by_context.entry(key).or_insert_with(|| vec![0.0; alts.len()])[a] += 1.0;
    }
    let groups = by_context
        .into_iter()
        .map(|(key, counts)| {
            let mut cell = vec![0usize; model.p()];
            for (&w, &l) in context.iter().zip(&key) {
                cell[w] = l;
            }
            let mut features = DMatrix::zeros(alts.len(), cm.dim());
            for (a, y) in alts.iter().enumerate() {
                for (&v, &l) in block.iter().zip(y) {
                    cell[v] = l;
                }
                for (k, &j) in cm.j_indices.iter().enumerate() {
                    if model.precedes(j, &cell) {
                        features[(a, k)] = 1.0;
                    }
                }
            }
            Group { features, counts: DVector::from_vec(counts) }
        })
        .collect();
    Ok(GroupedLikelihood::new(groups, cm.dim(), scale))
}

pub fn fit_local_conditional(
    samples: &Samples,
    model: &Model,
    v: usize,
    hop: usize,
    opts: &NewtonOptions,
) -> Result<LocalEstimate> {
    let cm = conditional_index_set(model, v, hop)?;
    let obj = conditional_likelihood(samples, model, &cm)?;
    let fit = newton_maximize(&obj, &vec![0.0; cm.dim()], opts, obj.scale)?;
    let ps_block = cm.j_indices.iter().copied().zip(fit.theta_hat.iter().copied()).collect();
    Ok(LocalEstimate {
        v,
        kind: cm.kind,
        fit,
        ps_block,
        equality_hypothesis: cm.nbhd.equality_hypothesis(),
    })
}

/// Likelihood of the relaxed marginal model on the `M_v` table, `1/N` scaled.
///
/// Buffer configurations never observed leave the saturated buffer block without a
/// maximizer; the fit is carried out on the face where those configurations have
/// probability zero, which leaves the remaining coordinates unaffected. Directions
/// that the restricted table cannot see are removed before fitting, and the estimate
/// reported is the minimum-norm representative.
pub fn marginal_likelihood(
    samples: &Samples,
    model: &Model,
    rm: &RelaxedModel,
) -> Result<GroupedLikelihood> {
    samples.validate(model)?;
    let scale = local_scale(samples)?;
    let local = samples.project(&rm.nbhd.m);
    let counts = cell_counts(&local, &rm.model)?;
    let buffer_pos: Vec<usize> = rm
        .nbhd
        .buffer
        .iter()
        .map(|w| rm.nbhd.m.binary_search(w).unwrap())
        .collect();
    let key = |cell: &[usize]| -> Vec<usize> { buffer_pos.iter().map(|&k| cell[k]).collect() };
    let mut seen = std::collections::HashSet::new();
    for row in local.rows() {
        seen.insert(key(row));
    }
    let cells: Vec<usize> = (0..counts.len())
        .filter(|&k| seen.contains(&key(&rm.model.cell_at(k))))
        .collect();
    table_likelihood(&counts, &rm.model, Some(&cells), scale)
}

pub fn fit_local_marginal(
    samples: &Samples,
    model: &Model,
    v: usize,
    hop: usize,
    opts: &NewtonOptions,
) -> Result<LocalEstimate> {
    let rm = relaxed_marginal_model(model, v, hop)?;
    let full = marginal_likelihood(samples, model, &rm)?;
    let obj = full.restrict(&full.identified_basis());
    let mut fit = newton_maximize(&obj, &vec![0.0; obj.dim], opts, obj.scale)?;
    fit.theta_hat = obj.embed(&fit.theta_hat);
    let ps_block = rm.ps_positions.iter().map(|&(jl, j)| (j, fit.theta_hat[jl])).collect();
    Ok(LocalEstimate {
        v,
        kind: rm.kind,
        fit,
        ps_block,
        equality_hypothesis: rm.nbhd.equality_hypothesis(),
    })
}

pub fn fit_local(
    kind: LocalKind,
    samples: &Samples,
    model: &Model,
    v: usize,
    opts: &NewtonOptions,
) -> Result<LocalEstimate> {
    if kind.is_conditional() {
        fit_local_conditional(samples, model, v, kind.hop(), opts)
    } else {
        fit_local_marginal(samples, model, v, kind.hop(), opts)
    }
}

/// One local fit per vertex, in vertex order (computed in parallel).
pub fn fit_all_local(
    kind: LocalKind,
    samples: &Samples,
    model: &Model,
    opts: &NewtonOptions,
) -> Result<Vec<LocalEstimate>> {
    (0..model.p())
        .into_par_iter()
        .map(|v| fit_local(kind, samples, model, v, opts))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityCheck {
    pub v: usize,
    pub hop: usize,
    /// `max_j |θ̂^{marginal}_j − θ̂^{conditional}_j|` over the conditional index set.
    pub max_discrepancy: f64,
    pub hypothesis_holds: bool,
    pub conditional_converged: bool,
    pub marginal_converged: bool,
}

pub fn compare_estimates(conditional: &LocalEstimate, marginal: &LocalEstimate) -> Result<EqualityCheck> {
    if conditional.v != marginal.v || conditional.kind.hop() != marginal.kind.hop() {
        return Err(Error::Invalid("estimates belong to different neighbourhoods".into()));
    }
    let max_discrepancy = conditional
        .ps_block
        .iter()
        .zip(&marginal.ps_block)
        .map(|((ja, a), (jb, b))| {
            debug_assert_eq!(ja, jb);
            (a - b).abs()
        })
        .fold(0.0, f64::max);
    Ok(EqualityCheck {
        v: conditional.v,
        hop: conditional.kind.hop(),
        max_discrepancy,
        hypothesis_holds: marginal.equality_hypothesis,
        conditional_converged: conditional.fit.converged,
        marginal_converged: marginal.fit.converged,
    })
}

pub fn check_equality(
    samples: &Samples,
    model: &Model,
    v: usize,
    hop: usize,
    opts: &NewtonOptions,
) -> Result<EqualityCheck> {
    let c = fit_local_conditional(samples, model, v, hop, opts)?;
    let m = fit_local_marginal(samples, model, v, hop, opts)?;
    for e in [&c, &m] {
        if e.fit.nonexistence_flag {
            return Err(Error::Numerical(format!(
                "{} fit at vertex {} has no maximizer",
                e.kind.name(),
                v + 1
            )));
        }
    }
    compare_estimates(&c, &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::newton::Objective;

    fn single() -> Model {
        Model::from_generating_class(vec![2], &[vec![0]]).unwrap()
    }

    fn rows(p: usize, rows: &[&[usize]]) -> Samples {
        Samples::from_rows(p, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn bernoulli_closed_form() {
        let r = fit_global_counts(&[3, 2], &single(), &NewtonOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.theta_hat[0] - (2.0f64 / 3.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn bernoulli_boundary_flagged() {
        let r = fit_global_counts(&[0, 5], &single(), &NewtonOptions::default()).unwrap();
        assert!(r.nonexistence_flag && !r.converged);
    }

    #[test]
    fn isolated_vertex_conditional_is_marginal_bernoulli() {
        let m = Model::from_graph(vec![2], &[]).unwrap();
        let s = rows(1, &[&[0], &[0], &[0], &[1], &[1]]);
        let e = fit_local_conditional(&s, &m, 0, 1, &NewtonOptions::default()).unwrap();
        assert!((e.ps_block[0].1 - (2.0f64 / 3.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn uniform_table_fits_to_zero() {
        let m = Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap();
        let r = fit_global_counts(&[5, 5, 5, 5], &m, &NewtonOptions::default()).unwrap();
        assert!(r.theta_hat.iter().all(|t| t.abs() < 1e-6));
    }

    #[test]
    fn path_center_marginal_is_global() {
        let m = Model::from_graph(vec![2; 3], &[(0, 1), (1, 2)]).unwrap();
        let data: Vec<Vec<usize>> = (0..40).map(|k| vec![k % 2, (k / 2) % 2, (k / 3 + k / 7) % 2]).collect();
        let s = Samples::from_rows(3, &data).unwrap();
        let opts = NewtonOptions { grad_tol: 1e-12, ..Default::default() };
        let g = fit_global(&s, &m, &opts).unwrap();
        let e = fit_local_marginal(&s, &m, 1, 1, &opts).unwrap();
        // the relaxed model is the model itself; compare in global coordinates
        for (j, x) in e.ps_block {
            assert!((x - g.theta_hat[j]).abs() < 1e-8);
        }
        assert!(!e.equality_hypothesis);
    }

    #[test]
    fn conditional_gradient_matches_finite_differences() {
        let m = Model::lattice(2, 3).unwrap();
        let data: Vec<Vec<usize>> = (0..60)
            .map(|k: usize| (0..6).map(|v| (k * (v + 3) / 5 + v) % 2).collect())
            .collect();
        let s = Samples::from_rows(6, &data).unwrap();
        for hop in [1, 2] {
            let cm = conditional_index_set(&m, 1, hop).unwrap();
            let obj = conditional_likelihood(&s, &m, &cm).unwrap();
            let th: Vec<f64> = (0..cm.dim()).map(|k| 0.1 * k as f64 - 0.3).collect();
            let ev = obj.evaluate(&th, false);
            for k in 0..cm.dim() {
                let (mut a, mut b) = (th.clone(), th.clone());
                a[k] += 1e-6;
                b[k] -= 1e-6;
                let fd = (obj.evaluate(&a, false).value - obj.evaluate(&b, false).value) / 2e-6;
                assert!((fd - ev.gradient[k]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}
