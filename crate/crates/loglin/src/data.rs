//! Observations, cell counts, sufficient statistics and the design matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Model;

/// A sample matrix: `len()` rows of `p` level indices each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Samples {
    p: usize,
    data: Vec<usize>,
}

impl Samples {
    pub fn new(p: usize) -> Samples {
        Samples { p, data: Vec::new() }
    }

    pub fn from_rows(p: usize, rows: &[Vec<usize>]) -> Result<Samples> {
        let mut s = Samples::new(p);
        for r in rows {
            s.push(r)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, row: &[usize]) -> Result<()> {
        if row.len() != self.p {
            return Err(Error::Parse {
                row: self.len() + 1,
                msg: format!("expected {} values, found {}", self.p, row.len()),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn len(&self) -> usize {
        if self.p == 0 {
            0
        } else {
            self.data.len() / self.p
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn row(&self, k: usize) -> &[usize] {
        &self.data[k * self.p..(k + 1) * self.p]
    }
    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.data.chunks_exact(self.p.max(1))
    }

    /// Check every row against the model's level ranges.
    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.p != model.p() {
            return Err(Error::Invalid(format!(
                "samples have {} columns, model has {} variables",
                self.p,
                model.p()
            )));
        }
        for (k, row) in self.rows().enumerate() {
            model
                .check_cell(row)
                .map_err(|e| Error::Parse { row: k + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    /// Keep only the listed columns.
    pub fn project(&self, vars: &[usize]) -> Samples {
        let mut data = Vec::with_capacity(self.len() * vars.len());
        for row in self.rows() {
            data.extend(vars.iter().map(|&v| row[v]));
        }
        Samples { p: vars.len(), data }
    }
}

/// `(N, t)` with `t(j) = n(j_{S(j)})` in j-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffStat {
    pub n: u64,
    pub t: Vec<u64>,
}

impl SuffStat {
    /// Lifted statistic `t̃ = (N, t)`.
    pub fn lifted(&self) -> Vec<i64> {
        std::iter::once(self.n as i64)
            .chain(self.t.iter().map(|&x| x as i64))
            .collect()
    }
}

pub fn sufficient_statistics(samples: &Samples, model: &Model) -> Result<SuffStat> {
    samples.validate(model)?;
    let mut t = vec![0u64; model.j_len()];
    for row in samples.rows() {
        for j in model.active_j(row) {
            t[j] += 1;
        }
    }
    Ok(SuffStat { n: samples.len() as u64, t })
}

/// Full contingency table `n(i)` in cell-index order.
pub fn cell_counts(samples: &Samples, model: &Model) -> Result<Vec<u64>> {
    let size = model.table_size()?;
    samples.validate(model)?;
    let mut n = vec![0u64; size];
    for row in samples.rows() {
        n[model.cell_index(row)] += 1;
    }
    Ok(n)
}

/// `t` from a full table of counts.
pub fn stats_from_counts(counts: &[u64], model: &Model) -> Result<SuffStat> {
    let size = model.table_size()?;
    if counts.len() != size {
        return Err(Error::Invalid(format!("{} counts for {size} cells", counts.len())));
    }
    let mut t = vec![0u64; model.j_len()];
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            for j in model.active_j(&model.cell_at(k)) {
                t[j] += c;
            }
        }
    }
    Ok(SuffStat { n: counts.iter().sum(), t })
}

/// Sparse rows of the lifted design: column 0 is the intercept, column `1 + j` is `j`.
pub fn lifted_rows(model: &Model) -> Result<impl Iterator<Item = Vec<usize>> + '_> {
    let size = model.table_size()?;
    Ok((0..size).map(move |k| {
        std::iter::once(0)
            .chain(model.active_j(&model.cell_at(k)).into_iter().map(|j| j + 1))
            .collect()
    }))
}

/// Dense design matrix `Ã` with rows `(1, f_iᵗ)`.
pub fn design_matrix(model: &Model) -> Result<DMatrix<f64>> {
    let size = model.table_size()?;
    let mut a = DMatrix::zeros(size, model.j_len() + 1);
    for (k, cols) in lifted_rows(model)?.enumerate() {
        for c in cols {
            a[(k, c)] = 1.0;
        }
    }
    Ok(a)
}
