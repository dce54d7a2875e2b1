//! Faces of the lifted marginal cone spanned by the rows `f̃_i = (1, f_i)`.
//!
//! A face is described by a certificate `g` with `⟨g, f̃_i⟩ ≥ 0` for all cells,
//! and its facial set `ℱ` of cells where the inner product vanishes. All
//! decisions are made in exact rational arithmetic.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::data::{stats_from_counts, SuffStat};
use crate::error::{Error, Result};
use crate::lp::{self, Cmp, Lp, LpOutcome};
use crate::model::{mask_of, Model};
use crate::rank::rank_sparse;

/// Default cap on the number of cells handed to the exact LP.
pub const DEFAULT_LP_BUDGET: usize = 1 << 12;

#[derive(Debug, Clone, Copy)]
pub struct FaceOptions {
    pub lp_budget: usize,
    /// Fix the intercept coordinate of `g` at zero. Used when only `t` is known and
    /// the sample size is not, so the certificate must not depend on `N`.
    pub pin_intercept: bool,
}

impl Default for FaceOptions {
    fn default() -> Self {
        FaceOptions { lp_budget: DEFAULT_LP_BUDGET, pin_intercept: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Lifted certificate, length `1 + |J|` (intercept first).
    pub g: Vec<BigRational>,
    /// Sorted cell indices of `ℱ`.
    pub facial_set: Vec<usize>,
    /// Rank of the lifted rows `f̃_i`, `i ∈ ℱ`.
    pub dimension: usize,
    /// Rank of the bare rows `f_i`, `i ∈ ℱ`: the dimension of the face of the
    /// cone in the `t`-coordinates. Differs from `dimension` by one whenever
    /// cell 0 lies in `ℱ`.
    pub cone_dimension: usize,
    /// Number of cells in the owning table.
    pub cells: usize,
}

impl Face {
    /// Whether the face is a proper face (the MLE does not exist if it holds the data).
    pub fn is_proper(&self) -> bool {
        self.facial_set.len() < self.cells
    }

    pub fn g_is_zero(&self) -> bool {
        self.g.iter().all(Zero::is_zero)
    }

    /// `⟨g, x⟩` for a lifted integer vector.
    pub fn evaluate(&self, x: &[i64]) -> BigRational {
        self.g
            .iter()
            .zip(x)
            .map(|(g, &v)| g * BigRational::from_integer(BigInt::from(v)))
            .sum()
    }

    /// `g` as `"p/q"` strings (integers print without a denominator).
    pub fn g_strings(&self) -> Vec<String> {
        self.g.iter().map(|r| r.to_string()).collect()
    }

    /// The certificate scaled to coprime integers.
    pub fn g_integer(&self) -> Vec<BigInt> {
        integer_certificate(&self.g)
    }
}

/// `(I₊, I₀)`: cells with positive and zero counts.
pub fn partition_rows(counts: &[u64]) -> Result<(Vec<usize>, Vec<usize>)> {
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Invalid("all counts are zero".into()));
    }
    let (pos, zero): (Vec<usize>, Vec<usize>) = (0..counts.len()).partition(|&k| counts[k] > 0);
    Ok((pos, zero))
}

fn lifted_cols(model: &Model, cell: usize) -> Vec<usize> {
    std::iter::once(0)
        .chain(model.active_j(&model.cell_at(cell)).into_iter().map(|j| j + 1))
        .collect()
}

fn all_lifted_rows(model: &Model) -> Result<Vec<Vec<usize>>> {
    let n = model.table_size()?;
    Ok((0..n).map(|k| lifted_cols(model, k)).collect())
}

fn check_lp_budget(model: &Model, opts: &FaceOptions) -> Result<usize> {
    let n = model.table_size()?;
    if n > opts.lp_budget {
        return Err(Error::TooLarge { cells: n.to_string(), budget: opts.lp_budget });
    }
    Ok(n)
}

/// Smallest face containing `t̃ = Σ n(i) f̃_i`, from full-table counts.
pub fn smallest_face(counts: &[u64], model: &Model) -> Result<Face> {
    smallest_face_with(counts, model, &FaceOptions::default())
}

pub fn smallest_face_with(counts: &[u64], model: &Model, opts: &FaceOptions) -> Result<Face> {
    let n = check_lp_budget(model, opts)?;
    if counts.len() != n {
        return Err(Error::Invalid(format!("{} counts for {n} cells", counts.len())));
    }
    let (pos, zero) = partition_rows(counts)?;
    let rows = all_lifted_rows(model)?;
    let d = model.j_len() + 1;
    let equalities: Vec<Vec<i64>> = pos.iter().map(|&i| dense(&rows[i], d)).collect();
    let face = iterate_face(&rows, d, &equalities, zero, opts.pin_intercept)?;
    debug_assert!(pos.iter().all(|i| face.facial_set.binary_search(i).is_ok()));
    Ok(face)
}

/// Smallest face containing a lifted statistic `t̃` (counts unknown).
///
/// With `opts.pin_intercept` the intercept entry of `t̃` is ignored.
pub fn smallest_face_of_statistic(lifted: &[i64], model: &Model, opts: &FaceOptions) -> Result<Face> {
    let n = check_lp_budget(model, opts)?;
    let d = model.j_len() + 1;
    if lifted.len() != d {
        return Err(Error::Invalid(format!("statistic has {} entries, expected {d}", lifted.len())));
    }
    let rows = all_lifted_rows(model)?;
    let mut t = lifted.to_vec();
    if opts.pin_intercept {
        t[0] = 0;
    }
    iterate_face(&rows, d, &[t], (0..n).collect(), opts.pin_intercept)
}

/// The cap-and-remove loop: each LP certifies some candidate cells to lie strictly
/// off the face; stop when none can be removed.
fn iterate_face(
    rows: &[Vec<usize>],
    d: usize,
    equalities: &[Vec<i64>],
    mut candidates: Vec<usize>,
    pin: bool,
) -> Result<Face> {
    let cells = rows.len();
    let mut g_total = vec![BigRational::zero(); d];
    let mut rounds = 0;
    while !candidates.is_empty() {
        rounds += 1;
        let g = face_lp(rows, d, equalities, &candidates, pin)?;
        let before = candidates.len();
        candidates.retain(|&i| !sparse_dot(&g, &rows[i]).is_positive());
        for (a, b) in g_total.iter_mut().zip(&g) {
            *a += b;
        }
        log::debug!("face LP round {rounds}: removed {} cells", before - candidates.len());
        if candidates.len() == before {
            break;
        }
    }
    let facial_set: Vec<usize> = (0..cells)
        .filter(|&i| sparse_dot(&g_total, &rows[i]).is_zero())
        .collect();
    if facial_set.len() == cells {
        g_total = vec![BigRational::zero(); d];
    }
    let (dimension, cone_dimension) = ranks(facial_set.iter().map(|&i| rows[i].as_slice()), d);
    let face = Face { g: g_total, facial_set, dimension, cone_dimension, cells };
    verify_rows(&face, rows)?;
    Ok(face)
}

/// `max Σ_{i∈U} ⟨g, f̃_i⟩` over valid `g ∈ [−1, 1]^d` vanishing on the equality rows.
fn face_lp(
    rows: &[Vec<usize>],
    d: usize,
    equalities: &[Vec<i64>],
    candidates: &[usize],
    pin: bool,
) -> Result<Vec<BigRational>> {
    // g = x⁺ − x⁻; coordinate c ↦ columns (2k, 2k+1) for its position k among free coords
    let free: Vec<usize> = (if pin { 1 } else { 0 }..d).collect();
    let mut col = vec![usize::MAX; d];
    for (k, &c) in free.iter().enumerate() {
        col[c] = k;
    }
    let expand = |coeffs: &mut Vec<(usize, i64)>, c: usize, v: i64| {
        if col[c] != usize::MAX {
            coeffs.push((2 * col[c], v));
            coeffs.push((2 * col[c] + 1, -v));
        }
    };
    let mut weight = vec![0i64; d];
    for &i in candidates {
        for &c in &rows[i] {
            weight[c] += 1;
        }
    }
    let mut objective = vec![0i64; 2 * free.len()];
    for (c, &w) in weight.iter().enumerate() {
        if col[c] != usize::MAX {
            objective[2 * col[c]] = w;
            objective[2 * col[c] + 1] = -w;
        }
    }
    let mut lp = Lp::new(objective);
    for row in rows {
        let mut coeffs = Vec::with_capacity(2 * row.len());
        for &c in row {
            expand(&mut coeffs, c, -1);
        }
        if !coeffs.is_empty() {
            lp.constrain(coeffs, Cmp::Le, 0);
        }
    }
    for e in equalities {
        for sign in [1i64, -1] {
            let mut coeffs = Vec::new();
            for (c, &v) in e.iter().enumerate() {
                if v != 0 {
                    expand(&mut coeffs, c, sign * v);
                }
            }
            if !coeffs.is_empty() {
                lp.constrain(coeffs, Cmp::Le, 0);
            }
        }
    }
    for k in 0..2 * free.len() {
        lp.constrain(vec![(k, 1)], Cmp::Le, 1);
    }
    match lp::solve(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            let mut g = vec![BigRational::zero(); d];
            for (k, &c) in free.iter().enumerate() {
                g[c] = &x[2 * k] - &x[2 * k + 1];
            }
            Ok(g)
        }
        other => Err(Error::Lp(format!("face program returned {other:?}; g = 0 is always feasible"))),
    }
}

fn dense(cols: &[usize], d: usize) -> Vec<i64> {
    let mut v = vec![0i64; d];
    for &c in cols {
        v[c] = 1;
    }
    v
}

fn sparse_dot(g: &[BigRational], cols: &[usize]) -> BigRational {
    cols.iter().map(|&c| &g[c]).sum()
}

/// Scale a rational vector to the primitive integer vector with the same direction.
pub fn integer_certificate(g: &[BigRational]) -> Vec<BigInt> {
    let l = g.iter().fold(BigInt::one(), |a, r| a.lcm(r.denom()));
    let ints: Vec<BigInt> = g.iter().map(|r| r.numer() * (&l / r.denom())).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    if gcd.is_zero() || gcd.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &gcd).collect()
    }
}

/// Sign of `⟨g, f̃_i⟩` per row with an integer-scaled certificate.
struct SignOracle {
    small: Option<Vec<i64>>,
    big: Vec<BigInt>,
}

impl SignOracle {
    fn new(g: &[BigRational]) -> SignOracle {
        let big = integer_certificate(g);
        let small = big.iter().map(|x| x.to_i64()).collect();
        SignOracle { small, big }
    }

    fn sign(&self, cols: &[usize]) -> Ordering {
        match &self.small {
            Some(s) => cols.iter().map(|&c| s[c] as i128).sum::<i128>().cmp(&0),
            None => cols.iter().map(|&c| &self.big[c]).sum::<BigInt>().cmp(&BigInt::zero()),
        }
    }
}

fn verify_rows(face: &Face, rows: &[Vec<usize>]) -> Result<()> {
    let oracle = SignOracle::new(&face.g);
    let mut k = 0;
    for (i, cols) in rows.iter().enumerate() {
        let on = k < face.facial_set.len() && face.facial_set[k] == i;
        if on {
            k += 1;
        }
        match (oracle.sign(cols), on) {
            (Ordering::Equal, true) | (Ordering::Greater, false) => {}
            (s, _) => {
                return Err(Error::Certificate(format!(
                    "cell {i}: ⟨g, f̃_i⟩ has sign {s:?} but membership is {on}"
                )))
            }
        }
    }
    Ok(())
}

/// Check the certificate property of `face` against every cell of `model`.
pub fn verify_certificate(face: &Face, model: &Model) -> Result<()> {
    let rows = all_lifted_rows(model)?;
    if face.g.len() != model.j_len() + 1 || face.cells != rows.len() {
        return Err(Error::Certificate("face does not belong to this model".into()));
    }
    verify_rows(face, &rows)
}

/// Rank of `{f̃_i : i ∈ ℱ}` over the rationals.
pub fn face_dimension(facial_set: &[usize], model: &Model) -> usize {
    face_ranks(facial_set, model).0
}

/// `(lifted rank, bare rank)` of the rows indexed by `facial_set`.
pub fn face_ranks(facial_set: &[usize], model: &Model) -> (usize, usize) {
    let rows: Vec<Vec<usize>> = facial_set.iter().map(|&i| lifted_cols(model, i)).collect();
    ranks(rows.iter().map(|r| r.as_slice()), model.j_len() + 1)
}

fn ranks<'a>(rows: impl Iterator<Item = &'a [usize]> + Clone, d: usize) -> (usize, usize) {
    let lifted = rank_sparse(rows.clone(), d);
    let bare: Vec<Vec<usize>> = rows.map(|r| r.iter().filter(|&&c| c > 0).map(|c| c - 1).collect()).collect();
    (lifted, rank_sparse(bare.iter().map(|r| r.as_slice()), d - 1))
}

/// `mle_exists` together with the smallest face.
pub fn mle_exists(counts: &[u64], model: &Model) -> Result<(bool, Face)> {
    let face = smallest_face(counts, model)?;
    Ok((!face.is_proper(), face))
}

/// Independent slow check: cell `i` lies in the smallest face containing `t̃` iff some
/// conic representation `t̃ = Σ μ_k f̃_k` puts positive weight on it.
pub fn facial_set_by_membership(counts: &[u64], model: &Model) -> Result<Vec<usize>> {
    let rows = all_lifted_rows(model)?;
    let t = stats_from_counts(counts, model)?.lifted();
    let mut out = Vec::new();
    for i in 0..rows.len() {
        let mut obj = vec![0i64; rows.len()];
        obj[i] = 1;
        let mut lp = Lp::new(obj);
        for (c, &tc) in t.iter().enumerate() {
            let coeffs: Vec<(usize, i64)> = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.contains(&c))
                .map(|(k, _)| (k, 1))
                .collect();
            lp.constrain(coeffs, Cmp::Eq, tc);
        }
        // the intercept row Σ μ_k = N keeps the program bounded
        match lp::solve(&lp)? {
            LpOutcome::Optimal { value, .. } if value.is_positive() => out.push(i),
            LpOutcome::Optimal { .. } => {}
            other => return Err(Error::Lp(format!("membership program returned {other:?}"))),
        }
    }
    Ok(out)
}

/// The hierarchical model induced on a vertex subset, with its J-coordinate map.
#[derive(Debug, Clone)]
pub struct MarginalModel {
    pub model: Model,
    /// Global variable ids, sorted; local variable `k` is `vars[k]`.
    pub vars: Vec<usize>,
    /// Local `j` → global `j`.
    pub j_map: Vec<usize>,
}

impl MarginalModel {
    /// Coordinate projection of a global statistic onto `J_A`.
    pub fn project_stat(&self, t: &SuffStat) -> SuffStat {
        SuffStat { n: t.n, t: self.j_map.iter().map(|&j| t.t[j]).collect() }
    }

    /// Marginal table of a full-table count vector.
    pub fn project_counts(&self, counts: &[u64], model: &Model) -> Result<Vec<u64>> {
        let mut out = vec![0u64; self.model.table_size()?];
        for (k, &c) in counts.iter().enumerate() {
            if c > 0 {
                out[self.local_cell_index(&model.cell_at(k))] += c;
            }
        }
        Ok(out)
    }

    /// Local cell index of the restriction of a global cell.
    pub fn local_cell_index(&self, cell: &[usize]) -> usize {
        let local: Vec<usize> = self.vars.iter().map(|&v| cell[v]).collect();
        self.model.cell_index(&local)
    }
}

/// `𝒟_A = {D ∈ 𝒟 : D ⊆ A}` on the variables of `A`.
pub fn induced_marginal_model(model: &Model, subset: &[usize]) -> Result<MarginalModel> {
    if subset.is_empty() {
        return Err(Error::Invalid("empty vertex subset".into()));
    }
    let mut vars = subset.to_vec();
    vars.sort_unstable();
    vars.dedup();
    if let Some(&v) = vars.iter().find(|&&v| v >= model.p()) {
        return Err(Error::UnknownVertex(v + 1));
    }
    let a = mask_of(&vars);
    let pos = |v: usize| vars.binary_search(&v).unwrap();
    let class: Vec<Vec<usize>> = model
        .interactions()
        .iter()
        .filter(|d| d.mask & !a == 0)
        .map(|d| d.vars.iter().map(|&v| pos(v)).collect())
        .collect();
    let levels: Vec<usize> = vars.iter().map(|&v| model.levels()[v]).collect();
    let names: Vec<String> = vars.iter().map(|&v| model.names()[v].clone()).collect();
    let local = Model::from_generating_class(levels, &class)?
        .with_names(names)?
        .with_budget(model.budget());
    let mut j_map = Vec::with_capacity(local.j_len());
    for jl in 0..local.j_len() {
        let mut cell = vec![0; model.p()];
        for (k, &l) in local.j_cell(jl).iter().enumerate() {
            cell[vars[k]] = l;
        }
        j_map.push(
            model
                .j_index_of_cell(&cell)
                .ok_or_else(|| Error::Invalid("coordinate map mismatch".into()))?,
        );
    }
    Ok(MarginalModel { model: local, vars, j_map })
}

/// Lift a face of the marginal cone on `A` to the global cone.
pub fn extend_face(face: &Face, marginal: &MarginalModel, model: &Model) -> Result<Face> {
    if face.g.len() != marginal.j_map.len() + 1 {
        return Err(Error::Invalid("coordinate map mismatch".into()));
    }
    let n = model.table_size()?;
    let mut g = vec![BigRational::zero(); model.j_len() + 1];
    g[0] = face.g[0].clone();
    for (jl, &j) in marginal.j_map.iter().enumerate() {
        g[j + 1] = face.g[jl + 1].clone();
    }
    let mut local_on = vec![false; face.cells];
    for &i in &face.facial_set {
        local_on[i] = true;
    }
    let facial_set: Vec<usize> = (0..n)
        .filter(|&k| local_on[marginal.local_cell_index(&model.cell_at(k))])
        .collect();
    let (dimension, cone_dimension) = face_ranks(&facial_set, model);
    Ok(Face { g, facial_set, dimension, cone_dimension, cells: n })
}

/// `g = Σ g_l`, `ℱ = ∩ ℱ_l`, with the certificate re-checked exactly.
pub fn intersect_faces(faces: &[Face], model: &Model) -> Result<Face> {
    let n = model.table_size()?;
    let d = model.j_len() + 1;
    if faces.is_empty() {
        return Err(Error::Invalid("no faces to intersect".into()));
    }
    let mut g = vec![BigRational::zero(); d];
    for f in faces {
        if f.g.len() != d || f.cells != n {
            return Err(Error::Invalid("faces belong to different models".into()));
        }
        for (a, b) in g.iter_mut().zip(&f.g) {
            *a += b;
        }
    }
    let mut facial_set = faces[0].facial_set.clone();
    for f in &faces[1..] {
        facial_set.retain(|i| f.facial_set.binary_search(i).is_ok());
    }
    let (dimension, cone_dimension) = face_ranks(&facial_set, model);
    let face = Face { g, facial_set, dimension, cone_dimension, cells: n };
    verify_certificate(&face, model)?;
    Ok(face)
}

/// Subsets of consecutive rows of a lattice model, `window` rows at a time.
pub fn row_windows(model: &Model, window: usize) -> Result<Vec<Vec<usize>>> {
    let (rows, cols) = model
        .lattice_shape()
        .ok_or_else(|| Error::Invalid("row windows need a lattice model".into()))?;
    if window == 0 || window > rows {
        return Err(Error::Invalid(format!("window of {window} rows on a {rows}-row lattice")));
    }
    Ok((0..=rows - window)
        .map(|r| (r * cols..(r + window) * cols).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceStatus {
    /// A proper face containing the data was found: the MLE does not exist.
    Proper,
    /// Every cell is observed, so the statistic is in the relative interior.
    Interior,
    /// All local faces were full; the procedure gives no information.
    Uninformative,
}

#[derive(Debug, Clone)]
pub struct LocalFaceReport {
    pub face: Face,
    pub subsets: Vec<Vec<usize>>,
    pub local_j_sizes: Vec<usize>,
    pub local_dimensions: Vec<usize>,
    pub extended_dimensions: Vec<usize>,
    pub local_cone_dimensions: Vec<usize>,
    pub extended_cone_dimensions: Vec<usize>,
    pub status: FaceStatus,
}

impl LocalFaceReport {
    pub fn proper(&self) -> bool {
        self.status == FaceStatus::Proper
    }
}

/// Data handed to the local pipeline.
#[derive(Debug, Clone, Copy)]
pub enum Observed<'a> {
    /// Full-table counts of the global model.
    Counts(&'a [u64]),
    /// A sufficient statistic only; `N` may be unknown.
    Statistic { t: &'a [u64], n: Option<u64> },
}

/// Split–extend–intersect: faces of induced marginal models, extended and intersected.
pub fn local_face_analysis(
    model: &Model,
    subsets: &[Vec<usize>],
    data: Observed<'_>,
    opts: &FaceOptions,
) -> Result<LocalFaceReport> {
    let covered: std::collections::HashSet<u64> = subsets
        .iter()
        .flat_map(|a| {
            let m = mask_of(a);
            model.interactions().iter().filter(move |d| d.mask & !m == 0).map(|d| d.mask)
        })
        .collect();
    if covered.len() < model.interactions().len() {
        log::warn!(
            "subsets cover {} of {} interaction sets",
            covered.len(),
            model.interactions().len()
        );
    }
    let stat = match data {
        Observed::Counts(c) => stats_from_counts(c, model)?,
        Observed::Statistic { t, n } => {
            if t.len() != model.j_len() {
                return Err(Error::Invalid(format!(
                    "statistic has {} entries, |J| = {}",
                    t.len(),
                    model.j_len()
                )));
            }
            SuffStat { n: n.unwrap_or(0), t: t.to_vec() }
        }
    };
    let pin = opts.pin_intercept || matches!(data, Observed::Statistic { n: None, .. });
    let local_opts = FaceOptions { pin_intercept: pin, ..*opts };

    let per_subset: Vec<Result<(MarginalModel, Face)>> = {
        use rayon::prelude::*;
        subsets
            .par_iter()
            .map(|a| {
                let mm = induced_marginal_model(model, a)?;
                let face = match data {
                    Observed::Counts(c) => {
                        smallest_face_with(&mm.project_counts(c, model)?, &mm.model, &local_opts)?
                    }
                    Observed::Statistic { .. } => smallest_face_of_statistic(
                        &mm.project_stat(&stat).lifted(),
                        &mm.model,
                        &local_opts,
                    )?,
                };
                Ok((mm, face))
            })
            .collect()
    };
    let mut local_dimensions = Vec::new();
    let mut local_cone_dimensions = Vec::new();
    let mut local_j_sizes = Vec::new();
    let mut extended = Vec::new();
    for r in per_subset {
        let (mm, face) = r?;
        local_dimensions.push(face.dimension);
        local_cone_dimensions.push(face.cone_dimension);
        local_j_sizes.push(mm.j_map.len());
        extended.push(extend_face(&face, &mm, model)?);
    }
    let extended_dimensions = extended.iter().map(|f| f.dimension).collect();
    let extended_cone_dimensions = extended.iter().map(|f| f.cone_dimension).collect();
    let face = intersect_faces(&extended, model)?;
    if !face.evaluate(&stat.lifted()).is_zero() && !pin {
        return Err(Error::Certificate("intersection does not contain t".into()));
    }
    let status = if face.is_proper() {
        FaceStatus::Proper
    } else if matches!(data, Observed::Counts(c) if c.iter().all(|&x| x > 0)) {
        FaceStatus::Interior
    } else {
        FaceStatus::Uninformative
    };
    Ok(LocalFaceReport {
        face,
        subsets: subsets.to_vec(),
        local_j_sizes,
        local_dimensions,
        extended_dimensions,
        local_cone_dimensions,
        extended_cone_dimensions,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn single_variable_zero_cell() {
        let m = Model::from_generating_class(vec![2], &[vec![0]]).unwrap();
        assert_eq!(partition_rows(&[0, 5]).unwrap(), (vec![1], vec![0]));
        let f = smallest_face(&[0, 5], &m).unwrap();
        assert_eq!(f.facial_set, vec![1]);
        assert_eq!(f.dimension, 1);
        // g ∝ (1, −1): positive on cell 0, zero on cell 1
        assert!(f.g[0].is_positive());
        assert_eq!(&f.g[0] + &f.g[1], big(0));
        assert!(f.is_proper());
        assert!(f.evaluate(&[5, 5]).is_zero());
        let (exists, _) = mle_exists(&[3, 2], &m).unwrap();
        assert!(exists);
    }

    #[test]
    fn all_positive_gives_whole_cone() {
        let m = Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap();
        let f = smallest_face(&[1, 2, 3, 4], &m).unwrap();
        assert!(f.g_is_zero());
        assert_eq!(f.facial_set, vec![0, 1, 2, 3]);
        assert_eq!(f.dimension, 4);
    }

    #[test]
    fn all_zero_counts_rejected() {
        assert!(partition_rows(&[0, 0]).is_err());
    }

    #[test]
    fn edge_missing_corner_matches_membership_oracle() {
        let m = Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap();
        // saturated binary edge: a zero cell is its own facet
        let counts = [3, 2, 4, 0];
        let f = smallest_face(&counts, &m).unwrap();
        assert_eq!(f.facial_set, facial_set_by_membership(&counts, &m).unwrap());
        assert_eq!(f.facial_set, vec![0, 1, 2]);
    }

    #[test]
    fn independence_model_zero_cell_is_not_a_face() {
        // main effects only: one empty cell keeps the MLE in the interior
        let m = Model::from_generating_class(vec![2, 2], &[vec![0], vec![1]]).unwrap();
        let (exists, f) = mle_exists(&[3, 2, 4, 0], &m).unwrap();
        assert!(exists);
        assert_eq!(f.facial_set.len(), 4);
    }

    #[test]
    fn induced_model_and_identity_extension() {
        let m = Model::lattice(2, 2).unwrap();
        let mm = induced_marginal_model(&m, &[0, 1, 2, 3]).unwrap();
        assert_eq!(mm.j_map, (0..m.j_len()).collect::<Vec<_>>());
        let counts: Vec<u64> = (0..16).map(|k| if k % 5 == 0 { 0 } else { 1 }).collect();
        let f = smallest_face(&counts, &m).unwrap();
        let e = extend_face(&f, &mm, &m).unwrap();
        assert_eq!(e, f);
        assert!(induced_marginal_model(&m, &[]).is_err());
    }

    #[test]
    fn lattice_row_windows_have_eighteen_parameters() {
        let m = Model::lattice(4, 4).unwrap();
        let windows = row_windows(&m, 2).unwrap();
        assert_eq!(windows.len(), 3);
        for w in &windows {
            assert_eq!(induced_marginal_model(&m, w).unwrap().j_map.len(), 18);
        }
    }

    #[test]
    fn intersection_identities() {
        let m = Model::lattice(2, 2).unwrap();
        let mut counts = vec![1u64; 16];
        counts[15] = 0;
        counts[3] = 0;
        let f = smallest_face(&counts, &m).unwrap();
        let full = smallest_face(&[1; 16], &m).unwrap();
        let a = intersect_faces(&[f.clone(), full], &m).unwrap();
        assert_eq!(a.facial_set, f.facial_set);
        let b = intersect_faces(&[f.clone(), f.clone()], &m).unwrap();
        assert_eq!(b.facial_set, f.facial_set);
        assert_eq!(b.dimension, f.dimension);
    }

    #[test]
    fn broken_certificate_is_rejected() {
        let m = Model::from_generating_class(vec![2], &[vec![0]]).unwrap();
        let bad = Face {
            g: vec![big(-1), big(1)],
            facial_set: vec![1],
            dimension: 1,
            cone_dimension: 1,
            cells: 2,
        };
        assert!(matches!(verify_certificate(&bad, &m), Err(Error::Certificate(_))));
    }

    #[test]
    fn dimensions_of_simple_sets() {
        let m = Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap();
        assert_eq!(face_dimension(&[0], &m), 1);
        assert_eq!(face_dimension(&[0, 1, 2, 3], &m), 4);
    }

    #[test]
    fn integer_certificate_is_primitive() {
        let g = vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-3).into(), 4.into()),
            big(0),
        ];
        assert_eq!(
            integer_certificate(&g),
            vec![BigInt::from(2), BigInt::from(-3), BigInt::from(0)]
        );
    }
}
