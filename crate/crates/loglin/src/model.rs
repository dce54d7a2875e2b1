//! Hierarchical loglinear models: variables, generating class and the J-set.
//!
//! Variables are numbered `0..p` internally (file formats are 1-based).
//! Level 0 of every variable is the designated baseline level. Interaction
//! sets are stored as `u64` bitmasks, so at most 64 variables are supported.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Default cap on the number of full-table cells an exact computation may touch.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 20;
/// Default cap on the size of enumerated cliques when building from a graph.
pub const DEFAULT_MAX_CLIQUE: usize = 8;
pub const MAX_VARIABLES: usize = 64;

/// One member `D` of the generating class together with its block of J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    /// Sorted variable ids.
    pub vars: Vec<usize>,
    pub mask: u64,
    /// Position of the first J element with support `D`.
    pub offset: usize,
    /// Number of J elements with support `D`: the product of `|I_v| - 1`.
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct Model {
    names: Vec<String>,
    levels: Vec<usize>,
    edges: Option<Vec<(usize, usize)>>,
    lattice: Option<(usize, usize)>,
    interactions: Vec<Interaction>,
    by_mask: HashMap<u64, usize>,
    j_owner: Vec<usize>,
    strides: Vec<usize>,
    budget: usize,
}

pub fn mask_of(vars: &[usize]) -> u64 {
    vars.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

pub fn vars_of(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out.push(v);
        m &= m - 1;
    }
    out
}

fn canonical_cmp(a: &u64, b: &u64) -> std::cmp::Ordering {
    a.count_ones()
        .cmp(&b.count_ones())
        .then_with(|| vars_of(*a).cmp(&vars_of(*b)))
}

impl Model {
    /// Graphical model: the generating class is every complete subset of the graph.
    pub fn from_graph(levels: Vec<usize>, edges: &[(usize, usize)]) -> Result<Model> {
        Self::from_graph_capped(levels, edges, DEFAULT_MAX_CLIQUE)
    }

    pub fn from_graph_capped(
        levels: Vec<usize>,
        edges: &[(usize, usize)],
        max_clique: usize,
    ) -> Result<Model> {
        let p = levels.len();
        check_levels(&levels)?;
        let mut adj = vec![0u64; p];
        let mut clean = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::InvalidModel(format!(
                    "edge ({}, {}) refers to a missing variable",
                    a + 1,
                    b + 1
                )));
            }
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop at variable {}", a + 1)));
            }
            let (u, w) = if a < b { (a, b) } else { (b, a) };
            if adj[u] & (1 << w) != 0 {
                return Err(Error::InvalidModel(format!(
                    "duplicate edge ({}, {})",
                    u + 1,
                    w + 1
                )));
            }
            adj[u] |= 1 << w;
            adj[w] |= 1 << u;
            clean.push((u, w));
        }
        clean.sort_unstable();

        let mut class = Vec::new();
        for v in 0..p {
            let higher = adj[v] & !((2u64 << v).wrapping_sub(1));
            extend_cliques(1u64 << v, higher, &adj, max_clique, &mut class);
        }
        let mut model = Self::assemble(levels, class)?;
        model.edges = Some(clean);
        Ok(model)
    }

    /// Hierarchical model from an explicit, downward-closed generating class.
    pub fn from_generating_class(levels: Vec<usize>, class: &[Vec<usize>]) -> Result<Model> {
        check_levels(&levels)?;
        let p = levels.len();
        let mut masks = Vec::with_capacity(class.len());
        for d in class {
            if d.is_empty() {
                return Err(Error::InvalidModel("empty interaction set".into()));
            }
            if let Some(&v) = d.iter().find(|&&v| v >= p) {
                return Err(Error::InvalidModel(format!(
                    "interaction refers to missing variable {}",
                    v + 1
                )));
            }
            masks.push(mask_of(d));
        }
        masks.sort_unstable();
        masks.dedup();
        let present: std::collections::HashSet<u64> = masks.iter().copied().collect();
        for &m in &masks {
            if m.count_ones() < 2 {
                continue;
            }
            for v in vars_of(m) {
                let sub = m & !(1 << v);
                if !present.contains(&sub) {
                    return Err(Error::NotDownwardClosed {
                        set: vars_of(m).iter().map(|x| x + 1).collect(),
                        missing: vars_of(sub).iter().map(|x| x + 1).collect(),
                    });
                }
            }
        }
        Self::assemble(levels, masks)
    }

    /// Binary four-neighbour `rows x cols` lattice, vertices numbered row-major.
    pub fn lattice(rows: usize, cols: usize) -> Result<Model> {
        Self::lattice_with_levels(rows, cols, 2)
    }

    pub fn lattice_with_levels(rows: usize, cols: usize, levels: usize) -> Result<Model> {
        let mut model = Self::from_graph(vec![levels; rows * cols], &lattice_edges(rows, cols))?;
        model.lattice = Some((rows, cols));
        Ok(model)
    }

    fn assemble(levels: Vec<usize>, mut masks: Vec<u64>) -> Result<Model> {
        let p = levels.len();
        masks.sort_by(canonical_cmp);
        masks.dedup();
        let covered = masks.iter().fold(0u64, |a, &m| a | m);
        for v in 0..p {
            if covered & (1 << v) == 0 {
                log::warn!("variable {} is not covered by the generating class", v + 1);
            }
        }
        let mut interactions = Vec::with_capacity(masks.len());
        let mut by_mask = HashMap::with_capacity(masks.len());
        let mut j_owner = Vec::new();
        let mut offset = 0usize;
        for (k, &mask) in masks.iter().enumerate() {
            let vars = vars_of(mask);
            let count = vars
                .iter()
                .try_fold(1usize, |a, &v| a.checked_mul(levels[v] - 1))
                .ok_or_else(|| Error::InvalidModel("J-set too large".into()))?;
            j_owner.extend(std::iter::repeat_n(k, count));
            by_mask.insert(mask, k);
            interactions.push(Interaction { vars, mask, offset, count });
            offset += count;
        }
        let mut strides = vec![1usize; p];
        for v in (0..p.saturating_sub(1)).rev() {
            strides[v] = strides[v + 1].saturating_mul(levels[v + 1]);
        }
        Ok(Model {
            names: (1..=p).map(|v| format!("X{v}")).collect(),
            levels,
            edges: None,
            lattice: None,
            interactions,
            by_mask,
            j_owner,
            strides,
            budget: DEFAULT_CELL_BUDGET,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Model> {
        if names.len() != self.p() {
            return Err(Error::InvalidModel(format!(
                "{} names for {} variables",
                names.len(),
                self.p()
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn with_budget(mut self, budget: usize) -> Model {
        self.budget = budget;
        self
    }

    pub(crate) fn set_lattice(&mut self, rows: usize, cols: usize) {
        self.lattice = Some((rows, cols));
    }

    pub fn p(&self) -> usize {
        self.levels.len()
    }
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn budget(&self) -> usize {
        self.budget
    }
    pub fn edges(&self) -> Option<&[(usize, usize)]> {
        self.edges.as_deref()
    }
    pub fn lattice_shape(&self) -> Option<(usize, usize)> {
        self.lattice
    }
    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }
    pub fn generating_class(&self) -> Vec<Vec<usize>> {
        self.interactions.iter().map(|d| d.vars.clone()).collect()
    }
    pub fn contains_interaction(&self, mask: u64) -> bool {
        self.by_mask.contains_key(&mask)
    }
    pub fn interaction_of_mask(&self, mask: u64) -> Option<&Interaction> {
        self.by_mask.get(&mask).map(|&k| &self.interactions[k])
    }

    /// Graph adjacency masks; for a non-graphical model the 2-section of 𝒟 is used.
    pub fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.p()];
        match &self.edges {
            Some(edges) => {
                for &(a, b) in edges {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
            None => {
                for d in &self.interactions {
                    for &v in &d.vars {
                        adj[v] |= d.mask & !(1 << v);
                    }
                }
            }
        }
        adj
    }

    /// |J|
    pub fn j_len(&self) -> usize {
        self.j_owner.len()
    }

    pub fn j_interaction(&self, j: usize) -> &Interaction {
        &self.interactions[self.j_owner[j]]
    }

    pub fn j_support(&self, j: usize) -> u64 {
        self.j_interaction(j).mask
    }

    /// Levels of `j` on its support variables (in variable order), each ≥ 1.
    pub fn j_levels(&self, j: usize) -> Vec<usize> {
        let d = self.j_interaction(j);
        let mut rem = j - d.offset;
        let mut out = vec![0; d.vars.len()];
        for (k, &v) in d.vars.iter().enumerate().rev() {
            let r = self.levels[v] - 1;
            out[k] = rem % r + 1;
            rem /= r;
        }
        out
    }

    /// `j` as a full cell (zeros off its support).
    pub fn j_cell(&self, j: usize) -> Vec<usize> {
        let mut cell = vec![0; self.p()];
        let d = self.j_interaction(j);
        for (&v, l) in d.vars.iter().zip(self.j_levels(j)) {
            cell[v] = l;
        }
        cell
    }

    /// Position of the J element with support `d` and cell `cell` restricted to it.
    fn j_offset_in(&self, d: &Interaction, cell: &[usize]) -> usize {
        let mut idx = 0usize;
        for &v in &d.vars {
            idx = idx * (self.levels[v] - 1) + (cell[v] - 1);
        }
        d.offset + idx
    }

    /// The J index of a cell whose support is in 𝒟, if any.
    pub fn j_index_of_cell(&self, cell: &[usize]) -> Option<usize> {
        let s = support(cell);
        if s == 0 {
            return None;
        }
        let &k = self.by_mask.get(&s)?;
        Some(self.j_offset_in(&self.interactions[k], cell))
    }

    /// `j ⊴ i`: S(j) ⊆ S(i) and the two cells agree on S(j).
    pub fn precedes(&self, j: usize, cell: &[usize]) -> bool {
        let d = self.j_interaction(j);
        d.vars
            .iter()
            .zip(self.j_levels(j))
            .all(|(&v, l)| cell[v] == l)
    }

    /// The J indices `j ⊴ i`, in increasing order: the support of `f_i`.
    pub fn active_j(&self, cell: &[usize]) -> Vec<usize> {
        let s = support(cell);
        let mut out = Vec::new();
        for d in &self.interactions {
            if d.mask & !s == 0 {
                out.push(self.j_offset_in(d, cell));
            }
        }
        out
    }

    /// Dense 0/1 vector `f_i` over J.
    pub fn f_vector(&self, cell: &[usize]) -> Vec<u8> {
        let mut f = vec![0u8; self.j_len()];
        for j in self.active_j(cell) {
            f[j] = 1;
        }
        f
    }

    /// Number of cells |I|, or `None` on overflow.
    pub fn cell_count(&self) -> Option<usize> {
        self.levels.iter().try_fold(1usize, |a, &l| a.checked_mul(l))
    }

    /// |I|, provided it fits within the exact-evaluation budget.
    pub fn table_size(&self) -> Result<usize> {
        match self.cell_count() {
            Some(n) if n <= self.budget => Ok(n),
            Some(n) => Err(Error::TooLarge { cells: n.to_string(), budget: self.budget }),
            None => Err(Error::TooLarge {
                cells: format!("more than {}", usize::MAX),
                budget: self.budget,
            }),
        }
    }

    /// Mixed-radix position of a cell; variable 0 is the most significant digit.
    pub fn cell_index(&self, cell: &[usize]) -> usize {
        cell.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn cell_at(&self, mut index: usize) -> Vec<usize> {
        let mut cell = vec![0; self.p()];
        for v in (0..self.p()).rev() {
            cell[v] = index % self.levels[v];
            index /= self.levels[v];
        }
        cell
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn check_cell(&self, cell: &[usize]) -> Result<()> {
        if cell.len() != self.p() {
            return Err(Error::Invalid(format!(
                "cell has {} coordinates, model has {} variables",
                cell.len(),
                self.p()
            )));
        }
        for (v, (&c, &l)) in cell.iter().zip(&self.levels).enumerate() {
            if c >= l {
                return Err(Error::Invalid(format!(
                    "level {c} out of range for variable {} with {l} levels",
                    v + 1
                )));
            }
        }
        Ok(())
    }

    /// Human-readable name of a J element, e.g. `X1=1,X2=1`.
    pub fn j_label(&self, j: usize) -> String {
        let d = self.j_interaction(j);
        d.vars
            .iter()
            .zip(self.j_levels(j))
            .map(|(&v, l)| format!("{}={}", self.names[v], l))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Support mask of a cell.
pub fn support(cell: &[usize]) -> u64 {
    cell.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .fold(0u64, |m, (v, _)| m | (1 << v))
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidModel("a model needs at least one variable".into()));
    }
    if levels.len() > MAX_VARIABLES {
        return Err(Error::InvalidModel(format!(
            "{} variables exceeds the limit of {MAX_VARIABLES}",
            levels.len()
        )));
    }
    if let Some(v) = levels.iter().position(|&l| l < 2) {
        return Err(Error::InvalidModel(format!(
            "variable {} has fewer than two levels",
            v + 1
        )));
    }
    Ok(())
}

fn extend_cliques(clique: u64, cands: u64, adj: &[u64], cap: usize, out: &mut Vec<u64>) {
    out.push(clique);
    if clique.count_ones() as usize >= cap {
        return;
    }
    let mut c = cands;
    while c != 0 {
        let w = c.trailing_zeros() as usize;
        c &= c - 1;
        let higher = !((2u64 << w).wrapping_sub(1));
        extend_cliques(clique | (1 << w), cands & adj[w] & higher, adj, cap, out);
    }
}

/// Edges of the four-neighbour lattice, 0-based row-major vertex ids.
pub fn lattice_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Model {
        Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap()
    }

    #[test]
    fn lattice_4x4_sizes() {
        let m = Model::lattice(4, 4).unwrap();
        assert_eq!(m.cell_count(), Some(65536));
        assert_eq!(m.j_len(), 40);
    }

    #[test]
    fn small_j_sets() {
        assert_eq!(edge().j_len(), 3);
        let m = Model::from_generating_class(vec![3], &[vec![0]]).unwrap();
        assert_eq!(m.j_len(), 2);
        assert_eq!(m.j_cell(0), vec![1]);
        assert_eq!(m.j_cell(1), vec![2]);
    }

    #[test]
    fn j_order_is_size_then_lexicographic() {
        let m = Model::from_graph(vec![2, 2, 2], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let cells: Vec<_> = (0..m.j_len()).map(|j| m.j_cell(j)).collect();
        assert_eq!(
            cells,
            vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![1, 1, 1]
            ]
        );
    }

    #[test]
    fn mixed_levels_ordering_within_block() {
        let m = Model::from_graph(vec![3, 3], &[(0, 1)]).unwrap();
        assert_eq!(m.j_len(), 2 + 2 + 4);
        assert_eq!(m.j_cell(4), vec![1, 1]);
        assert_eq!(m.j_cell(5), vec![1, 2]);
        assert_eq!(m.j_cell(6), vec![2, 1]);
        for j in 0..m.j_len() {
            assert_eq!(m.j_index_of_cell(&m.j_cell(j)), Some(j));
        }
    }

    #[test]
    fn precedes_relation() {
        let m = edge();
        assert!(m.precedes(0, &[1, 1]));
        assert!(!m.precedes(2, &[1, 0]));
        let m3 = Model::from_graph(vec![3, 2], &[(0, 1)]).unwrap();
        // j = (1, 0) against i = (2, 1): levels differ on S(j)
        assert!(!m3.precedes(0, &[2, 1]));
    }

    #[test]
    fn f_vectors() {
        let m = edge();
        assert_eq!(m.f_vector(&[1, 1]), vec![1, 1, 1]);
        assert_eq!(m.f_vector(&[0, 0]), vec![0, 0, 0]);
        let tri = Model::from_graph(vec![2, 2, 2], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let f = tri.f_vector(&[1, 1, 0]);
        // independent oracle: brute-force the relation over J
        for j in 0..tri.j_len() {
            let jc = tri.j_cell(j);
            let below = jc.iter().zip([1, 1, 0]).all(|(&a, b)| a == 0 || a == b);
            assert_eq!(f[j] == 1, below, "j = {jc:?}");
        }
        assert_eq!(f.iter().filter(|&&x| x == 1).count(), 3);
    }

    #[test]
    fn rejects_non_downward_closed() {
        let err = Model::from_generating_class(vec![2, 2], &[vec![0, 1], vec![0]]).unwrap_err();
        assert!(matches!(err, Error::NotDownwardClosed { .. }));
    }

    #[test]
    fn cells_roundtrip_through_index() {
        let m = Model::from_graph(vec![2, 3, 4], &[(0, 1)]).unwrap();
        for k in 0..24 {
            assert_eq!(m.cell_index(&m.cell_at(k)), k);
        }
        assert_eq!(m.cell_at(1), vec![0, 0, 1]);
    }

    #[test]
    fn budget_is_enforced() {
        let m = Model::lattice(5, 10).unwrap();
        assert!(matches!(m.table_size(), Err(Error::TooLarge { .. })));
        assert_eq!(m.j_len(), 50 + 85);
    }

    #[test]
    fn clique_cap_limits_interaction_size() {
        let edges: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let m = Model::from_graph_capped(vec![2; 4], &edges, 2).unwrap();
        assert_eq!(m.j_len(), 4 + 6);
        let full = Model::from_graph(vec![2; 4], &edges).unwrap();
        assert_eq!(full.j_len(), 15);
    }
}
