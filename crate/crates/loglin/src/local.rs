//! Per-vertex local structures: neighbourhoods, buffer sets, conditional index
//! sets and relaxed marginal models.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{mask_of, vars_of, Model};
use crate::param::{baseline_coefficients, theta_to_probabilities};

/// Default cap on `|B_v|`; the saturated buffer block has `∏_{w∈B_v} |I_w|` cells.
pub const DEFAULT_BUFFER_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighborhood {
    pub v: usize,
    pub hop: usize,
    /// `M_v`, sorted.
    pub m: Vec<usize>,
    /// One-hop neighbours `N_v`.
    pub n1: Vec<usize>,
    /// Neighbours of neighbours `N_2v` (empty for `hop = 1`).
    pub n2: Vec<usize>,
    /// Buffer `B_v`: vertices of `M_v` with a neighbour outside `M_v`.
    pub buffer: Vec<usize>,
}

impl Neighborhood {
    pub fn m_mask(&self) -> u64 {
        mask_of(&self.m)
    }
    pub fn buffer_mask(&self) -> u64 {
        mask_of(&self.buffer)
    }
    /// The conditioned-on block complement: `{v}` for one hop, `{v} ∪ N_v` for two.
    pub fn block_mask(&self) -> u64 {
        if self.hop == 1 {
            1 << self.v
        } else {
            (1 << self.v) | mask_of(&self.n1)
        }
    }
    /// The outer shell that the conditional model conditions on.
    pub fn shell(&self) -> &[usize] {
        if self.hop == 1 {
            &self.n1
        } else {
            &self.n2
        }
    }
    /// Whether the equality theorem applies: the buffer is the whole outer shell.
    pub fn equality_hypothesis(&self) -> bool {
        self.buffer.as_slice() == self.shell()
    }
}

pub fn neighborhood(model: &Model, v: usize, hop: usize) -> Result<Neighborhood> {
    if v >= model.p() {
        return Err(Error::UnknownVertex(v + 1));
    }
    if hop != 1 && hop != 2 {
        return Err(Error::Invalid(format!("hop must be 1 or 2, got {hop}")));
    }
    let adj = model.adjacency();
    let n1 = adj[v];
    let mut m = n1 | (1 << v);
    let mut n2 = 0u64;
    if hop == 2 {
        let reach = vars_of(n1).into_iter().fold(0u64, |a, w| a | adj[w]);
        n2 = reach & !m;
        m |= n2;
    }
    let buffer = vars_of(m)
        .into_iter()
        .filter(|&w| adj[w] & !m != 0)
        .collect();
    Ok(Neighborhood {
        v,
        hop,
        m: vars_of(m),
        n1: vars_of(n1),
        n2: vars_of(n2),
        buffer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalKind {
    #[serde(rename = "ps")]
    Ps,
    #[serde(rename = "ps2")]
    Ps2,
    #[serde(rename = "m1")]
    M1,
    #[serde(rename = "m2")]
    M2,
}

impl LocalKind {
    pub fn hop(self) -> usize {
        match self {
            LocalKind::Ps | LocalKind::M1 => 1,
            LocalKind::Ps2 | LocalKind::M2 => 2,
        }
    }
    pub fn is_conditional(self) -> bool {
        matches!(self, LocalKind::Ps | LocalKind::Ps2)
    }
    pub fn name(self) -> &'static str {
        match self {
            LocalKind::Ps => "ps",
            LocalKind::Ps2 => "ps2",
            LocalKind::M1 => "m1",
            LocalKind::M2 => "m2",
        }
    }
    pub fn conditional(hop: usize) -> LocalKind {
        if hop == 1 {
            LocalKind::Ps
        } else {
            LocalKind::Ps2
        }
    }
    pub fn marginal(hop: usize) -> LocalKind {
        if hop == 1 {
            LocalKind::M1
        } else {
            LocalKind::M2
        }
    }
}

impl std::str::FromStr for LocalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ps" => Ok(LocalKind::Ps),
            "ps2" => Ok(LocalKind::Ps2),
            "m1" => Ok(LocalKind::M1),
            "m2" => Ok(LocalKind::M2),
            _ => Err(Error::Invalid(format!("unknown local model kind '{s}'"))),
        }
    }
}

/// The conditional model of the block around `v` given its outer shell.
#[derive(Debug, Clone)]
pub struct ConditionalModel {
    pub kind: LocalKind,
    pub nbhd: Neighborhood,
    /// Global J indices in j-order: `J^{PS_v}` or `J^{PS_{2,v}}`.
    pub j_indices: Vec<usize>,
}

impl ConditionalModel {
    /// `d_v`
    pub fn dim(&self) -> usize {
        self.j_indices.len()
    }
}

pub fn conditional_index_set(model: &Model, v: usize, hop: usize) -> Result<ConditionalModel> {
    let nbhd = neighborhood(model, v, hop)?;
    let m = nbhd.m_mask();
    let block = nbhd.block_mask();
    let j_indices = (0..model.j_len())
        .filter(|&j| {
            let s = model.j_support(j);
            s & !m == 0 && s & block != 0
        })
        .collect();
    Ok(ConditionalModel { kind: LocalKind::conditional(hop), nbhd, j_indices })
}

/// One coordinate of a relaxed marginal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalCoord {
    /// The global J element with the same cell, when there is one.
    pub global: Option<usize>,
    /// Whether the support lies inside the buffer (a free saturated-block term).
    pub buffer: bool,
}

/// Hierarchical model on `M_v` keeping every interaction not contained in the buffer
/// and the saturated interaction block of the buffer.
#[derive(Debug, Clone)]
pub struct RelaxedModel {
    pub kind: LocalKind,
    pub nbhd: Neighborhood,
    /// Model over the variables of `M_v` (local variable `k` is `nbhd.m[k]`).
    pub model: Model,
    pub coords: Vec<LocalCoord>,
    /// `(local j, global j)` for the conditional index set, in global j-order.
    pub ps_positions: Vec<(usize, usize)>,
}

impl RelaxedModel {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Restrict a global cell to the local variables.
    pub fn local_cell(&self, cell: &[usize]) -> Vec<usize> {
        self.nbhd.m.iter().map(|&v| cell[v]).collect()
    }
}

pub fn relaxed_marginal_model(model: &Model, v: usize, hop: usize) -> Result<RelaxedModel> {
    relaxed_marginal_model_capped(model, v, hop, DEFAULT_BUFFER_CAP)
}

pub fn relaxed_marginal_model_capped(
    model: &Model,
    v: usize,
    hop: usize,
    buffer_cap: usize,
) -> Result<RelaxedModel> {
    let nbhd = neighborhood(model, v, hop)?;
    if nbhd.buffer.len() > buffer_cap {
        return Err(Error::BufferTooLarge { size: nbhd.buffer.len(), cap: buffer_cap });
    }
    let m = nbhd.m_mask();
    let b = nbhd.buffer_mask();
    let local_of = |mask: u64| -> Vec<usize> {
        vars_of(mask)
            .into_iter()
            .map(|w| nbhd.m.binary_search(&w).unwrap())
            .collect()
    };
    let mut class: Vec<Vec<usize>> = model
        .interactions()
        .iter()
        .filter(|d| d.mask & !m == 0 && d.mask & !b != 0)
        .map(|d| local_of(d.mask))
        .collect();
    // all non-empty subsets of the buffer
    let bvars = vars_of(b);
    for sub in 1u64..(1u64 << bvars.len()) {
        let mask = vars_of(sub).into_iter().fold(0u64, |a, k| a | (1 << bvars[k]));
        class.push(local_of(mask));
    }
    let levels: Vec<usize> = nbhd.m.iter().map(|&w| model.levels()[w]).collect();
    let names: Vec<String> = nbhd.m.iter().map(|&w| model.names()[w].clone()).collect();
    let local = Model::from_generating_class(levels, &class)?
        .with_names(names)?
        .with_budget(model.budget());
    local.table_size()?;

    let mut coords = Vec::with_capacity(local.j_len());
    for jl in 0..local.j_len() {
        let mut cell = vec![0; model.p()];
        for (k, &l) in local.j_cell(jl).iter().enumerate() {
            cell[nbhd.m[k]] = l;
        }
        let s = crate::model::support(&cell);
        coords.push(LocalCoord { global: model.j_index_of_cell(&cell), buffer: s & !b == 0 });
    }
    let cond = conditional_index_set(model, v, hop)?;
    let mut ps_positions = Vec::with_capacity(cond.dim());
    for &j in &cond.j_indices {
        let jl = coords
            .iter()
            .position(|c| !c.buffer && c.global == Some(j))
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "conditional coordinate {} missing from the relaxed model",
                    model.j_label(j)
                ))
            })?;
        ps_positions.push((jl, j));
    }
    Ok(RelaxedModel { kind: LocalKind::marginal(hop), nbhd, model: local, coords, ps_positions })
}

/// Exact marginal parameters on the `M_v` table: θ → p → marginal → baseline
/// coefficients, indexed by the cells of the `M_v` table (`θ^{M_v}_0` at cell 0).
pub fn marginalize_theta(theta: &[f64], nbhd: &Neighborhood, model: &Model) -> Result<Vec<f64>> {
    let p = theta_to_probabilities(theta, model)?;
    let levels: Vec<usize> = nbhd.m.iter().map(|&w| model.levels()[w]).collect();
    let singletons: Vec<Vec<usize>> = (0..levels.len()).map(|k| vec![k]).collect();
    let table = Model::from_generating_class(levels, &singletons)?.with_budget(model.budget());
    let mut marg = vec![0.0; table.table_size()?];
    for (k, &q) in p.iter().enumerate() {
        let cell = model.cell_at(k);
        let local: Vec<usize> = nbhd.m.iter().map(|&w| cell[w]).collect();
        marg[table.cell_index(&local)] += q;
    }
    baseline_coefficients(&marg, &table)
}

/// Position of a global cell's restriction in the `M_v` table of [`marginalize_theta`].
pub fn local_table_index(cell: &[usize], nbhd: &Neighborhood, model: &Model) -> usize {
    nbhd.m.iter().fold(0usize, |a, &w| a * model.levels()[w] + cell[w])
}
