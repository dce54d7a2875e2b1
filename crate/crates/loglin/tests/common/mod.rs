//! Shared corpora and slow reference computations for the integration tests.
#![allow(dead_code)]

use loglin::lp::{self, Cmp, Lp, LpOutcome};
use loglin::model::Model;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random hierarchical model with at most `max_cells` cells, either graphical or
/// the all-pairs model of a random graph (which is not graphical once the graph has
/// a triangle).
pub fn random_model(rng: &mut ChaCha8Rng, max_cells: usize) -> Model {
    loop {
        let p = rng.random_range(1..=5);
        let levels: Vec<usize> = (0..p).map(|_| if rng.random_bool(0.2) { 3 } else { 2 }).collect();
        if levels.iter().product::<usize>() > max_cells {
            continue;
        }
        let mut edges = Vec::new();
        for a in 0..p {
            for b in a + 1..p {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let model = if rng.random_bool(0.3) {
            let mut class: Vec<Vec<usize>> = (0..p).map(|v| vec![v]).collect();
            class.extend(edges.iter().map(|&(a, b)| vec![a, b]));
            Model::from_generating_class(levels, &class)
        } else {
            Model::from_graph(levels, &edges)
        };
        return model.expect("valid random model");
    }
}

/// Random sparse counts with at most `max_zeros` empty cells and at least one
/// positive cell.
pub fn random_counts(rng: &mut ChaCha8Rng, cells: usize, max_zeros: usize) -> Vec<u64> {
    let zeros = rng.random_range(0..=max_zeros.min(cells - 1));
    let mut idx: Vec<usize> = (0..cells).collect();
    idx.shuffle(rng);
    let mut counts: Vec<u64> = (0..cells).map(|_| rng.random_range(1..=4)).collect();
    for &k in &idx[..zeros] {
        counts[k] = 0;
    }
    counts
}

pub fn corpus(seed: u64, size: usize) -> Vec<(Model, Vec<u64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let m = random_model(&mut rng, 32);
            let cells = m.table_size().unwrap();
            let c = random_counts(&mut rng, cells, 10);
            (m, c)
        })
        .collect()
}

/// Lifted design rows `(1, f_i)` as column lists.
pub fn lifted_rows(model: &Model) -> Vec<Vec<usize>> {
    (0..model.table_size().unwrap())
        .map(|k| {
            let f = model.f_vector(&model.cell_at(k));
            std::iter::once(0).chain(f.iter().enumerate().filter(|(_, &x)| x == 1).map(|(j, _)| j + 1)).collect()
        })
        .collect()
}

/// Whether some `g` vanishes on the rows in `inside` and is strictly positive on the rest.
pub fn is_facial(rows: &[Vec<usize>], d: usize, inside: &[bool]) -> bool {
    // g = g⁺ − g⁻ with both parts non-negative; strict positivity is scaled to ≥ 1
    let mut lp = Lp::new(vec![0; 2 * d]);
    for (r, cols) in rows.iter().enumerate() {
        let coeffs: Vec<(usize, i64)> = cols.iter().flat_map(|&c| [(c, 1), (d + c, -1)]).collect();
        if inside[r] {
            lp.constrain(coeffs, Cmp::Eq, 0);
        } else {
            lp.constrain(coeffs, Cmp::Ge, 1);
        }
    }
    matches!(lp::solve(&lp).unwrap(), LpOutcome::Optimal { .. })
}

/// The smallest facial set containing the positive cells, by enumerating every
/// candidate set in order of size.
pub fn brute_force_facial_set(counts: &[u64], model: &Model) -> Vec<usize> {
    let rows = lifted_rows(model);
    let d = model.j_len() + 1;
    let zeros: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] == 0).collect();
    let mut subsets: Vec<u64> = (0..1u64 << zeros.len()).collect();
    subsets.sort_by_key(|s| s.count_ones());
    for s in subsets {
        let mut inside: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
        for (b, &k) in zeros.iter().enumerate() {
            if s >> b & 1 == 1 {
                inside[k] = true;
            }
        }
        if is_facial(&rows, d, &inside) {
            return (0..counts.len()).filter(|&k| inside[k]).collect();
        }
    }
    unreachable!("the whole cone is always a face")
}

/// Small graphs with at most 2¹² cells.
pub fn small_graphs() -> Vec<Model> {
    let mut out = vec![
        Model::from_graph(vec![2; 3], &[(0, 1), (1, 2)]).unwrap(),
        Model::from_graph(vec![2, 3, 2, 2], &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(),
        Model::from_graph(vec![2; 6], &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap(),
        Model::from_graph(vec![2; 7], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]).unwrap(),
        Model::lattice(2, 2).unwrap(),
        Model::lattice(2, 3).unwrap(),
        Model::lattice(3, 3).unwrap(),
        Model::lattice(3, 4).unwrap(),
        Model::lattice(2, 6).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let p = 8;
        let edges: Vec<(usize, usize)> = (0..p)
            .flat_map(|a| (a + 1..p).map(move |b| (a, b)))
            .filter(|_| rng.random_bool(0.3))
            .collect();
        out.push(Model::from_graph(vec![2; p], &edges).unwrap());
    }
    out
}
