//! Synthetic data: exact inverse-CDF sampling over the table, systematic-scan Gibbs
//! sampling for larger models, and datasets constrained to lie on a face.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{cell_counts, Samples};
use crate::error::{Error, Result};
use crate::faces::{smallest_face, Face};
use crate::model::Model;
use crate::param::{log_sum_exp, theta_to_probabilities};

pub const PRNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Gibbs,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "gibbs" => Ok(Method::Gibbs),
            _ => Err(Error::Invalid(format!("unknown sampling method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub method: Method,
    pub burn_in: usize,
    pub thinning: usize,
    pub n: usize,
}

impl SamplerConfig {
    pub fn exact(n: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { seed, method: Method::Exact, burn_in: 1000, thinning: 10, n }
    }

    pub fn gibbs(n: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { method: Method::Gibbs, ..SamplerConfig::exact(n, seed) }
    }

    /// Exact when the table fits the budget, Gibbs otherwise.
    pub fn auto(model: &Model, n: usize, seed: u64) -> SamplerConfig {
        if model.table_size().is_ok() {
            SamplerConfig::exact(n, seed)
        } else {
            SamplerConfig::gibbs(n, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Gibbs && (self.burn_in == 0 || self.thinning == 0) {
            return Err(Error::Invalid("burn_in and thinning must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_theta(theta: &[f64], model: &Model) -> Result<()> {
    if theta.len() != model.j_len() {
        return Err(Error::Invalid(format!(
            "parameter has {} entries, model has {}",
            theta.len(),
            model.j_len()
        )));
    }
    Ok(())
}

pub fn sample(model: &Model, theta: &[f64], config: &SamplerConfig) -> Result<Samples> {
    match config.method {
        Method::Exact => sample_exact(model, theta, config),
        Method::Gibbs => sample_gibbs(model, theta, config),
    }
}

struct CellSampler {
    cdf: Vec<f64>,
}

impl CellSampler {
    fn new(model: &Model, theta: &[f64]) -> Result<CellSampler> {
        let p = theta_to_probabilities(theta, model)?;
        let mut acc = 0.0;
        let cdf = p
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        Ok(CellSampler { cdf })
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let u = rng.random::<f64>() * self.cdf.last().unwrap();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// I.i.d. draws via inverse CDF over the full table.
pub fn sample_exact(model: &Model, theta: &[f64], config: &SamplerConfig) -> Result<Samples> {
    check_theta(theta, model)?;
    let cs = CellSampler::new(model, theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Samples::new(model.p());
    for _ in 0..config.n {
        out.push(&model.cell_at(cs.draw(&mut rng)))?;
    }
    Ok(out)
}

/// Precomputed full conditionals: for each vertex, the terms containing it as
/// `(level of v, θ_j, the other (variable, level) pairs of j)`.
struct Conditionals {
    terms: Vec<Vec<(usize, f64, Vec<(usize, usize)>)>>,
}

impl Conditionals {
    fn new(model: &Model, theta: &[f64]) -> Conditionals {
        let mut terms = vec![Vec::new(); model.p()];
        for (j, &t) in theta.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let vars = &model.j_interaction(j).vars;
            let lv = model.j_levels(j);
            for (k, &v) in vars.iter().enumerate() {
                let rest = vars
                    .iter()
                    .zip(&lv)
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, (&w, &l))| (w, l))
                    .collect();
                terms[v].push((lv[k], t, rest));
            }
        }
        Conditionals { terms }
    }

    fn update(&self, v: usize, levels: usize, state: &mut [usize], z: &mut Vec<f64>, rng: &mut impl Rng) {
        z.clear();
        z.resize(levels, 0.0);
        for (l, t, rest) in &self.terms[v] {
            if rest.iter().all(|&(w, lw)| state[w] == lw) {
                z[*l] += t;
            }
        }
        let lz = log_sum_exp(z);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = levels - 1;
        for (y, &zy) in z.iter().enumerate() {
            acc += (zy - lz).exp();
            if u < acc {
                pick = y;
                break;
            }
        }
        state[v] = pick;
    }
}

/// Systematic-scan Gibbs sampler from the single-site full conditionals.
///
/// The chain starts from a uniformly drawn state; after `burn_in` sweeps a draw is
/// retained every `thinning` sweeps.
pub fn sample_gibbs(model: &Model, theta: &[f64], config: &SamplerConfig) -> Result<Samples> {
    check_theta(theta, model)?;
    config.validate()?;
    let cond = Conditionals::new(model, theta);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let levels = model.levels();
    let mut state: Vec<usize> = levels.iter().map(|&l| rng.random_range(0..l)).collect();
    let mut z = Vec::new();
    let mut sweep = |state: &mut Vec<usize>, rng: &mut ChaCha8Rng| {
        for v in 0..model.p() {
            cond.update(v, levels[v], state, &mut z, rng);
        }
    };
    for _ in 0..config.burn_in {
        sweep(&mut state, &mut rng);
    }
    let mut out = Samples::new(model.p());
    for k in 0..config.n {
        if k > 0 {
            for _ in 0..config.thinning {
                sweep(&mut state, &mut rng);
            }
        }
        out.push(&state)?;
    }
    Ok(out)
}

/// Cells to exclude: a cell is forbidden when it matches any pattern, a pattern
/// being a partial assignment `(variable, level)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub forbid: Vec<Vec<(usize, usize)>>,
}

impl FaceSpec {
    pub fn is_forbidden(&self, cell: &[usize]) -> bool {
        self.forbid.iter().any(|pat| pat.iter().all(|&(v, l)| cell[v] == l))
    }
}

#[derive(Debug, Clone)]
pub struct FaceDataset {
    pub samples: Samples,
    pub drawn: usize,
    pub rejected: usize,
    /// Smallest face of the resulting counts, when the table fits the budget.
    pub face: Option<Face>,
}

/// Rejection-filter sampler output so that every forbidden cell has count zero.
pub fn make_face_dataset(
    model: &Model,
    theta: &[f64],
    config: &SamplerConfig,
    spec: &FaceSpec,
) -> Result<FaceDataset> {
    for pat in &spec.forbid {
        for &(v, l) in pat {
            if v >= model.p() || l >= model.levels()[v] {
                return Err(Error::Invalid(format!("forbidden pattern refers to ({}, {l})", v + 1)));
            }
        }
    }
    let mut cfg = config.clone();
    let mut accepted = Samples::new(model.p());
    let (mut drawn, mut rejected) = (0usize, 0usize);
    let mut round = 0u64;
    while accepted.len() < config.n {
        cfg.seed = config.seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        cfg.n = (config.n - accepted.len()).max(64);
        round += 1;
        for row in sample(model, theta, &cfg)?.rows() {
            drawn += 1;
            if spec.is_forbidden(row) {
                rejected += 1;
            } else if accepted.len() < config.n {
                accepted.push(row)?;
            }
        }
        if drawn >= 1000 && rejected as f64 > 0.99 * drawn as f64 {
            return Err(Error::Invalid(format!(
                "rejection rate {:.2}% over {drawn} draws; the forbidden set carries almost all the mass",
                100.0 * rejected as f64 / drawn as f64
            )));
        }
    }
    let face = match model.table_size() {
        Ok(size) if size <= 1 << 12 => Some(smallest_face(&cell_counts(&accepted, model)?, model)?),
        _ => None,
    };
    Ok(FaceDataset { samples: accepted, drawn, rejected, face })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::sufficient_statistics;

    fn edge() -> Model {
        Model::from_graph(vec![2, 2], &[(0, 1)]).unwrap()
    }

    #[test]
    fn exact_is_deterministic() {
        let m = edge();
        let c = SamplerConfig::exact(100, 7);
        let a = sample_exact(&m, &[0.3, -0.2, 0.5], &c).unwrap();
        let b = sample_exact(&m, &[0.3, -0.2, 0.5], &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_uniform_frequencies() {
        let m = edge();
        let n = 40000;
        let s = sample_exact(&m, &[0.0; 3], &SamplerConfig::exact(n, 1)).unwrap();
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in cell_counts(&s, &m).unwrap() {
            assert!((c as f64 - n as f64 / 4.0).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn saturated_vertex_term() {
        let m = Model::from_graph(vec![2], &[]).unwrap();
        let s = sample_exact(&m, &[30.0], &SamplerConfig::exact(1000, 3)).unwrap();
        assert!(s.rows().all(|r| r[0] == 1));
    }

    #[test]
    fn gibbs_single_vertex_is_bernoulli() {
        let m = Model::from_graph(vec![2], &[]).unwrap();
        let n = 20000;
        let s = sample_gibbs(&m, &[0.4], &SamplerConfig::gibbs(n, 5)).unwrap();
        let p = 1.0 / (1.0 + (-0.4f64).exp());
        let ones = s.rows().filter(|r| r[0] == 1).count() as f64;
        assert!((ones - n as f64 * p).abs() < 5.0 * (n as f64 * p * (1.0 - p)).sqrt());
    }

    #[test]
    fn gibbs_edge_matches_exact_means() {
        let m = edge();
        let th = [1.0, 1.0, -2.0];
        let n = 20000;
        let g = sample_gibbs(&m, &th, &SamplerConfig { thinning: 2, ..SamplerConfig::gibbs(n, 11) }).unwrap();
        let mu = crate::param::mean_statistic(&th, &m).unwrap();
        let t = sufficient_statistics(&g, &m).unwrap();
        for j in 0..3 {
            let p = mu[j];
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((t.t[j] as f64 / n as f64 - p).abs() < 5.0 * sd, "j={j}");
        }
    }

    #[test]
    fn face_dataset_single_variable() {
        let m = Model::from_graph(vec![2], &[]).unwrap();
        let spec = FaceSpec { forbid: vec![vec![(0, 0)]] };
        let d = make_face_dataset(&m, &[0.0], &SamplerConfig::exact(50, 2), &spec).unwrap();
        assert_eq!(cell_counts(&d.samples, &m).unwrap(), vec![0, 50]);
        assert!(d.face.unwrap().is_proper());
    }

    #[test]
    fn face_dataset_gives_up() {
        let m = Model::from_graph(vec![2], &[]).unwrap();
        let spec = FaceSpec { forbid: vec![vec![(0, 1)]] };
        let err = make_face_dataset(&m, &[30.0], &SamplerConfig::exact(10, 2), &spec);
        assert!(err.is_err());
    }
}
