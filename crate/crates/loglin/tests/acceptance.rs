//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use loglin::data::Samples;
use loglin::estimation::fit::{conditional_likelihood, marginal_likelihood, table_likelihood};
use loglin::estimation::newton::Objective;
use loglin::estimation::{fit_global_counts, NewtonOptions};
use loglin::experiments::{
    run_equality_study, run_existence_study, run_face4x4, run_rate_study, EqualityConfig, ExistenceConfig,
    RateConfig, StatisticFixture,
};
use loglin::faces::{facial_set_by_membership, mle_exists, smallest_face};
use loglin::local::{conditional_index_set, local_table_index, marginalize_theta, neighborhood, relaxed_marginal_model};
use loglin::model::{support, Model};
use loglin::param::{mobius, probabilities_to_theta, theta_to_probabilities, zeta};
use loglin::sampler::{sample_exact, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn face_4x4() -> Outcome {
    let start = Instant::now();
    let r = run_face4x4(&StatisticFixture::bundled().unwrap(), false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let additive = r.additivity == r.expected_additivity && r.additivity.iter().all(|&a| a == 22);
    let pass = r.matches_expected && additive && r.face.proper && r.t_in_face && r.certificate_valid && secs < 300.0;
    outcome(
        pass,
        format!(
            "local {:?}, extended {:?}, intersection {} ({} ordering); additivity {:?}; certificate {}; {:.1}s",
            r.face.local_cone_dimensions,
            r.face.extended_cone_dimensions,
            r.face.cone_dimension,
            r.ordering,
            r.additivity,
            r.certificate_valid,
            secs
        ),
    )
}

fn smallest_face_oracle() -> Outcome {
    let start = Instant::now();
    let corpus = common::corpus(2024, 60);
    let mut agree = 0;
    let mut proper = 0;
    for (m, c) in &corpus {
        let face = smallest_face(c, m).unwrap();
        let brute = common::brute_force_facial_set(c, m);
        let member = facial_set_by_membership(c, m).unwrap();
        if face.facial_set == brute && member == brute {
            agree += 1;
        }
        proper += face.is_proper() as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        agree == corpus.len() && secs < 120.0,
        format!("{agree}/{} agree ({proper} proper faces); {secs:.1}s", corpus.len()),
    )
}

fn existence_coherence() -> Outcome {
    let corpus = common::corpus(2024, 60);
    let opts = NewtonOptions::default();
    let mut agree = 0;
    let mut nonexistent = 0;
    for (m, c) in &corpus {
        let (exists, _) = mle_exists(c, m).unwrap();
        let fit = fit_global_counts(c, m, &opts).unwrap();
        agree += (exists == (fit.converged && !fit.nonexistence_flag)) as usize;
        nonexistent += !exists as usize;
    }
    outcome(agree == corpus.len(), format!("{agree}/{} agree ({nonexistent} without MLE)", corpus.len()))
}

fn equality() -> Outcome {
    let start = Instant::now();
    let r = run_equality_study(&EqualityConfig::default(), false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = r.max_discrepancy_hop1 < 1e-6
        && r.max_discrepancy_hop2_hypothesis < 1e-6
        && r.hypothesis_fails.contains(&39)
        && secs < 600.0;
    outcome(
        pass,
        format!(
            "hop 1 max {:.2e}, hop 2 (hypothesis) max {:.2e}, hypothesis fails at {:?}; {secs:.1}s",
            r.max_discrepancy_hop1, r.max_discrepancy_hop2_hypothesis, r.hypothesis_fails
        ),
    )
}

fn marginal_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut kept_err, mut zero_err) = (0.0f64, 0.0f64);
    let mut checked = 0usize;
    let graphs = common::small_graphs();
    for m in &graphs {
        assert!(m.table_size().unwrap() <= 1 << 12);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..m.j_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            for v in 0..m.p() {
                for hop in [1, 2] {
                    let nb = neighborhood(m, v, hop).unwrap();
                    let loc = marginalize_theta(&theta, &nb, m).unwrap();
                    let (mm, b) = (nb.m_mask(), nb.buffer_mask());
                    for k in 0..m.table_size().unwrap() {
                        let cell = m.cell_at(k);
                        let s = support(&cell);
                        if s == 0 || s & !mm != 0 || s & !b == 0 {
                            continue;
                        }
                        let x = loc[local_table_index(&cell, &nb, m)];
                        match m.j_index_of_cell(&cell) {
                            Some(j) => kept_err = kept_err.max((x - theta[j]).abs()),
                            None => zero_err = zero_err.max(x.abs()),
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    outcome(
        kept_err < 1e-9 && zero_err < 1e-10,
        format!(
            "{} graphs, {checked} coordinates: max |θ^M − θ| {kept_err:.1e}, max off-model |θ^M| {zero_err:.1e}",
            graphs.len()
        ),
    )
}

fn fd_error(obj: &dyn Objective, at: &[f64]) -> f64 {
    let g = obj.evaluate(at, false).gradient;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..at.len() {
        let (mut a, mut b) = (at.to_vec(), at.to_vec());
        a[k] += h;
        b[k] -= h;
        let fd = (obj.evaluate(&a, false).value - obj.evaluate(&b, false).value) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
    }
    worst
}

fn mobius_and_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut roundtrip = 0.0f64;
    for m in common::small_graphs() {
        let theta: Vec<f64> = (0..m.j_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let back = probabilities_to_theta(&theta_to_probabilities(&theta, &m).unwrap(), &m).unwrap();
        for (a, b) in back.theta.iter().zip(&theta) {
            roundtrip = roundtrip.max((a - b).abs() / b.abs().max(1e-300));
        }
        let x: Vec<f64> = (0..m.table_size().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut y = x.clone();
        zeta(&mut y, &m);
        mobius(&mut y, &m);
        for (a, b) in y.iter().zip(&x) {
            roundtrip = roundtrip.max((a - b).abs() / b.abs().max(1e-300));
        }
    }

    let m = Model::lattice(3, 3).unwrap();
    let theta: Vec<f64> = (0..m.j_len()).map(|_| rng.random_range(-0.5..0.5)).collect();
    let s = sample_exact(&m, &theta, &SamplerConfig::exact(300, 8)).unwrap();
    let counts = cell_counts(&s, &m);
    let mut grad = 0.0f64;
    let mut objectives = 0;
    let mut check = |obj: &dyn Objective, rng: &mut ChaCha8Rng| {
        let at: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-0.5..0.5)).collect();
        grad = grad.max(fd_error(obj, &at));
        objectives += 1;
    };
    check(&table_likelihood(&counts, &m, None, 1.0 / 300.0).unwrap(), &mut rng);
    for v in [0, 4] {
        for hop in [1, 2] {
            let cm = conditional_index_set(&m, v, hop).unwrap();
            check(&conditional_likelihood(&s, &m, &cm).unwrap(), &mut rng);
            let rm = relaxed_marginal_model(&m, v, hop).unwrap();
            check(&marginal_likelihood(&s, &m, &rm).unwrap(), &mut rng);
        }
    }
    outcome(
        roundtrip < 1e-10 && grad < 1e-6,
        format!("roundtrip max rel. error {roundtrip:.1e}; {objectives} objectives, max gradient rel. error {grad:.1e}"),
    )
}

fn cell_counts(s: &Samples, m: &Model) -> Vec<u64> {
    let mut c = vec![0u64; m.table_size().unwrap()];
    for row in s.rows() {
        c[m.cell_index(row)] += 1;
    }
    c
}

fn rate() -> Outcome {
    let start = Instant::now();
    let r = run_rate_study(&RateConfig::default(), false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (-0.65..=-0.35).contains(&r.slope) && r.sum_d_v * 5 == r.j_len * 8 && secs < 900.0;
    outcome(
        pass,
        format!(
            "slope {:.3}, Σd_v/|J| = {}/{} = {}; {secs:.1}s",
            r.slope, r.sum_d_v, r.j_len, r.efficiency_ratio
        ),
    )
}

fn existence() -> Outcome {
    let start = Instant::now();
    let r = run_existence_study(&ExistenceConfig::default(), false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let held = r.ordering.iter().filter(|o| o.2).count();
    outcome(
        r.ordering_holds && r.ordering.len() == 15,
        format!("on-face > off-face in {held}/{} (N, estimator) pairs; {secs:.1}s", r.ordering.len()),
    )
}

fn run(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_loglin"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.code().is_some_and(|c| c == 0 || c == 3),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn session(dir: &Path) -> Vec<Vec<u8>> {
    std::fs::create_dir_all(dir).unwrap();
    let mut outputs = vec![
        run(dir, &["model", "build", "--lattice", "3x3", "--out", "m.json"]),
        run(dir, &["sample", "--model", "m.json", "-n", "300", "--seed", "5", "--out", "s.csv"]),
        run(dir, &["face", "find", "--model", "m.json", "--samples", "s.csv", "--json"]),
        run(dir, &["fit", "ps", "--model", "m.json", "--samples", "s.csv", "--theta-star", "s.csv.json", "--check-equality", "--json"]),
        run(dir, &["fit", "global", "--model", "m.json", "--samples", "s.csv", "--json"]),
        run(dir, &["exp", "face4x4", "--json"]),
        run(dir, &["exp", "rate", "--size", "3", "--n-list", "200,400", "--replicates", "3", "--json"]),
    ];
    for f in ["m.json", "s.csv", "s.csv.json"] {
        outputs.push(std::fs::read(dir.join(f)).unwrap());
    }
    outputs
}

fn determinism() -> Outcome {
    let base = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&base);
    let a = session(&base.join("a"));
    let b = session(&base.join("b"));
    let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    outcome(same == a.len(), format!("{same}/{} outputs byte-identical across two runs", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("4x4 face dimensions", face_4x4),
        ("smallest face vs brute force", smallest_face_oracle),
        ("existence vs global fit", existence_coherence),
        ("marginal/conditional equality", equality),
        ("marginal parameters off the buffer", marginal_lemmas),
        ("Möbius roundtrip and gradients", mobius_and_gradients),
        ("convergence rate", rate),
        ("impact of non-existence", existence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!("criterion {} [{}] {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
