mod common;

use loglin::data::{sufficient_statistics, Samples};
use loglin::estimation::{consensus, fit_all_local, NewtonOptions};
use loglin::faces::{smallest_face, verify_certificate};
use loglin::io::{model_from_json, model_to_json, read_samples_from, samples_to_csv};
use loglin::local::LocalKind;
use loglin::model::Model;
use loglin::param::{log_partition, mean_statistic, probabilities_to_theta, theta_to_probabilities};
use loglin::sampler::{sample, SamplerConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model_from_seed(seed: u64) -> Model {
    common::random_model(&mut ChaCha8Rng::seed_from_u64(seed), 32)
}

fn theta_for(m: &Model, raw: &[f64]) -> Vec<f64> {
    (0..m.j_len()).map(|j| raw[j % raw.len()]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parameters_roundtrip_through_probabilities(seed in any::<u64>(), raw in prop::collection::vec(-2.0f64..2.0, 1..40)) {
        let m = model_from_seed(seed);
        let theta = theta_for(&m, &raw);
        let p = theta_to_probabilities(&theta, &m).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x > 0.0));
        let back = probabilities_to_theta(&p, &m).unwrap();
        for (a, b) in back.theta.iter().zip(&theta) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!((back.theta0 + log_partition(&theta, &m).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn mean_statistic_is_gradient_of_log_partition(seed in any::<u64>(), raw in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let m = model_from_seed(seed);
        let theta = theta_for(&m, &raw);
        let mu = mean_statistic(&theta, &m).unwrap();
        for j in 0..m.j_len() {
            let (mut a, mut b) = (theta.clone(), theta.clone());
            a[j] += 1e-6;
            b[j] -= 1e-6;
            let fd = (log_partition(&a, &m).unwrap() - log_partition(&b, &m).unwrap()) / 2e-6;
            prop_assert!((fd - mu[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn smallest_face_certificate_is_valid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_model(&mut rng, 32);
        let counts = common::random_counts(&mut rng, m.table_size().unwrap(), 12);
        let face = smallest_face(&counts, &m).unwrap();
        prop_assert!(verify_certificate(&face, &m).is_ok());
        for (k, &c) in counts.iter().enumerate() {
            if c > 0 {
                prop_assert!(face.facial_set.contains(&k));
            }
        }
        prop_assert_eq!(face.is_proper(), face.facial_set.len() < counts.len());
    }

    #[test]
    fn samples_roundtrip_through_csv(seed in any::<u64>(), n in 1usize..60) {
        let m = model_from_seed(seed);
        let s = sample(&m, &vec![0.3; m.j_len()], &SamplerConfig::exact(n, seed)).unwrap();
        let csv = samples_to_csv(&s, &m).unwrap();
        let back = read_samples_from(csv.as_bytes(), &m).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn model_roundtrips_through_json(seed in any::<u64>()) {
        let m = model_from_seed(seed);
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        prop_assert_eq!(back.levels(), m.levels());
        prop_assert_eq!(back.generating_class(), m.generating_class());
        prop_assert_eq!(back.j_len(), m.j_len());
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(seed in any::<u64>(), gibbs in any::<bool>()) {
        let m = Model::lattice(2, 3).unwrap();
        let theta = vec![0.2; m.j_len()];
        let cfg = if gibbs {
            SamplerConfig { burn_in: 50, thinning: 2, ..SamplerConfig::gibbs(40, seed) }
        } else {
            SamplerConfig::exact(40, seed)
        };
        prop_assert_eq!(sample(&m, &theta, &cfg).unwrap(), sample(&m, &theta, &cfg).unwrap());
    }

    #[test]
    fn sufficient_statistics_count_active_terms(seed in any::<u64>(), n in 1usize..50) {
        let m = model_from_seed(seed);
        let s = sample(&m, &vec![0.0; m.j_len()], &SamplerConfig::exact(n, seed)).unwrap();
        let t = sufficient_statistics(&s, &m).unwrap();
        let mut expect = vec![0i64; m.j_len()];
        for row in s.rows() {
            for j in m.active_j(row) {
                expect[j] += 1;
            }
        }
        let lifted = t.lifted();
        prop_assert_eq!(lifted[0], n as i64);
        prop_assert_eq!(&lifted[1..], expect.as_slice());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Reversing the vertex order of a path is a graph automorphism: the consensus
    /// estimate of the relabelled data is the relabelled estimate.
    #[test]
    fn consensus_commutes_with_relabelling(seed in any::<u64>()) {
        let p = 5;
        let edges: Vec<(usize, usize)> = (0..p - 1).map(|v| (v, v + 1)).collect();
        let m = Model::from_graph(vec![2; p], &edges).unwrap();
        let theta: Vec<f64> = (0..m.j_len()).map(|j| 0.1 * (j as f64) - 0.3).collect();
        let s = sample(&m, &theta, &SamplerConfig::exact(400, seed)).unwrap();
        let rows: Vec<Vec<usize>> = s.rows().map(|r| r.iter().rev().copied().collect()).collect();
        let flipped = Samples::from_rows(p, &rows).unwrap();
        let opts = NewtonOptions::default();
        for kind in [LocalKind::conditional(1), LocalKind::marginal(1)] {
            let a = consensus(&fit_all_local(kind, &s, &m, &opts).unwrap(), &m);
            let b = consensus(&fit_all_local(kind, &flipped, &m, &opts).unwrap(), &m);
            for j in 0..m.j_len() {
                let cell: Vec<usize> = m.j_cell(j).into_iter().rev().collect();
                let k = m.j_index_of_cell(&cell).unwrap();
                prop_assert!((a.theta_hat[j] - b.theta_hat[k]).abs() < 1e-7);
                prop_assert_eq!(a.contributors[j], b.contributors[k]);
            }
        }
    }
}
