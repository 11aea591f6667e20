mod common;

use approx::assert_abs_diff_eq;
use common::{k3, k3_pendant, max_abs_diff, rel_frob};
use infinitewalk::embed::mean_cosine_by_group;
use infinitewalk::eval::{evaluate_split, split};
use infinitewalk::generators::{random_walkable, stochastic_block_model};
use infinitewalk::*;
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn closed_form_on_k3_pendant_window_ten() {
    let g = k3_pendant();
    let s = spectral_cache(&g).unwrap();
    let cfg = PmiConfig::new(10);
    let cf = pmi_closed_form(&s, &cfg).unwrap();
    let ex = pmi_exact(&g, &cfg).unwrap();
    assert_eq!(cf.ramped, ex.ramped);
    assert!(max_abs_diff(cf.values.view(), ex.values.view()) < 1e-8);
}

#[test]
fn closed_form_on_random_thirty_nodes() {
    let g = random_walkable(30, 0.2, false, 30).unwrap();
    let s = spectral_cache(&g).unwrap();
    let cfg = PmiConfig::new(5);
    let cf = pmi_closed_form(&s, &cfg).unwrap();
    let ex = pmi_exact(&g, &cfg).unwrap();
    assert!(rel_frob(cf.values.view(), ex.values.view()) < 1e-9);
}

#[test]
fn k3_limit_by_both_routes() {
    let g = k3();
    let want = Array2::from_elem((3, 3), 1.0 / 3.0) - Array2::<f64>::eye(3);
    let m1 = pmi_limit(&spectral_cache(&g).unwrap()).unwrap();
    let m7 = pmi_limit_rank3(&g).unwrap();
    assert!(max_abs_diff(m1.view(), want.view()) < 1e-12);
    assert!(max_abs_diff(m7.view(), want.view()) < 1e-12);
}

#[test]
fn scaled_finite_window_pmi_approaches_limit() {
    let g = k3_pendant();
    let t = 1usize << 10;
    let m = pmi_exact(&g, &PmiConfig::new(t)).unwrap();
    let limit = pmi_limit(&spectral_cache(&g).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for ((i, j), &x) in m.values.view().indexed_iter() {
        if !m.ramped[[i, j]] {
            worst = worst.max((t as f64 * x - limit.view()[[i, j]]).abs());
        }
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn rank3_identity_on_forty_nodes_and_weighted_triangle() {
    let g = random_walkable(40, 0.15, false, 40).unwrap();
    let a = pmi_limit(&spectral_cache(&g).unwrap()).unwrap();
    let b = pmi_limit_rank3(&g).unwrap();
    assert!(rel_frob(b.view(), a.view()) < 1e-8);

    let tri = Graph::weighted(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
    let a = pmi_limit(&spectral_cache(&tri).unwrap()).unwrap();
    let b = pmi_limit_rank3(&tri).unwrap();
    assert!(rel_frob(b.view(), a.view()) < 1e-8);
}

#[test]
fn approx_at_large_window_matches_exact() {
    let g = k3_pendant();
    let t = 1usize << 16;
    let cfg = PmiConfig::new(t);
    let approx = pmi_approx(&pmi_limit(&spectral_cache(&g).unwrap()).unwrap(), &cfg).unwrap();
    let exact = pmi_closed_form(&spectral_cache(&g).unwrap(), &cfg).unwrap();
    // both are ≈ M∞/T, agreeing to O(1/T²)
    assert!(approx.max_abs_deviation_unramped(&exact).unwrap() < 1e-7);
}

fn walks(gamma: usize, len: usize, window: usize) -> WalkConfig {
    WalkConfig { walks_per_node: gamma, walk_length: len, window, seed: 7 }
}

#[test]
fn sampled_pmi_on_k3() {
    let g = k3();
    let exact = pmi_exact(&g, &PmiConfig::new(1)).unwrap();
    let est = empirical_pmi(&g, &walks(20_000, 100, 1)).unwrap();
    let dev = est.max_abs_deviation_unramped(&exact).unwrap();
    assert!(dev < 0.05, "{dev}");
    // diagonal is never visited at T=1, so both ramp it
    for i in 0..3 {
        assert!(est.ramped[[i, i]] && exact.ramped[[i, i]]);
    }
}

#[test]
fn sampled_pmi_on_k3_pendant() {
    let g = k3_pendant();
    let exact = pmi_exact(&g, &PmiConfig::new(10)).unwrap();
    let est = empirical_pmi(&g, &walks(20_000, 200, 10)).unwrap();
    let dev = est.max_abs_deviation_unramped(&exact).unwrap();
    assert!(dev < 0.1, "{dev}");
}

#[test]
fn sampled_pmi_improves_with_more_walks() {
    let g = k3_pendant();
    let exact = pmi_exact(&g, &PmiConfig::new(3)).unwrap();
    let few = empirical_pmi(&g, &walks(10_000, 40, 3)).unwrap();
    let many = empirical_pmi(&g, &walks(40_000, 40, 3)).unwrap();
    let d_few = few.max_abs_deviation_unramped(&exact).unwrap();
    let d_many = many.max_abs_deviation_unramped(&exact).unwrap();
    assert!(d_many <= d_few + 0.02, "{d_many} vs {d_few}");
}

#[test]
fn sampled_pmi_is_reproducible() {
    let g = k3_pendant();
    let a = empirical_pmi(&g, &walks(500, 30, 4)).unwrap();
    let b = empirical_pmi(&g, &walks(500, 30, 4)).unwrap();
    assert_eq!(a.values.as_array().as_slice(), b.values.as_array().as_slice());
}

#[test]
fn factorize_identity_and_rank_one() {
    let eye = DenseSymMatrix::new(Array2::eye(4)).unwrap();
    let f = factorize(&eye, 2).unwrap();
    let gram = f.vectors.t().dot(&f.vectors);
    assert_abs_diff_eq!(gram[[0, 0]] + gram[[1, 1]], 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(gram[[0, 1]], 0.0, epsilon = 1e-12);

    let u = array![1.0, -1.0, 1.0, 1.0];
    let m = DenseSymMatrix::new(Array2::from_shape_fn((4, 4), |(i, j)| u[i] * u[j])).unwrap();
    let f = factorize(&m, 1).unwrap();
    let col = f.vectors.column(0);
    let sign = if col[0] > 0.0 { 1.0 } else { -1.0 };
    for (a, b) in col.iter().zip(&u) {
        assert_abs_diff_eq!(a * sign, *b, epsilon = 1e-12);
    }
    assert!(max_abs_diff(f.reconstruct().view(), m.view()) < 1e-12);
}

#[test]
fn factorize_full_rank_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let a = Array2::from_shape_fn((20, 20), |_| rng.random_range(-1.0..1.0));
    let m = DenseSymMatrix::new(&a + &a.t()).unwrap();
    let f = factorize(&m, 20).unwrap();
    assert!(rel_frob(f.reconstruct().view(), m.view()) < 1e-8);
}

#[test]
fn k3_vertex_transitive_gram() {
    let emb = embed(&k3(), &EmbedConfig::new(2, EmbedMethod::InfiniteWalk { window: 10, ramp: Ramp::default() }))
        .unwrap();
    let gram = emb.vectors.dot(&emb.vectors.t());
    for i in 0..3 {
        assert!((gram[[i, i]] - gram[[0, 0]]).abs() < 1e-9);
        for j in 0..3 {
            if i != j {
                assert!((gram[[i, j]] - gram[[0, 1]]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn binarized_embedding_separates_sbm_blocks() {
    let (g, block) = stochastic_block_model(&[20, 20, 20], 0.5, 0.02, 60).unwrap();
    assert!(validate_walkable(&g).is_ok());
    let emb = embed(&g, &EmbedConfig::new(8, EmbedMethod::BinarizedLaplacian { quantile: 0.9 })).unwrap();
    let (within, between) = mean_cosine_by_group(&emb.vectors, &block);
    assert!(within - between > 0.2, "within {within}, between {between}");
}

#[test]
fn embedding_is_bitwise_deterministic() {
    let g = random_walkable(25, 0.2, true, 5).unwrap();
    for method in [
        EmbedMethod::InfiniteWalk { window: 10, ramp: Ramp::default() },
        EmbedMethod::BinarizedLaplacian { quantile: 0.9 },
        EmbedMethod::Adjacency,
        EmbedMethod::LimitRaw,
    ] {
        let cfg = EmbedConfig::new(6, method);
        let a = embed(&g, &cfg).unwrap();
        let b = embed(&g, &cfg).unwrap();
        assert_eq!(a.vectors.as_slice(), b.vectors.as_slice(), "{method}");
        assert_eq!(a.dim(), 6);
        assert!(a.vectors.iter().all(|x| x.is_finite()));
    }
}

fn single_labels(classes: &[usize], num_labels: usize) -> NodeLabels {
    NodeLabels::from_sets(classes.iter().map(|&c| vec![c]).collect(), num_labels).unwrap()
}

/// Perceptron with bias; returns true once it classifies every point,
/// which on a finite run certifies linear separability.
fn perceptron_separates(x: &Array2<f64>, y: &[usize]) -> bool {
    let d = x.ncols();
    let mut w = vec![0.0; d + 1];
    for _ in 0..10_000 {
        let mut mistakes = 0;
        for (row, &c) in x.rows().into_iter().zip(y) {
            let s = if c == 1 { 1.0 } else { -1.0 };
            let z: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if s * z <= 0.0 {
                mistakes += 1;
                for k in 0..d {
                    w[k] += s * row[k];
                }
                w[d] += s;
            }
        }
        if mistakes == 0 {
            return true;
        }
    }
    false
}

#[test]
fn separable_toy_is_fit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut x = Array2::zeros((40, 2));
    let mut y = vec![0usize; 40];
    for i in 0..40 {
        let c = i % 2;
        let centre = if c == 0 { -3.0 } else { 3.0 };
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        x[[i, 0]] = centre + 0.5 * a;
        x[[i, 1]] = centre + 0.5 * b;
        y[i] = c;
    }
    assert!(perceptron_separates(&x, &y));
    let labels = single_labels(&y, 2);
    let all: Vec<usize> = (0..40).collect();
    let clf = train_logreg_ovr(x.view(), &labels, &all, &EvalConfig::default()).unwrap();
    let pred = clf.predict_top_k(x.view(), &[1; 40]).unwrap();
    let correct = pred.iter().zip(&y).filter(|(p, &c)| p[0] == c).count();
    assert_eq!(correct, 40);
}

#[test]
fn one_hot_features_classify_perfectly() {
    let n = 100;
    let classes: Vec<usize> = (0..n).map(|i| (i * 7) % 2).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, j)| if classes[i] == j { 1.0 } else { 0.0 });
    let labels = single_labels(&classes, 2);
    let cfg = EvalConfig { repeats: 3, ..EvalConfig::default() };
    let report = evaluate_sweep(x.view(), &labels, &cfg, "onehot").unwrap();
    for row in &report.rows {
        assert!(row.micro_f1_mean >= 0.99, "{row:?}");
    }
}

#[test]
fn random_features_score_at_chance() {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let x = Array2::from_shape_fn((n, 8), |_| StandardNormal.sample(&mut rng));
    let classes: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let labels = single_labels(&classes, 2);
    let cfg = EvalConfig::default();
    let (train, test) = split(n, 0.5, 3, 0, 0);
    let clf = train_logreg_ovr(x.view(), &labels, &train, &cfg).unwrap();
    let x_test = x.select(ndarray::Axis(0), &test);
    let pred = clf.predict_top_k(x_test.view(), &vec![1; test.len()]).unwrap();
    let truth: Vec<Vec<usize>> = test.iter().map(|&i| vec![classes[i]]).collect();
    let observed = f1_scores(&pred, &truth, 2).micro;

    // permutation oracle: shuffle truth against fixed predictions
    let mut sims = Vec::new();
    let mut shuffled = truth.clone();
    for _ in 0..2000 {
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        sims.push(f1_scores(&pred, &shuffled, 2).micro);
    }
    let mean = sims.iter().sum::<f64>() / sims.len() as f64;
    let sd = (sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (sims.len() - 1) as f64).sqrt();
    assert!((observed - mean).abs() <= 3.0 * sd, "observed {observed}, chance {mean} ± {sd}");
}

#[test]
fn single_repeat_report_is_reproducible() {
    let (g, block) = stochastic_block_model(&[15, 15], 0.4, 0.05, 9).unwrap();
    let g = largest_connected_component(&g).unwrap();
    assert_eq!(g.n(), 30);
    let emb = embed(&g, &EmbedConfig::new(4, EmbedMethod::Adjacency)).unwrap();
    let labels = single_labels(&block, 2);
    let cfg = EvalConfig { repeats: 1, train_ratios: vec![0.5], ..EvalConfig::default() };
    let a = evaluate_sweep(emb.vectors.view(), &labels, &cfg, "adjacency").unwrap();
    let b = evaluate_sweep(emb.vectors.view(), &labels, &cfg, "adjacency").unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows[0].micro_f1_std, 0.0);
}

#[test]
fn more_training_data_does_not_hurt() {
    let (g, block) = stochastic_block_model(&[30, 30, 30], 0.3, 0.03, 90).unwrap();
    let g = largest_connected_component(&g).unwrap();
    assert_eq!(g.n(), 90);
    let labels = single_labels(&block, 3);
    let cfg = EvalConfig { train_ratios: vec![0.1, 0.9], repeats: 5, ..EvalConfig::default() };
    for method in [
        EmbedMethod::InfiniteWalk { window: 10, ramp: Ramp::default() },
        EmbedMethod::BinarizedLaplacian { quantile: 0.9 },
        EmbedMethod::Adjacency,
        EmbedMethod::LimitRaw,
    ] {
        let emb = embed(&g, &EmbedConfig::new(8, method)).unwrap();
        let name = method.to_string();
        let r = evaluate_sweep(emb.vectors.view(), &labels, &cfg, &name).unwrap();
        let lo = r.row(&name, 0.1).unwrap();
        let hi = r.row(&name, 0.9).unwrap();
        assert!(hi.micro_f1_mean >= lo.micro_f1_mean - 0.02, "{name}: {lo:?} vs {hi:?}");
        for row in &r.rows {
            for v in [row.micro_f1_mean, row.macro_f1_mean] {
                assert!((0.0..=1.0).contains(&v));
            }
            assert!(row.micro_f1_std >= 0.0 && row.macro_f1_std >= 0.0);
        }
    }
}

#[test]
fn evaluate_split_reuses_explicit_indices() {
    let classes: Vec<usize> = (0..20).map(|i| i % 2).collect();
    let x = Array2::from_shape_fn((20, 2), |(i, j)| if classes[i] == j { 1.0 } else { 0.0 });
    let labels = single_labels(&classes, 2);
    let train: Vec<usize> = (0..10).collect();
    let test: Vec<usize> = (10..20).collect();
    let f = evaluate_split(x.view(), &labels, &train, &test, &EvalConfig::default()).unwrap();
    assert_eq!((f.micro, f.macro_), (1.0, 1.0));
}
