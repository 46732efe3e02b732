use proptest::prelude::*;

use snnff::dataio::synthetic::gaussian_blobs;
use snnff::dataio::Dataset;
use snnff::layer::{goodness, NORM_EPS};
use snnff::neuron::{surrogate_derivative, NeuronConfig, SpikeFn};
use snnff::predictor::{evaluate, predict, score_labels};
use snnff::trainer::{ff_loss, ff_loss_single, ff_loss_slope, hard_label_distribution, train};
use snnff::{FFNetwork, LayerInput, Matrix, Mode, RngStream, SpikingLayer, TrainConfig};

#[test]
fn single_neuron_gradient_by_hand() {
    // B = 2, one input, one neuron, T = 1: U_b = gamma * (w x_b - m) / sqrt(v + eps) + shift
    let (w, gamma, shift) = (0.8, 1.3, 0.9);
    let x = [0.2, 0.7];
    let mut layer =
        SpikingLayer::from_parts(Matrix::row_vector(&[w]), 1, NeuronConfig::default(), None);
    layer.norm_scale = Matrix::row_vector(&[gamma]);
    layer.norm_shift = Matrix::row_vector(&[shift]);
    let input = LayerInput::Constant(Matrix::from_rows(&[[x[0]], [x[1]]]));
    let tr = layer.forward(&input, Mode::Train).unwrap();
    let coef = [0.5, -1.5];
    let grads = layer.backward(&tr, &coef).unwrap();

    let delta = x[0] - x[1];
    let var = w * w * delta * delta / 4.0;
    let denom = (var + NORM_EPS).powf(1.5);
    let mut expect = 0.0;
    for b in 0..2 {
        let dev = x[b] - (x[0] + x[1]) / 2.0;
        let u = gamma * w * dev / (var + NORM_EPS).sqrt() + shift;
        assert!((tr.membranes[0].get(b, 0) - u).abs() < 1e-14);
        let c = tr.counts.get(b, 0);
        let du_dw = gamma * dev * NORM_EPS / denom;
        expect += coef[b] * 2.0 * c * surrogate_derivative(u, &layer.neuron) * du_dw;
    }
    assert!((grads.weights.get(0, 0) - expect).abs() <= 1e-12 * expect.abs().max(1e-12));
}

#[test]
fn loss_slope_matches_finite_differences() {
    for alpha in [1.0, 2.0, 5.0] {
        for i in 0..=400 {
            let d = -20.0 + i as f64 * 0.1;
            let h = 1e-6;
            let fd = (ff_loss_single(d + h, alpha) - ff_loss_single(d - h, alpha)) / (2.0 * h);
            let an = ff_loss_slope(d, alpha);
            assert!(
                (fd - an).abs() <= 1e-8,
                "alpha {alpha} delta {d}: {an} vs {fd}"
            );
        }
    }
}

#[test]
fn loss_sign_and_minimum() {
    for alpha in [0.6, 1.0, 2.0, 5.0] {
        assert_eq!(ff_loss_single(0.0, alpha), 0.0);
        for i in 1..=200 {
            let d = i as f64 * 0.1;
            assert!(ff_loss_single(d, alpha) < 0.0);
            assert!(ff_loss_single(-d, alpha) > 0.0);
        }
        // the curve falls until alpha*delta solves z = 1 + e^-z (z ~ 1.2785), then rises toward 0
        let z_star = 1.278_464_542_761_074;
        assert!(ff_loss_slope(0.999 * z_star / alpha, alpha) < 0.0);
        assert!(ff_loss_slope(1.001 * z_star / alpha, alpha) > 0.0);
    }
}

#[test]
fn batch_loss_is_mean_of_singles() {
    let l = ff_loss(&[4.0, 0.0, 9.0], &[1.0, 2.0, 9.0], 0.6).unwrap();
    let expect = (ff_loss_single(3.0, 0.6) + ff_loss_single(-2.0, 0.6) + 0.0) / 3.0;
    assert!((l.loss - expect).abs() < 1e-15);
}

proptest! {
    #[test]
    fn hard_labels_never_pick_the_truth(
        scores in prop::collection::vec(0.0f64..100.0, 2..12),
        seed in any::<u64>(),
    ) {
        let t = (seed as usize) % scores.len();
        let p = hard_label_distribution(&scores, t);
        prop_assert_eq!(p[t], 0.0);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = RngStream::new(seed);
        for _ in 0..50 {
            prop_assert_ne!(rng.categorical(&p), t);
        }
    }
}

fn populated(net: &mut FFNetwork, x: &Matrix) {
    net.forward_train(&LayerInput::Constant(x.clone())).unwrap();
}

#[test]
fn blobs_are_learned() {
    let mut rng = RngStream::new(3);
    let train_set = gaussian_blobs(400, &mut rng);
    let mut net = FFNetwork::new(
        12,
        &[16, 16],
        2,
        4,
        NeuronConfig::default(),
        false,
        &mut rng,
    )
    .unwrap();
    let cfg = TrainConfig {
        epochs: 30,
        batch_size: 50,
        seed: 3,
        ..TrainConfig::default()
    };
    let hist = train(&mut net, &train_set, None, &cfg, |_| {}).unwrap();
    let last = hist.last().unwrap();
    let acc = evaluate(&net, &train_set).unwrap();
    assert!(
        acc >= 0.95,
        "train accuracy {acc} (in-loop {})",
        last.train_accuracy
    );
}

#[test]
fn zero_network_scores_zero_and_predicts_class_zero() {
    let mut rng = RngStream::new(1);
    let ds = gaussian_blobs(6, &mut rng);
    let mut net = FFNetwork::new(12, &[3], 2, 3, NeuronConfig::default(), false, &mut rng).unwrap();
    net.layers[0].weights = Matrix::zeros(3, 12);
    net.layers[0].stats_populated = true;
    for s in score_labels(&net, &ds.as_batch()).unwrap() {
        assert_eq!(s.scores, vec![0.0, 0.0]);
        assert_eq!(s.predicted, 0);
    }
}

#[test]
fn single_overlay_drives_both_neurons() {
    let mut layer = SpikingLayer::from_parts(
        Matrix::from_rows(&[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]),
        1,
        NeuronConfig::default(),
        None,
    );
    layer.running_var = Matrix::filled(1, 2, 1.0 - NORM_EPS);
    layer.stats_populated = true;
    let net = FFNetwork::from_layers(vec![layer], 3, 3).unwrap();
    let ds = Dataset::static_images(Matrix::from_rows(&[[1.0, 0.0, 0.0]]), vec![0], 3).unwrap();
    let s = &score_labels(&net, &ds.as_batch()).unwrap()[0];
    assert_eq!(s.scores, vec![0.0, 0.0, 1.0]);
    assert_eq!(s.predicted, 2);
}

fn trained_blob_net(seed: u64) -> (FFNetwork, Dataset) {
    let mut rng = RngStream::new(seed);
    let ds = gaussian_blobs(200, &mut rng);
    let mut net =
        FFNetwork::new(12, &[8, 8], 2, 4, NeuronConfig::default(), false, &mut rng).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 50,
        seed,
        ..TrainConfig::default()
    };
    train(&mut net, &ds, None, &cfg, |_| {}).unwrap();
    (net, ds)
}

#[test]
fn batched_scores_equal_single_sample_scores() {
    let (net, ds) = trained_blob_net(7);
    let all = score_labels(&net, &ds.take(20).as_batch()).unwrap();
    for i in 0..20 {
        let one = &score_labels(&net, &ds.batch(&[i])).unwrap()[0];
        for (a, b) in one.scores.iter().zip(&all[i].scores) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn permuted_labels_match_recount() {
    let (net, ds) = trained_blob_net(8);
    let preds: Vec<usize> = predict(&net, &ds)
        .unwrap()
        .iter()
        .map(|s| s.predicted)
        .collect();
    // push every label away from its prediction where possible
    let flipped: Vec<usize> = preds
        .iter()
        .enumerate()
        .map(|(i, &p)| if i % 3 == 0 { p } else { 1 - p })
        .collect();
    let adv = Dataset::static_images(ds.inputs.clone(), flipped.clone(), 2).unwrap();
    let mut hits = 0;
    for i in 0..preds.len() {
        if preds[i] == flipped[i] {
            hits += 1;
        }
    }
    assert_eq!(
        evaluate(&net, &adv).unwrap(),
        hits as f64 / preds.len() as f64
    );
}

#[test]
fn random_labels_give_chance_accuracy() {
    let mut rng = RngStream::new(9);
    let (n, c) = (3000usize, 10usize);
    let x = Matrix::from_vec(n, 16, (0..n * 16).map(|_| rng.next_f64()).collect()).unwrap();
    let labels: Vec<usize> = (0..n).map(|_| rng.below(c)).collect();
    let ds = Dataset::static_images(x.clone(), labels, c).unwrap();
    let mut net =
        FFNetwork::new(16, &[12], c, 3, NeuronConfig::default(), false, &mut rng).unwrap();
    populated(&mut net, &x);
    let acc = evaluate(&net, &ds).unwrap();
    let p = 1.0 / c as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((acc - p).abs() <= 3.0 * sigma, "accuracy {acc}");
}

#[test]
fn scores_are_deterministic_and_scale_invariant() {
    let (net, ds) = trained_blob_net(10);
    let a = score_labels(&net, &ds.as_batch()).unwrap();
    let b = score_labels(&net, &ds.as_batch()).unwrap();
    assert_eq!(a, b);
    for s in &a {
        let scaled: Vec<f64> = s.scores.iter().map(|v| v * 3.5).collect();
        assert_eq!(snnff::predictor::argmax(&scaled), s.predicted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn counts_are_bounded(seed in any::<u64>(), t in 1usize..6, b in 2usize..6, n in 1usize..6) {
        let mut rng = RngStream::new(seed);
        let neuron = NeuronConfig { learnable_decay: seed % 2 == 0, ..NeuronConfig::default() };
        let mut layer = SpikingLayer::new(4, n, t, neuron, seed % 3 == 0, &mut rng);
        let x = Matrix::from_vec(b, 4, (0..b * 4).map(|_| rng.uniform(-3.0, 3.0)).collect()).unwrap();
        let tr = layer.forward_with(&LayerInput::Constant(x), Mode::Train, SpikeFn::Heaviside).unwrap();
        for s in &tr.spikes {
            prop_assert!(s.data().iter().all(|&v| v == 0.0 || v == 1.0));
        }
        prop_assert!(tr.counts.data().iter().all(|&c| (0.0..=t as f64).contains(&c)));
        prop_assert!(goodness(&tr).per_sample.iter().all(|&g| (0.0..=(t * t) as f64).contains(&g)));
    }
}
