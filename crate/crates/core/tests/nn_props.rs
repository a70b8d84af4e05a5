use maternact::activations::ActivationKind;
use maternact::nn::{
    mc_predict, mc_predict_batch, mc_sample_seeds, one_hot, train, LayerSpec, Loss, McOptions, Mode,
    Network, Reduction, TrainConfig,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arch(dims: &[usize], act: ActivationKind, rate: f64) -> Vec<LayerSpec> {
    let n = dims.len() - 1;
    (0..n)
        .map(|i| {
            let (a, r) = if i + 1 == n {
                (ActivationKind::Identity, 0.0)
            } else {
                (act, rate)
            };
            LayerSpec::new(dims[i], dims[i + 1], a, r).unwrap()
        })
        .collect()
}

fn random_inputs(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.5..1.5))
}

/// Perturb biases so pre-activations are not pinned at zero.
fn randomize_biases(net: &mut Network, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offset = 0;
    for l in net.layers().to_vec() {
        offset += l.weights().len();
        for j in 0..l.biases().len() {
            net.set_param(offset + j, rng.random_range(-0.5..0.5));
        }
        offset += l.biases().len();
    }
}

/// Largest relative finite-difference error over the checked parameters.
fn fd_max_rel(net: &Network, x: &Array2<f64>, y: &Array2<f64>, loss: Loss, mode: Mode, params: &[usize]) -> f64 {
    let (_, g) = net.loss_and_grad(x.view(), y.view(), loss, mode).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for &i in params {
        let p0 = net.param(i);
        probe.set_param(i, p0 + h);
        let lp = probe.loss(x.view(), y.view(), loss, mode).unwrap();
        probe.set_param(i, p0 - h);
        let lm = probe.loss(x.view(), y.view(), loss, mode).unwrap();
        probe.set_param(i, p0);
        let fd = (lp - lm) / (2.0 * h);
        let an = g.flat(i);
        let scale = an.abs().max(fd.abs());
        let err = if scale > 1e-7 { (an - fd).abs() / scale } else { (an - fd).abs() * 1e3 };
        worst = worst.max(err);
    }
    worst
}

fn sample_params(n: usize, k: usize, seed: u64) -> Vec<usize> {
    if n <= k {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random_range(0..n)).collect()
}

fn gradient_check(dims: &[usize], act: ActivationKind, tol: f64, seed: u64) {
    let mut net = Network::init(&arch(dims, act, 0.25), seed).unwrap();
    randomize_biases(&mut net, seed + 1);
    let d = dims[0];
    let c = *dims.last().unwrap();
    let x = random_inputs(7, d, seed + 2);
    let labels: Vec<usize> = (0..7).map(|i| i % c).collect();
    let y_class = one_hot(&labels, c).unwrap();
    let y_reg = random_inputs(7, c, seed + 3);
    let params = sample_params(net.num_params(), 100, seed + 4);
    for (loss, y) in [(Loss::SoftmaxCrossEntropy, &y_class), (Loss::SquaredError, &y_reg)] {
        for mode in [Mode::Eval, Mode::Train { dropout_seed: seed, step: 3 }] {
            let e = fd_max_rel(&net, &x, y, loss, mode, &params);
            assert!(e < tol, "{dims:?} {act:?} {loss:?} {mode:?}: {e}");
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let acts = [
        (ActivationKind::matern(1.5, 1.0).unwrap(), 1e-4),
        (ActivationKind::matern(2.5, 1.0).unwrap(), 1e-4),
        (ActivationKind::matern(2.5, 0.5).unwrap(), 1e-4),
        (ActivationKind::rbf(0.0, 1.0).unwrap(), 1e-3),
        (ActivationKind::Relu, 1e-4),
        (ActivationKind::Erf, 1e-4),
    ];
    for (act, tol) in acts {
        for seed in [1, 2, 3] {
            gradient_check(&[4, 6, 6, 2], act, tol, seed);
            gradient_check(&[5, 8, 3], act, tol, seed + 10);
        }
    }
}

#[test]
fn dropped_unit_has_zero_incoming_gradient() {
    let net = Network::init(&arch(&[3, 8, 2], ActivationKind::matern(2.5, 1.0).unwrap(), 0.5), 4).unwrap();
    let x = random_inputs(1, 3, 1);
    let y = one_hot(&[1], 2).unwrap();
    let mode = Mode::Train { dropout_seed: 12, step: 0 };
    let (_, g) = net.loss_and_grad(x.view(), y.view(), Loss::SoftmaxCrossEntropy, mode).unwrap();
    // A unit is dropped iff its train-mode output is zero while the eval
    // activation is positive.
    let first = Network::from_parameters(
        &net.arch()[..1],
        vec![net.layers()[0].weights().clone()],
        vec![net.layers()[0].biases().clone()],
    )
    .unwrap();
    let h_eval = first.forward_batch(x.view(), Mode::Eval).unwrap();
    let h_train = first.forward_batch(x.view(), mode).unwrap();
    let mut dropped = 0;
    for u in 0..8 {
        if h_eval[[0, u]] > 0.0 && h_train[[0, u]] == 0.0 {
            dropped += 1;
            assert!(g.weights[0].row(u).iter().all(|&v| v == 0.0));
            assert_eq!(g.biases[0][u], 0.0);
        }
    }
    assert!(dropped > 0);
}

#[test]
fn perfect_fit_is_stationary() {
    let spec = arch(&[2, 4, 1], ActivationKind::matern(2.5, 1.0).unwrap(), 0.0);
    let net = Network::init(&spec, 5).unwrap();
    let x = random_inputs(6, 2, 8);
    let y = net.forward_batch(x.view(), Mode::Eval).unwrap();
    let (l, g) = net.loss_and_grad(x.view(), y.view(), Loss::SquaredError, Mode::Eval).unwrap();
    assert_eq!(l, 0.0);
    assert!(g.norm() < 1e-10);
}

fn toy_problem() -> (Array2<f64>, Array2<f64>) {
    let x = random_inputs(64, 2, 21);
    let labels: Vec<usize> = x.rows().into_iter().map(|r| usize::from(r[0] * r[1] > 0.0)).collect();
    (x, one_hot(&labels, 2).unwrap())
}

fn cfg(lr: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 30,
        batch_size: 16,
        learning_rate: lr,
        lr_decay_epochs: vec![20],
        lr_decay_factor: 0.1,
        seed,
        loss: Loss::SoftmaxCrossEntropy,
    }
}

#[test]
fn training_is_deterministic() {
    let (x, y) = toy_problem();
    let spec = arch(&[2, 16, 2], ActivationKind::matern(2.5, 0.5).unwrap(), 0.2);
    let mut a = Network::init(&spec, 3).unwrap();
    let mut b = Network::init(&spec, 3).unwrap();
    let ra = train(&mut a, x.view(), y.view(), &cfg(0.02, 9)).unwrap();
    let rb = train(&mut b, x.view(), y.view(), &cfg(0.02, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert!(ra.epoch_loss.last().unwrap() < &ra.epoch_loss[0]);
    let mut c = Network::init(&spec, 3).unwrap();
    train(&mut c, x.view(), y.view(), &cfg(0.02, 10)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn zero_learning_rate_leaves_parameters() {
    let (x, y) = toy_problem();
    let spec = arch(&[2, 16, 2], ActivationKind::Relu, 0.0);
    let mut net = Network::init(&spec, 3).unwrap();
    let before = net.clone();
    let r = train(&mut net, x.view(), y.view(), &cfg(0.0, 1)).unwrap();
    assert_eq!(net, before);
    // Shuffling only reorders the summation.
    assert!(r.epoch_loss.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12 * w[0]));
}

#[test]
fn divergence_is_reported() {
    let (x, mut y) = toy_problem();
    y[[0, 0]] = f64::NAN;
    let spec = arch(&[2, 4, 2], ActivationKind::Relu, 0.0);
    let mut net = Network::init(&spec, 3).unwrap();
    let err = train(&mut net, x.view(), y.view(), &cfg(0.01, 1)).unwrap_err();
    assert!(matches!(err, maternact::Error::Training { epoch: 0, .. }));
}

#[test]
fn mc_samples_match_single_passes_and_prefix_stable() {
    let spec = arch(&[3, 10, 7, 2], ActivationKind::matern(1.5, 1.0).unwrap(), 0.3);
    let net = Network::init(&spec, 11).unwrap();
    let x = random_inputs(5, 3, 2);
    let opts = McOptions {
        retain_samples: true,
        reduction: Some(Reduction::MeanOfSoftmax),
    };
    let small = mc_predict_batch(&net, x.view(), 8, 42, opts).unwrap();
    let big = mc_predict_batch(&net, x.view(), 16, 42, opts).unwrap();
    let ss = small.samples.as_ref().unwrap();
    let bs = big.samples.as_ref().unwrap();
    assert_eq!(ss, &bs.slice(ndarray::s![..8, .., ..]));
    let seeds = mc_sample_seeds(42, 8);
    for (k, &sd) in seeds.iter().enumerate() {
        let out = net.forward_batch(x.view(), Mode::McSample { sample_seed: sd }).unwrap();
        assert_eq!(out, ss.index_axis(ndarray::Axis(0), k));
    }
    // Mean is the arithmetic average of the samples, std the population std.
    for i in 0..5 {
        for c in 0..2 {
            let v: Vec<f64> = (0..8).map(|k| ss[[k, i, c]]).collect();
            let m = v.iter().sum::<f64>() / 8.0;
            let sd = (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / 8.0).sqrt();
            assert!((small.mean[[i, c]] - m).abs() <= 1e-15 * m.abs().max(1.0));
            assert!((small.std[[i, c]] - sd).abs() < 1e-12);
        }
        let p = small.probs.as_ref().unwrap().row(i).sum();
        assert!((p - 1.0).abs() < 1e-12);
    }
    let single = mc_predict(&net, &x.row(0).to_vec(), 8, 42, true).unwrap();
    assert_eq!(single.samples.unwrap(), ss.index_axis(ndarray::Axis(1), 0));
}

#[test]
fn dropout_expectation_matches_eval() {
    // Hidden unit output passed through a linear read-out of that unit only.
    let hidden = LayerSpec::new(2, 3, ActivationKind::matern(2.5, 1.0).unwrap(), 0.4).unwrap();
    let out = LayerSpec::new(3, 1, ActivationKind::Identity, 0.0).unwrap();
    let net = Network::from_parameters(
        &[hidden, out],
        vec![
            ndarray::array![[0.8, -0.3], [0.1, 0.9], [-0.5, 0.4]],
            ndarray::array![[1.0, 0.0, 0.0]],
        ],
        vec![Array1::from(vec![0.2, 0.1, 0.3]), Array1::zeros(1)],
    )
    .unwrap();
    let x = [0.5, 0.25];
    let eval = net.forward(&x, Mode::Eval).unwrap()[0];
    let s = 100_000;
    let mc = mc_predict(&net, &x, s, 5, false).unwrap();
    let se = mc.std[0] / (s as f64).sqrt();
    assert!((mc.mean[0] - eval).abs() < 3.0 * se, "{} vs {eval} (se {se})", mc.mean[0]);
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let spec = arch(&[4, 9, 3], ActivationKind::matern(2.5, 0.5).unwrap(), 0.2);
    let net = Network::init(&spec, 17).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    net.save_json(&path).unwrap();
    let back = Network::load_json(&path).unwrap();
    assert_eq!(back, net);
    let x = random_inputs(3, 4, 1);
    let a = net.forward_batch(x.view(), Mode::McSample { sample_seed: 3 }).unwrap();
    let b = back.forward_batch(x.view(), Mode::McSample { sample_seed: 3 }).unwrap();
    assert_eq!(a, b);
    assert!(Network::from_json_str("{\"format\":\"other\",\"version\":1,\"layers\":[]}").is_err());
}
