mod common;

use nnilc::dataset::{build, BuildConfig, Normalization, SourcePair};
use nnilc::nn::{adam_step, retrain_output_layer, train, AdamConfig, AdamState, Layer, Mlp, TrainConfig};
use nnilc::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straight-line evaluator written independently of the library: plain
/// nested loops over the stored row-major weights.
fn naive_forward(model: &Mlp<f64>, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    let n = model.layers.len();
    for (li, l) in model.layers.iter().enumerate() {
        let mut z = vec![0.0; l.outputs];
        for o in 0..l.outputs {
            let mut s = l.biases[o];
            for i in 0..l.inputs {
                s += l.weights[o * l.inputs + i] * a[i];
            }
            z[o] = if li + 1 < n && s < 0.0 { 0.0 } else { s };
        }
        a = z;
    }
    a
}

fn naive_loss(model: &Mlp<f64>, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    let mut sq = 0.0;
    let mut count = 0;
    for (x, y) in xs.iter().zip(ys) {
        for (o, t) in naive_forward(model, x).iter().zip(y) {
            sq += (o - t) * (o - t);
            count += 1;
        }
    }
    let penalty: f64 = model.layers.iter().flat_map(|l| l.weights.iter()).map(|w| w * w).sum();
    sq / count as f64 + model.l2_lambda * penalty
}

fn random_model(dims: &[usize], l2: f64, seed: u64) -> Mlp<f64> {
    let mut m = Mlp::new(dims, l2, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 77);
    for l in &mut m.layers {
        l.biases.iter_mut().for_each(|b| *b = rng.gen_range(-0.1..0.1));
    }
    m
}

fn random_batch(n: usize, dims: &[usize], seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs = (0..n).map(|i| common::random_vec(seed * 31 + i as u64, dims[0], 1.0)).collect();
    let ys = (0..n).map(|i| common::random_vec(seed * 37 + i as u64 + 1000, *dims.last().unwrap(), 1.0)).collect();
    (xs, ys)
}

fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
    v.iter().map(Vec::as_slice).collect()
}

/// Largest relative discrepancy between analytic and central-difference
/// gradients on a 3-sample batch clear of ReLU kinks.
fn worst_gradient_error(dims: &[usize], l2: f64, seed: u64) -> f64 {
    let model = random_model(dims, l2, seed);
    let mut draw = seed;
    let (xs, ys) = loop {
        let (xs, ys) = random_batch(3, dims, draw);
        if xs.iter().all(|x| common::fd::clear_of_kinks(&model, x, 1e-4)) {
            break (xs, ys);
        }
        draw += 1000;
    };
    let (loss, grads) = model.loss_and_grad(&refs(&xs), &refs(&ys)).unwrap();
    assert!((loss - naive_loss(&model, &xs, &ys)).abs() <= 1e-12 * loss.abs().max(1.0));
    let numeric = common::fd::central_difference_gradient(&model, &xs, &ys, 1e-6);
    common::fd::worst_relative_error(&grads, &numeric)
}

#[test]
fn zero_model_outputs_zero() {
    let m = Mlp::<f64>::zeros(&Mlp::<f64>::dims_for(&[100, 100]), 0.0).unwrap();
    let x = common::random_vec(1, 50, 5.0);
    assert_eq!(m.forward(&x).unwrap(), vec![0.0; 25]);
}

#[test]
fn single_active_path_multiplies_weights() {
    let mut m = Mlp::<f64>::zeros(&[3, 2, 2, 1], 0.0).unwrap();
    m.layers[0].weights[0] = 2.0; // unit 0 <- input 0
    m.layers[1].weights[1 * 2] = 3.0; // unit 1 <- unit 0
    m.layers[2].weights[1] = -0.5; // output <- unit 1
    let out = m.forward(&[1.5, 9.0, -4.0]).unwrap();
    assert_eq!(out, vec![2.0 * 3.0 * -0.5 * 1.5]);
}

#[test]
fn forward_matches_naive_evaluator() {
    for seed in 0..5 {
        let m = random_model(&Mlp::<f64>::dims_for(&[100, 100]), 0.0, seed);
        let x = common::random_vec(seed + 100, 50, 2.0);
        let fast = m.forward(&x).unwrap();
        let slow = naive_forward(&m, &x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }
    let m = Mlp::<f64>::default_architecture(0.0, 0);
    assert!(matches!(m.forward(&[0.0; 49]), Err(Error::Dimension(_))));
}

#[test]
fn he_uniform_init_bounds() {
    let m = Mlp::<f64>::default_architecture(0.0, 3);
    assert_eq!(m.dims(), vec![50, 100, 100, 25]);
    assert_eq!(m.n_params(), 50 * 100 + 100 + 100 * 100 + 100 + 100 * 25 + 25);
    for l in &m.layers {
        let bound = (6.0 / l.inputs as f64).sqrt();
        assert!(l.weights.iter().all(|w| w.abs() <= bound));
        assert!(l.biases.iter().all(|b| *b == 0.0));
    }
    assert_eq!(m, Mlp::default_architecture(0.0, 3));
    assert_ne!(m, Mlp::default_architecture(0.0, 4));
}

#[test]
fn perfect_fit_has_zero_loss_and_gradient() {
    let m = random_model(&[6, 5, 4], 0.0, 1);
    let (xs, _) = random_batch(4, &[6, 5, 4], 9);
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| m.forward(x).unwrap()).collect();
    let (loss, grads) = m.loss_and_grad(&refs(&xs), &refs(&ys)).unwrap();
    assert_eq!(loss, 0.0);
    assert!(grads.iter().all(|g| g.weights.iter().chain(&g.biases).all(|v| *v == 0.0)));
}

#[test]
fn regularizer_only_gradient() {
    let l2 = 0.3;
    let m = random_model(&[6, 5, 4], l2, 2);
    let (xs, _) = random_batch(2, &[6, 5, 4], 3);
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| m.forward(x).unwrap()).collect();
    let (_, grads) = m.loss_and_grad(&refs(&xs), &refs(&ys)).unwrap();
    for (l, g) in m.layers.iter().zip(&grads) {
        for (w, gw) in l.weights.iter().zip(&g.weights) {
            assert_eq!(*gw, 2.0 * l2 * w);
        }
        assert!(g.biases.iter().all(|b| *b == 0.0));
    }
}

#[test]
fn gradients_match_finite_differences_small_nets() {
    for seed in 0..5 {
        let worst = worst_gradient_error(&[50, 12, 10, 25], 1e-3, seed);
        assert!(worst < 1e-6, "seed {seed}: {worst}");
    }
}

#[test]
fn non_finite_values_are_located() {
    let m = random_model(&[4, 3, 2], 0.0, 1);
    let x = vec![1.0, f64::NAN, 0.0, 0.0];
    let y = vec![0.0, 0.0];
    let err = m.loss_and_grad(&[&x], &[&y]).unwrap_err();
    assert!(matches!(&err, Error::NonFinite(msg) if msg.contains("layer 0")), "{err}");
    assert!(m.loss_and_grad(&[], &[]).is_err());
}

#[test]
fn adam_first_step_reference() {
    let mut params: Vec<Layer<f64>> = vec![Layer { inputs: 1, outputs: 1, weights: vec![0.0], biases: vec![0.0] }];
    let grads = vec![Layer { inputs: 1, outputs: 1, weights: vec![1.0], biases: vec![0.0] }];
    let mut state = AdamState::new(&params, AdamConfig::default()).unwrap();
    adam_step(&mut params, &grads, &mut state, 0.001, &[]).unwrap();
    let expected = -0.001 * (1.0 / (1.0 + 1e-8));
    assert!((params[0].weights[0] - expected).abs() < 1e-18);
    assert!((params[0].weights[0] + 0.000999999990).abs() < 1e-12);
    assert_eq!(params[0].biases[0], 0.0);
    assert_eq!(state.step, 1);
}

#[test]
fn adam_zero_gradient_and_moment_decay() {
    let mut params: Vec<Layer<f64>> = vec![Layer { inputs: 2, outputs: 1, weights: vec![0.5, -1.0], biases: vec![0.25] }];
    let zero = vec![Layer::zeros(2, 1)];
    let mut state = AdamState::new(&params, AdamConfig::default()).unwrap();
    let before = params.clone();
    adam_step(&mut params, &zero, &mut state, 0.01, &[]).unwrap();
    assert_eq!(params, before);
    state.first[0].weights = vec![1.0, 2.0];
    state.second[0].weights = vec![4.0, 8.0];
    adam_step(&mut params, &zero, &mut state, 0.01, &[]).unwrap();
    assert_eq!(state.first[0].weights, vec![0.9, 1.8]);
    assert!((state.second[0].weights[0] - 4.0 * 0.999).abs() < 1e-15);
}

#[test]
fn adam_constant_gradient_update_tends_to_lr() {
    let mut params: Vec<Layer<f64>> = vec![Layer { inputs: 1, outputs: 1, weights: vec![0.0], biases: vec![0.0] }];
    let grads = vec![Layer { inputs: 1, outputs: 1, weights: vec![-3.0], biases: vec![0.0] }];
    let mut state = AdamState::new(&params, AdamConfig::default()).unwrap();
    let lr = 0.01f64;
    let mut last = 0.0f64;
    for _ in 0..5000 {
        let prev = params[0].weights[0];
        adam_step(&mut params, &grads, &mut state, lr, &[]).unwrap();
        last = params[0].weights[0] - prev;
    }
    assert!(last > 0.0);
    assert!((last - lr).abs() < 1e-6 * lr, "{last}");
}

fn sine_sources(n_src: usize, len: usize, identity: bool) -> Vec<SourcePair<f64>> {
    (0..n_src)
        .map(|i| {
            let w = 0.5 + 14.5 * ((i * 7) % n_src) as f64 / n_src as f64;
            let q = common::sine(len, 3.0, w, 0.2 * i as f64, 5.0 - i as f64);
            // a lagging command makes the non-identity target
            let u = if identity { q.clone() } else { common::sine(len, 3.3, w, 0.2 * i as f64 + 0.05 * w, 5.0 - i as f64) };
            SourcePair { joint_index: 0, source_id: i, q_d: q, u }
        })
        .collect()
}

#[test]
fn identity_task_is_learned() {
    let ds = build(&sine_sources(30, 600, true), &BuildConfig { stride: 5, residual_target: false, ..Default::default() }).unwrap();
    let j = &ds.joints[0];
    let mut m = Mlp::default_architecture(0.0, 1);
    let cfg = TrainConfig { epochs: 60, batch_size: 32, patience: None, ..Default::default() };
    let report = train(&mut m, j, &cfg).unwrap();
    assert!(report.train_mse[9] < report.train_mse[0]);
    let val = *report.validation_mse.last().unwrap();
    assert!(val < 1e-3, "validation mse {val} deg^2");
    // inference in physical units reproduces the future half of the window
    let p = &j.pairs[j.split.validation[0]];
    let out = m.infer(&p.x).unwrap();
    assert!(common::rel_err(&out, &p.y) < 0.05);
}

#[test]
fn infer_requires_normalization() {
    let m = Mlp::<f64>::default_architecture(0.0, 0);
    assert!(m.infer(&[0.0; 50]).is_err());
}

#[test]
fn training_is_seeded() {
    let ds = build(&sine_sources(4, 400, false), &BuildConfig { stride: 5, ..Default::default() }).unwrap();
    let cfg = TrainConfig { epochs: 3, batch_size: 16, ..Default::default() };
    let run = |seed| {
        let mut m = Mlp::default_architecture(1e-5, 2);
        let r = train(&mut m, &ds.joints[0], &TrainConfig { seed, ..cfg.clone() }).unwrap();
        (m, r)
    };
    let (a, ra) = run(1);
    let (b, rb) = run(1);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert_ne!(a, run(2).0);
}

#[test]
fn freeze_mask_keeps_layers_bitwise() {
    let ds = build(&sine_sources(4, 400, false), &BuildConfig { stride: 5, ..Default::default() }).unwrap();
    let mut m = Mlp::default_architecture(1e-4, 3);
    let before = m.clone();
    let cfg = TrainConfig { epochs: 3, batch_size: 16, freeze_mask: vec![true, false, true], ..Default::default() };
    train(&mut m, &ds.joints[0], &cfg).unwrap();
    for (i, flag) in [true, false, true].iter().enumerate() {
        let same = m.layers[i]
            .weights
            .iter()
            .chain(&m.layers[i].biases)
            .zip(before.layers[i].weights.iter().chain(&before.layers[i].biases))
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert_eq!(same, *flag, "layer {i}");
    }
    let all_frozen = TrainConfig { freeze_mask: vec![true; 3], ..cfg };
    assert!(train(&mut m, &ds.joints[0], &all_frozen).is_err());
}

#[test]
fn retraining_touches_only_output_layer() {
    let ds = build(&sine_sources(10, 600, false), &BuildConfig { stride: 5, ..Default::default() }).unwrap();
    let mut m = Mlp::default_architecture(1e-5, 4);
    train(&mut m, &ds.joints[0], &TrainConfig { epochs: 20, batch_size: 32, ..Default::default() }).unwrap();
    let before = m.clone();
    // same data: nothing to close
    let report = retrain_output_layer(&mut m, &ds.joints[0], &TrainConfig { epochs: 10, batch_size: 32, ..Default::default() }).unwrap();
    for i in 0..2 {
        assert_eq!(m.layers[i], before.layers[i]);
    }
    assert_eq!(m.normalization, before.normalization);
    let j = &ds.joints[0];
    let val = |model: &Mlp<f64>| {
        let norm = model.normalization.unwrap();
        let data = j.normalized(nnilc::dataset::Subset::Validation);
        let xs: Vec<&[f64]> = data.iter().map(|p| p.x.as_slice()).collect();
        let ys: Vec<&[f64]> = data.iter().map(|p| p.y.as_slice()).collect();
        model.mse(&xs, &ys).unwrap() * norm.target_scale * norm.target_scale
    };
    let (v0, v1) = (val(&before), val(&m));
    assert!((v1 - v0).abs() / v0 < 0.05 || v1 < v0, "{v0} -> {v1}");
    assert!(report.validation_mse.len() <= 10);
    assert!(retrain_output_layer(&mut Mlp::default_architecture(0.0, 1), j, &TrainConfig::default()).is_err());
}

#[test]
fn divergence_is_reported() {
    let ds = build(&sine_sources(2, 300, false), &BuildConfig { stride: 5, ..Default::default() }).unwrap();
    let mut m = Mlp::default_architecture(0.0, 5);
    m.layers[2].weights[0] = f64::INFINITY;
    let err = train(&mut m, &ds.joints[0], &TrainConfig { epochs: 2, ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::Diverged { epoch: 0, .. }), "{err}");
}

#[test]
fn save_load_is_bit_exact() {
    let mut m = random_model(&Mlp::<f64>::dims_for(&[100, 100]), 1e-4, 8);
    m.normalization = Some(Normalization {
        input_shift: 0.1234567891234,
        input_scale: 17.25,
        target_shift: -3.0e-7,
        target_scale: 0.3,
        anchor_centered: true,
        residual_target: true,
        degenerate: false,
    });
    m.joint_index = 4;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mlp");
    m.save(&path).unwrap();
    let back = Mlp::<f64>::load(&path).unwrap();
    assert_eq!(back.dims(), m.dims());
    assert_eq!(back.l2_lambda.to_bits(), m.l2_lambda.to_bits());
    assert_eq!(back.normalization, m.normalization);
    assert_eq!(back.joint_index, 4);
    let x = common::random_vec(3, 50, 10.0);
    let (a, b) = (m.infer(&x).unwrap(), back.infer(&x).unwrap());
    assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    assert_eq!(back.to_bytes(), std::fs::read(&path).unwrap());
    assert!(Mlp::<f64>::load_expecting(&path, &[50, 100, 25]).is_err());
    assert!(Mlp::<f64>::load_expecting(&path, &[50, 100, 100, 25]).is_ok());
}

#[test]
fn corrupted_model_files_rejected() {
    let m = Mlp::<f64>::default_architecture(0.0, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mlp");
    let mut bytes = m.to_bytes();
    bytes[2] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    let err = Mlp::<f64>::load(&path).unwrap_err();
    assert!(matches!(&err, Error::Format { reason, .. } if reason.contains("magic")), "{err}");
    let mut short = m.to_bytes();
    short.pop();
    std::fs::write(&path, &short).unwrap();
    assert!(matches!(Mlp::<f64>::load(&path), Err(Error::Format { .. })));
    assert!(matches!(Mlp::<f64>::load(dir.path().join("none.mlp")), Err(Error::MissingArtifact { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn forward_is_deterministic_and_finite(seed in any::<u64>(), xs in prop::collection::vec(-50.0f64..50.0, 50)) {
        let m = Mlp::<f64>::default_architecture(0.0, seed);
        let a = m.forward(&xs).unwrap();
        prop_assert_eq!(&a, &m.forward(&xs).unwrap());
        prop_assert!(a.iter().all(|v| v.is_finite()));
    }
}
