use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scalar loss used by the gradient checks: L = Σ c_i y_i with random c,
/// so dL/dy = c and every output contributes.
fn probe_loss(y: &[f64], c: &[f64]) -> f64 {
    y.iter().zip(c).map(|(a, b)| a * b).sum()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Central finite differences against analytic gradients, one probe.
fn gradient_check(net: &DenseNet, x: &[f64], c: &[f64]) -> f64 {
    let mut cache = Cache::default();
    let mut grads = NetGrads::zeros_like(net);
    net.forward_cached(x, &mut cache).unwrap();
    let dx = net.backward(x, &cache, c, &mut grads).unwrap();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut perturbed = net.clone();
    for l in 0..net.layers().len() {
        for idx in 0..net.layers()[l].weights.len() {
            let orig = net.layers()[l].weights[idx];
            perturbed.layers_mut()[l].weights[idx] = orig + h;
            let plus = probe_loss(&perturbed.forward(x).unwrap(), c);
            perturbed.layers_mut()[l].weights[idx] = orig - h;
            let minus = probe_loss(&perturbed.forward(x).unwrap(), c);
            perturbed.layers_mut()[l].weights[idx] = orig;
            worst = worst.max(rel_err(grads.weights[l][idx], (plus - minus) / (2.0 * h)));
        }
        for idx in 0..net.layers()[l].bias.len() {
            let orig = net.layers()[l].bias[idx];
            perturbed.layers_mut()[l].bias[idx] = orig + h;
            let plus = probe_loss(&perturbed.forward(x).unwrap(), c);
            perturbed.layers_mut()[l].bias[idx] = orig - h;
            let minus = probe_loss(&perturbed.forward(x).unwrap(), c);
            perturbed.layers_mut()[l].bias[idx] = orig;
            worst = worst.max(rel_err(grads.bias[l][idx], (plus - minus) / (2.0 * h)));
        }
    }
    // Input gradient too.
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let plus = probe_loss(&net.forward(&xp).unwrap(), c);
        xp[i] = orig - h;
        let minus = probe_loss(&net.forward(&xp).unwrap(), c);
        xp[i] = orig;
        worst = worst.max(rel_err(dx[i], (plus - minus) / (2.0 * h)));
    }
    worst
}

#[test]
fn forward_zero_net_is_zero() {
    let net = DenseNet::from_layers(vec![Layer::zeros(3, 4, Activation::Linear)], 3).unwrap();
    assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0; 4]);
}

#[test]
fn forward_identity_weights() {
    let mut layer = Layer::zeros(2, 2, Activation::Linear);
    layer.weights = vec![1.0, 0.0, 0.0, 1.0];
    let net = DenseNet::from_layers(vec![layer], 2).unwrap();
    assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
}

#[test]
fn forward_sigmoid_of_zero_is_half() {
    let net = DenseNet::from_layers(vec![Layer::zeros(3, 1, Activation::Sigmoid)], 3).unwrap();
    assert_eq!(net.forward(&[4.0, -1.0, 7.0]).unwrap(), vec![0.5]);
}

#[test]
fn forward_empty_net_is_identity() {
    let net = DenseNet::identity(3);
    assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    assert_eq!(net.output_dim(), 3);
}

#[test]
fn forward_rejects_wrong_input_dim() {
    let net = DenseNet::new(3, &[(2, Activation::Tanh)], &mut rng(0));
    assert!(matches!(
        net.forward(&[1.0, 2.0]),
        Err(NnError::InputShape { expected: 3, got: 2 })
    ));
}

#[test]
fn backward_zero_upstream_gives_zero_grads() {
    let net = DenseNet::new(3, &[(4, Activation::Tanh), (2, Activation::Linear)], &mut rng(1));
    let x = [0.3, -0.7, 1.1];
    let mut cache = Cache::default();
    net.forward_cached(&x, &mut cache).unwrap();
    let mut grads = NetGrads::zeros_like(&net);
    let dx = net.backward(&x, &cache, &[0.0, 0.0], &mut grads).unwrap();
    assert!(dx.iter().all(|v| *v == 0.0));
    assert!(grads.weights.iter().flatten().all(|v| *v == 0.0));
    assert!(grads.bias.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn backward_linear_layer_is_outer_product() {
    let net = DenseNet::new(2, &[(3, Activation::Linear)], &mut rng(2));
    let x = [0.5, -1.5];
    let dl_dy = [1.0, -2.0, 0.25];
    let mut cache = Cache::default();
    net.forward_cached(&x, &mut cache).unwrap();
    let mut grads = NetGrads::zeros_like(&net);
    net.backward(&x, &cache, &dl_dy, &mut grads).unwrap();
    for (i, d) in dl_dy.iter().enumerate() {
        for (j, xi) in x.iter().enumerate() {
            assert_eq!(grads.weights[0][i * 2 + j], d * xi);
        }
        assert_eq!(grads.bias[0][i], *d);
    }
}

#[test]
fn gradient_check_two_layer_random_net() {
    let mut r = rng(3);
    let net = DenseNet::new(4, &[(6, Activation::Tanh), (3, Activation::Sigmoid)], &mut r);
    let x: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
    assert!(gradient_check(&net, &x, &c) < 1e-4);
}

#[test]
fn gradient_check_every_activation_100_probes() {
    // The repo's layer configurations: relu, sigmoid, tanh and linear
    // stacks in the shapes the presets use (small widths for speed).
    let configs: [&[(usize, Activation)]; 4] = [
        &[(5, Activation::Relu), (4, Activation::Linear)],
        &[(5, Activation::Sigmoid), (5, Activation::Sigmoid), (2, Activation::Linear)],
        &[(6, Activation::Tanh), (1, Activation::Tanh)],
        &[(4, Activation::Relu), (4, Activation::Sigmoid), (3, Activation::Linear)],
    ];
    let mut r = rng(4);
    let mut probes = 0;
    while probes < 100 {
        for spec in configs {
            let net = DenseNet::new(3, spec, &mut r);
            let x: Vec<f64> = (0..3).map(|_| r.gen_range(-1.5..1.5)).collect();
            let c: Vec<f64> = (0..net.output_dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let err = gradient_check(&net, &x, &c);
            assert!(err < 1e-4, "gradient check failed: rel err {err}");
            probes += 1;
        }
    }
}

#[test]
fn input_only_backward_matches_full_backward() {
    let mut r = rng(5);
    let net = DenseNet::new(3, &[(5, Activation::Sigmoid), (2, Activation::Linear)], &mut r);
    let x = [0.2, -0.4, 0.9];
    let dl_dy = [1.5, -0.5];
    let mut cache = Cache::default();
    net.forward_cached(&x, &mut cache).unwrap();
    let mut grads = NetGrads::zeros_like(&net);
    let dx_full = net.backward(&x, &cache, &dl_dy, &mut grads).unwrap();
    let dx_only = net.backward_input_only(&cache, &dl_dy).unwrap();
    assert_eq!(dx_full, dx_only);
}

#[test]
fn adam_zero_gradient_leaves_params_and_moments() {
    let mut net = DenseNet::new(2, &[(3, Activation::Tanh)], &mut rng(6));
    let before = net.clone();
    let grads = NetGrads::zeros_like(&net);
    let mut state = AdamState::new(&net);
    adam_step(&mut net, &grads, &mut state, 0.01).unwrap();
    assert_eq!(net, before);
    assert_eq!(state.t, 1);
}

#[test]
fn adam_first_step_approximates_signed_lr() {
    let mut net = DenseNet::from_layers(vec![Layer::zeros(1, 2, Activation::Linear)], 1).unwrap();
    let mut grads = NetGrads::zeros_like(&net);
    grads.weights[0] = vec![0.5, -0.25];
    grads.bias[0] = vec![0.1, -0.3];
    let mut state = AdamState::new(&net);
    let lr = 0.01;
    adam_step(&mut net, &grads, &mut state, lr).unwrap();
    // First step with bias correction: Δ = -lr·g/(|g| + ε·√bc2/bc1-ish),
    // i.e. -lr·sign(g) up to O(ε/|g|).
    for (p, g) in net.layers()[0].weights.iter().zip(&grads.weights[0]) {
        assert!((p + lr * g.signum()).abs() < 1e-6, "p={p} g={g}");
    }
    for (p, g) in net.layers()[0].bias.iter().zip(&grads.bias[0]) {
        assert!((p + lr * g.signum()).abs() < 1e-6);
    }
}

#[test]
fn adam_is_deterministic() {
    let mut r = rng(7);
    let base = DenseNet::new(3, &[(4, Activation::Relu), (2, Activation::Linear)], &mut r);
    let mut grads = NetGrads::zeros_like(&base);
    for g in grads.weights.iter_mut().chain(grads.bias.iter_mut()) {
        for v in g.iter_mut() {
            *v = r.gen_range(-1.0..1.0);
        }
    }
    let run = |mut net: DenseNet| {
        let mut state = AdamState::new(&net);
        adam_step(&mut net, &grads, &mut state, 0.003).unwrap();
        (net, state)
    };
    let (n1, s1) = run(base.clone());
    let (n2, s2) = run(base.clone());
    assert_eq!(n1, n2);
    assert_eq!(s1, s2);
}

#[test]
fn adam_lr_zero_is_identity_on_params() {
    let mut net = DenseNet::new(2, &[(3, Activation::Sigmoid)], &mut rng(8));
    let before = net.clone();
    let mut grads = NetGrads::zeros_like(&net);
    grads.weights[0].iter_mut().for_each(|v| *v = 1.0);
    let mut state = AdamState::new(&net);
    adam_step(&mut net, &grads, &mut state, 0.0).unwrap();
    assert_eq!(net, before);
}

#[test]
fn adam_rejects_non_finite_gradient_naming_block() {
    let mut net = DenseNet::new(2, &[(2, Activation::Linear), (1, Activation::Linear)], &mut rng(9));
    let mut grads = NetGrads::zeros_like(&net);
    grads.bias[1][0] = f64::NAN;
    let mut state = AdamState::new(&net);
    let err = adam_step(&mut net, &grads, &mut state, 0.01).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("layer 1 bias"), "got: {msg}");
    assert_eq!(state.t, 0);
}

#[test]
fn loss_zero_error_is_zero_for_both_kinds() {
    for spec in [LossSpec::mse(), LossSpec::huber(1.0)] {
        assert_eq!(loss_eval(&spec, 0.7, 0.7), (0.0, 0.0));
    }
}

#[test]
fn huber_quadratic_branch() {
    let (v, d) = loss_eval(&LossSpec::huber(1.0), 1.0, 0.5);
    assert_eq!(v, 0.125);
    assert_eq!(d, 0.5);
}

#[test]
fn huber_linear_branch() {
    let (v, d) = loss_eval(&LossSpec::huber(1.0), 2.0, 0.0);
    assert_eq!(v, 1.5);
    assert_eq!(d, 1.0);
}

#[test]
fn huber_derivative_bounded_by_delta_on_grid() {
    for delta in [0.5, 1.0, 2.0] {
        let spec = LossSpec::huber(delta);
        let mut e = -10.0;
        while e <= 10.0 {
            let (v, d) = loss_eval(&spec, e, 0.0);
            assert!(v >= 0.0);
            assert!(d.abs() <= delta + 1e-15, "delta={delta} e={e} d={d}");
            e += 0.01;
        }
    }
}

#[test]
fn loss_scale_divides_value_and_derivative() {
    let spec = LossSpec::huber(1.0).scaled(4.0);
    let (v, d) = loss_eval(&spec, 2.0, 0.0);
    assert_eq!(v, 1.5 / 4.0);
    assert_eq!(d, 0.25);
}

#[test]
fn glorot_layers_stay_finite_under_updates() {
    let mut r = rng(10);
    let mut net = DenseNet::new(2, &[(8, Activation::Tanh), (1, Activation::Linear)], &mut r);
    let mut state = AdamState::new(&net);
    let mut cache = Cache::default();
    let mut grads = NetGrads::zeros_like(&net);
    for step in 0..200 {
        let x = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let target = x[0] * x[1];
        grads.zero();
        let y = net.forward_cached(&x, &mut cache).unwrap()[0];
        let (_, dl) = loss_eval(&LossSpec::mse(), y, target);
        net.backward(&x, &cache, &[dl], &mut grads).unwrap();
        adam_step(&mut net, &grads, &mut state, 0.01).unwrap();
        assert!(net.all_finite(), "non-finite weights after step {step}");
    }
}
