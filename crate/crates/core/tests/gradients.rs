//! Finite-difference checks of both loss heads, plus batch/sample additivity.

use dqnimb::nn::{softmax, DenseNet, Gradients, Matrix};
use dqnimb::seed::rng_from;
use dqnimb::Label;
use rand::Rng;

const H: f64 = 1e-6;

fn random_net(rng: &mut impl Rng) -> DenseNet {
    let input = rng.random_range(1..=5);
    let depth = rng.random_range(0..=2);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(2..=6)).collect();
    let mut net = DenseNet::glorot(input, &hidden, 2, rng).unwrap();
    // Non-zero biases so the check also covers the bias path.
    for layer_param in net.parameters_mut() {
        *layer_param += rng.random_range(-0.1..0.1);
    }
    net
}

fn random_batch(rng: &mut impl Rng, rows: usize, dim: usize) -> Matrix {
    let data = (0..rows * dim)
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    Matrix::from_vec(rows, dim, data).unwrap()
}

/// Independent loss oracles built on `forward` only.
fn q_loss(net: &DenseNet, x: &Matrix, actions: &[usize], targets: &[f64]) -> f64 {
    let q = net.forward(x).unwrap();
    (0..x.rows())
        .map(|i| (targets[i] - q.get(i, actions[i])).powi(2))
        .sum()
}

fn ce_loss(net: &DenseNet, x: &Matrix, labels: &[Label], w: [f64; 2]) -> f64 {
    let z = net.forward(x).unwrap();
    (0..x.rows())
        .map(|i| {
            let p = softmax(z.row(i));
            -w[labels[i] as usize] * p[labels[i] as usize].ln()
        })
        .sum()
}

fn max_rel_error(net: &DenseNet, analytic: &Gradients, loss: impl Fn(&DenseNet) -> f64) -> f64 {
    let analytic = analytic.flatten();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        *plus.parameters_mut().nth(k).unwrap() += H;
        let mut minus = net.clone();
        *minus.parameters_mut().nth(k).unwrap() -= H;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * H);
        let denom = a.abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}

#[test]
fn q_head_matches_central_differences() {
    let mut rng = rng_from(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let net = random_net(&mut rng);
        let n = rng.random_range(1..=6);
        let x = random_batch(&mut rng, n, net.input_dim());
        let actions: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let (loss, grads) = net.backward_q_mse(&x, &actions, &targets).unwrap();
        assert!((loss - q_loss(&net, &x, &actions, &targets)).abs() < 1e-12);
        worst = worst.max(max_rel_error(&net, &grads, |m| {
            q_loss(m, &x, &actions, &targets)
        }));
    }
    assert!(worst <= 1e-4, "max relative error {worst}");
}

#[test]
fn ce_head_matches_central_differences() {
    let mut rng = rng_from(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let net = random_net(&mut rng);
        let n = rng.random_range(1..=6);
        let x = random_batch(&mut rng, n, net.input_dim());
        let labels: Vec<Label> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let w = [rng.random_range(0.5..2.0), rng.random_range(0.5..20.0)];
        let (loss, grads) = net.backward_weighted_ce(&x, &labels, w).unwrap();
        assert!((loss - ce_loss(&net, &x, &labels, w)).abs() < 1e-10);
        worst = worst.max(max_rel_error(&net, &grads, |m| ce_loss(m, &x, &labels, w)));
    }
    assert!(worst <= 1e-4, "max relative error {worst}");
}

#[test]
fn batch_equals_sum_of_single_samples() {
    let mut rng = rng_from(303);
    for _ in 0..20 {
        let net = random_net(&mut rng);
        let n = 7;
        let x = random_batch(&mut rng, n, net.input_dim());
        let actions: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<Label> = actions.iter().map(|&a| a as Label).collect();

        let (batch_q, batch_qg) = net.backward_q_mse(&x, &actions, &targets).unwrap();
        let (batch_c, batch_cg) = net.backward_weighted_ce(&x, &labels, [1.0, 3.0]).unwrap();
        let mut sum_q = 0.0;
        let mut sum_c = 0.0;
        let mut acc_q = Gradients::zeros_like(&net);
        let mut acc_c = Gradients::zeros_like(&net);
        for i in 0..n {
            let row = Matrix::from_rows(&[x.row(i).to_vec()]).unwrap();
            let (l, g) = net
                .backward_q_mse(&row, &actions[i..=i], &targets[i..=i])
                .unwrap();
            sum_q += l;
            acc_q.add_assign(&g).unwrap();
            let (l, g) = net
                .backward_weighted_ce(&row, &labels[i..=i], [1.0, 3.0])
                .unwrap();
            sum_c += l;
            acc_c.add_assign(&g).unwrap();
        }
        assert!((batch_q - sum_q).abs() <= 1e-10);
        assert!((batch_c - sum_c).abs() <= 1e-10);
        for (a, b) in batch_qg
            .iter()
            .zip(acc_q.iter())
            .chain(batch_cg.iter().zip(acc_c.iter()))
        {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn q_head_only_touches_taken_action_output() {
    // Gradient of the output-layer row for the untaken action must be zero.
    let mut rng = rng_from(404);
    let net = DenseNet::glorot(3, &[4], 2, &mut rng).unwrap();
    let x = random_batch(&mut rng, 5, 3);
    let actions = vec![1; 5];
    let targets = vec![0.7; 5];
    let (_, grads) = net.backward_q_mse(&x, &actions, &targets).unwrap();
    let out = grads.layers.last().unwrap();
    assert!(out.weights.row(0).iter().all(|&g| g == 0.0));
    assert_eq!(out.bias[0], 0.0);
    assert!(out.bias[1] != 0.0);
}

#[test]
fn softmax_preserves_argmax() {
    let mut rng = rng_from(505);
    for _ in 0..1000 {
        let z: Vec<f64> = (0..2).map(|_| rng.random_range(-50.0..50.0)).collect();
        let p = softmax(&z);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(dqnimb::nn::argmax(&z), dqnimb::nn::argmax(&p));
    }
}
