use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::{Error, Label, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }
}

/// Fully connected layer computing `activation(W x + b)`, `W` stored `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    fn forward(&self, input: &Matrix) -> Matrix {
        let out_dim = self.out_dim();
        let mut out = Matrix::zeros(input.rows(), out_dim);
        for i in 0..input.rows() {
            let x = input.row(i);
            let y = out.row_mut(i);
            for (o, y_o) in y.iter_mut().enumerate() {
                let w = self.weights.row(o);
                let z = self.bias[o] + dot(w, x);
                *y_o = self.activation.apply(z);
            }
        }
        out
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Stack of dense layers. The last layer is always linear, so outputs are raw
/// Q-values or logits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Gradient of one layer, same shapes as the layer's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter-shaped gradient collection for a [`DenseNet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: Matrix::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    /// True when every tensor has the shape of the matching parameter in `net`.
    pub fn matches(&self, net: &DenseNet) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.rows() == l.out_dim()
                    && g.weights.cols() == l.in_dim()
                    && g.bias.len() == l.out_dim()
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> + '_ {
        self.layers
            .iter()
            .flat_map(|g| g.weights.as_slice().iter().chain(g.bias.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|g| g.weights.as_mut_slice().iter_mut().chain(g.bias.iter_mut()))
    }

    /// Flattened in the same order as [`DenseNet::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    pub fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|g| *g *= factor);
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() || self.iter().count() != other.iter().count() {
            return Err(Error::invalid("gradient shapes differ"));
        }
        self.iter_mut().zip(other.iter()).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

impl DenseNet {
    /// Validates that layer dimensions chain, the final layer is linear and
    /// every parameter is finite.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let last = layers
            .last()
            .ok_or_else(|| Error::invalid("network needs at least one layer"))?;
        if last.activation != Activation::Identity {
            return Err(Error::invalid(
                "final layer must use the identity activation",
            ));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.in_dim() == 0 || l.out_dim() == 0 {
                return Err(Error::invalid(format!("layer {k} has a zero dimension")));
            }
            if l.bias.len() != l.out_dim() {
                return Err(Error::invalid(format!(
                    "layer {k}: bias length {} != output size {}",
                    l.bias.len(),
                    l.out_dim()
                )));
            }
            if k > 0 && l.in_dim() != layers[k - 1].out_dim() {
                return Err(Error::invalid(format!(
                    "layer {k} expects {} inputs but layer {} produces {}",
                    l.in_dim(),
                    k - 1,
                    layers[k - 1].out_dim()
                )));
            }
            if !l.weights.is_finite() || l.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::invalid(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
        }
        Ok(DenseNet { layers })
    }

    /// Multilayer perceptron with ReLU hidden layers, Glorot-uniform weights
    /// (`±sqrt(6 / (fan_in + fan_out))`) and zero biases.
    pub fn glorot<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        output_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(hidden);
        dims.push(output_dim);
        if dims.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (k, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..=limit))
                .collect();
            let activation = if k + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::Relu
            };
            layers.push(Layer {
                weights: Matrix::from_vec(fan_out, fan_in, data)?,
                bias: vec![0.0; fan_out],
                activation,
            });
        }
        DenseNet::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim() * (l.in_dim() + 1))
            .sum()
    }

    /// All parameters, layer by layer, weights (row-major) before biases.
    pub fn parameters(&self) -> impl Iterator<Item = &f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(l.bias.iter()))
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    fn check_batch(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::invalid(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        if !batch.is_finite() {
            return Err(Error::invalid("batch contains non-finite values"));
        }
        Ok(())
    }

    /// One output row (Q-values or logits) per input row.
    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_batch(batch)?;
        let mut act = self.layers[0].forward(batch);
        for layer in &self.layers[1..] {
            act = layer.forward(&act);
        }
        Ok(act)
    }

    pub fn forward_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = Matrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.forward(&batch)?.into_vec())
    }

    /// Activations of every layer, input first.
    fn forward_cached(&self, batch: &Matrix) -> Vec<Matrix> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(batch.clone());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty"));
            acts.push(next);
        }
        acts
    }

    /// Backpropagates `delta = dL/d(output)` through the cached activations.
    fn backprop(&self, acts: &[Matrix], mut delta: Matrix) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        let n = delta.rows();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &acts[k];
            let g = &mut grads.layers[k];
            for i in 0..n {
                let d = delta.row(i);
                let x = input.row(i);
                for (o, &d_o) in d.iter().enumerate() {
                    if d_o == 0.0 {
                        continue;
                    }
                    g.bias[o] += d_o;
                    for (gw, &xv) in g.weights.row_mut(o).iter_mut().zip(x) {
                        *gw += d_o * xv;
                    }
                }
            }
            if k == 0 {
                break;
            }
            let mut prev = Matrix::zeros(n, layer.in_dim());
            for i in 0..n {
                let d = delta.row(i);
                let p = prev.row_mut(i);
                for (o, &d_o) in d.iter().enumerate() {
                    if d_o == 0.0 {
                        continue;
                    }
                    for (pv, &w) in p.iter_mut().zip(layer.weights.row(o)) {
                        *pv += d_o * w;
                    }
                }
            }
            if self.layers[k - 1].activation == Activation::Relu {
                for (pv, &a) in prev.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if a <= 0.0 {
                        *pv = 0.0;
                    }
                }
            }
            delta = prev;
        }
        grads
    }

    /// Q-regression head: `loss = Σ_i (target_i − Q(s_i, a_i))²`.
    ///
    /// Only the output of the taken action receives gradient.
    pub fn backward_q_mse(
        &self,
        batch: &Matrix,
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Gradients)> {
        self.check_batch(batch)?;
        let n = batch.rows();
        if actions.len() != n || targets.len() != n {
            return Err(Error::invalid(format!(
                "batch of {n} rows but {} actions and {} targets",
                actions.len(),
                targets.len()
            )));
        }
        let out_dim = self.output_dim();
        if let Some(&a) = actions.iter().find(|&&a| a >= out_dim) {
            return Err(Error::invalid(format!(
                "action {a} out of range for {out_dim} outputs"
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("non-finite TD target"));
        }
        let acts = self.forward_cached(batch);
        let q = acts.last().expect("output layer");
        let mut delta = Matrix::zeros(n, out_dim);
        let mut loss = 0.0;
        for i in 0..n {
            let err = targets[i] - q.get(i, actions[i]);
            loss += err * err;
            delta.set(i, actions[i], -2.0 * err);
        }
        Ok((loss, self.backprop(&acts, delta)))
    }

    /// Class-weighted cross-entropy on softmax of the logits:
    /// `loss = Σ_i w[l_i] · (−log softmax(z_i)[l_i])`.
    pub fn backward_weighted_ce(
        &self,
        batch: &Matrix,
        labels: &[Label],
        class_weights: [f64; 2],
    ) -> Result<(f64, Gradients)> {
        self.check_batch(batch)?;
        let n = batch.rows();
        if labels.len() != n {
            return Err(Error::invalid(format!(
                "batch of {n} rows but {} labels",
                labels.len()
            )));
        }
        if self.output_dim() != 2 {
            return Err(Error::invalid("cross-entropy head needs exactly 2 outputs"));
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::invalid(format!("label {l} is not binary")));
        }
        if class_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("class weights must be positive and finite"));
        }
        let acts = self.forward_cached(batch);
        let logits = acts.last().expect("output layer");
        let mut delta = Matrix::zeros(n, 2);
        let mut loss = 0.0;
        for (i, &label) in labels.iter().enumerate() {
            let z = logits.row(i);
            let l = label as usize;
            let w = class_weights[l];
            let max = z[0].max(z[1]);
            let lse = max + ((z[0] - max).exp() + (z[1] - max).exp()).ln();
            loss += w * (lse - z[l]);
            let d = delta.row_mut(i);
            for c in 0..2 {
                let p = (z[c] - lse).exp();
                d[c] = w * (p - if c == l { 1.0 } else { 0.0 });
            }
        }
        Ok((loss, self.backprop(&acts, delta)))
    }
}
