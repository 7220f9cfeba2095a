//! Multilayer perceptron: tanh hidden layers, softmax output, cross-entropy
//! loss, mini-batch SGD with momentum and inverted dropout.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_layers: Vec<usize>,
    /// Drop probability applied after the first hidden layer.
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Standardize inputs with training-set mean and deviation.
    pub standardize: bool,
    /// Expected input width; checked against the training schema when set.
    pub input_width: Option<usize>,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: vec![100, 100, 100],
            dropout: 0.5,
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            standardize: true,
            input_width: None,
            seed: 0,
        }
    }
}

impl MlpConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config(
                "hidden layers must have at least one node".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("momentum must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn glorot(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Layer {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.gen_range(-limit..limit))
                .collect(),
            biases: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.biases.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    /// Per-feature `(mean, scale)` applied before the first layer.
    pub standardizer: Option<Vec<(f64, f64)>>,
    pub dropout: f64,
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

/// Activations of one forward pass, kept for backpropagation.
struct Trace {
    /// `activations[0]` is the input; the last entry holds softmax output.
    activations: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers for the first hidden layer, if active.
    mask: Option<Vec<f64>>,
}

impl Mlp {
    /// Randomly initialized network with layer widths `sizes` (input first).
    pub fn new(sizes: &[usize], dropout: f64, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let layers = sizes
            .windows(2)
            .map(|w| Layer::glorot(w[0], w[1], &mut rng))
            .collect();
        Mlp {
            layers,
            standardizer: None,
            dropout,
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardizer {
            Some(s) => x.iter().zip(s).map(|(v, (m, sd))| (v - m) / sd).collect(),
            None => x.to_vec(),
        }
    }

    fn forward(&self, x: &[f64], dropout_rng: Option<&mut ChaCha8Rng>) -> Trace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        let mut mask = None;
        let mut rng = dropout_rng;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.forward(&activations[i], &mut z);
            if i == last {
                softmax_in_place(&mut z);
            } else {
                z.iter_mut().for_each(|v| *v = v.tanh());
                if i == 0 && self.dropout > 0.0 {
                    if let Some(rng) = rng.as_deref_mut() {
                        let keep = 1.0 - self.dropout;
                        let m: Vec<f64> = (0..z.len())
                            .map(|_| {
                                if rng.gen::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                            .collect();
                        z.iter_mut().zip(&m).for_each(|(v, k)| *v *= k);
                        mask = Some(m);
                    }
                }
            }
            activations.push(z);
        }
        Trace { activations, mask }
    }

    /// Class probabilities for a raw (unstandardized) input.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let x = self.standardize(x);
        self.forward(&x, None)
            .activations
            .pop()
            .expect("network has an output layer")
    }

    /// Adds the gradient of `-ln p[target]` for one sample to `grads`
    /// (same layout as [`Mlp::parameters`]); returns the loss.
    fn backprop(&self, trace: &Trace, target: usize, grads: &mut [f64]) -> f64 {
        let output = trace.activations.last().expect("output");
        let loss = -output[target].max(f64::MIN_POSITIVE).ln();
        // softmax + cross-entropy
        let mut delta: Vec<f64> = output.clone();
        delta[target] -= 1.0;

        let offsets = self.offsets();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &trace.activations[i];
            let (w_off, b_off) = offsets[i];
            for o in 0..layer.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grads[w_off + o * layer.inputs..w_off + (o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(g, x)| *g += d * x);
                grads[b_off + o] += d;
            }
            if i == 0 {
                break;
            }
            // delta for the previous layer's pre-activation
            let mut prev = vec![0.0; layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
            }
            // input[j] = tanh(z_j) * mask_j for the first hidden layer
            let mask = if i == 1 { trace.mask.as_deref() } else { None };
            for (j, p) in prev.iter_mut().enumerate() {
                let scale = mask.map_or(1.0, |m| m[j]);
                let t = if scale == 0.0 { 0.0 } else { input[j] / scale };
                *p *= (1.0 - t * t) * scale;
            }
            delta = prev;
        }
        loss
    }

    /// `(weights offset, biases offset)` of each layer in the flat parameter vector.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut offset = 0;
        self.layers
            .iter()
            .map(|l| {
                let w = offset;
                let b = w + l.weights.len();
                offset = b + l.biases.len();
                (w, b)
            })
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// All weights and biases, layer by layer (weights first).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.num_parameters(), "parameter count");
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, r) = r.split_at(l.biases.len());
            l.biases.copy_from_slice(b);
            rest = r;
        }
    }

    /// Mean cross-entropy over the samples and its analytic gradient, with
    /// dropout disabled. Inputs bypass the standardizer.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], targets: &[usize]) -> (f64, Vec<f64>) {
        let mut grads = vec![0.0; self.num_parameters()];
        let mut loss = 0.0;
        for (x, &t) in xs.iter().zip(targets) {
            let trace = self.forward(x, None);
            loss += self.backprop(&trace, t, &mut grads);
        }
        let n = xs.len() as f64;
        grads.iter_mut().for_each(|g| *g /= n);
        (loss / n, grads)
    }

    /// Mean cross-entropy with dropout disabled; inputs bypass the standardizer.
    pub fn loss(&self, xs: &[&[f64]], targets: &[usize]) -> f64 {
        xs.iter()
            .zip(targets)
            .map(|(x, &t)| {
                -self.forward(x, None).activations.last().unwrap()[t]
                    .max(f64::MIN_POSITIVE)
                    .ln()
            })
            .sum::<f64>()
            / xs.len() as f64
    }
}

/// Trains a network on row-major `rows` with class indices `targets`.
pub fn fit(rows: &[&[f64]], targets: &[usize], n_classes: usize, cfg: &MlpConfig) -> Result<Mlp> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let width = rows[0].len();
    if let Some(expected) = cfg.input_width {
        if expected != width {
            return Err(Error::WidthMismatch {
                expected,
                found: width,
            });
        }
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: row.len(),
            });
        }
        if let Some(f) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                instance: r,
                feature: f,
            });
        }
    }

    let mut sizes = Vec::with_capacity(cfg.hidden_layers.len() + 2);
    sizes.push(width);
    sizes.extend_from_slice(&cfg.hidden_layers);
    sizes.push(n_classes);
    let mut net = Mlp::new(&sizes, cfg.dropout, cfg.seed);

    let inputs: Vec<Vec<f64>> = if cfg.standardize {
        let n = rows.len() as f64;
        let stats: Vec<(f64, f64)> = (0..width)
            .map(|f| {
                let mean = rows.iter().map(|r| r[f]).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r[f] - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                (mean, if sd > 1e-12 { sd } else { 1.0 })
            })
            .collect();
        net.standardizer = Some(stats);
        rows.iter().map(|r| net.standardize(r)).collect()
    } else {
        rows.iter().map(|r| r.to_vec()).collect()
    };

    let mut rng = stream_rng(cfg.seed, 1);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut velocity = vec![0.0; net.num_parameters()];
    let mut params = net.parameters();
    let mut grads = vec![0.0; params.len()];
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let trace = net.forward(&inputs[i], Some(&mut rng));
                epoch_loss += net.backprop(&trace, targets[i], &mut grads);
            }
            let scale = cfg.learning_rate / batch.len() as f64;
            for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(&grads) {
                *v = cfg.momentum * *v - scale * g;
                *p += *v;
            }
            net.set_parameters(&params);
        }
        if !epoch_loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    Ok(net)
}
