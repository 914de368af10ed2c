use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::network::FloatNetwork;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            lr: 1.0,
            epochs: 10,
            batch: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Loss `sum((y - t)^2) / (2 * batch)` and its gradient for one batch.
pub fn backprop(
    net: &FloatNetwork,
    inputs: ArrayView2<f64>,
    targets: ArrayView2<f64>,
) -> Result<(f64, Gradients)> {
    let acts = net.activations(inputs)?;
    let out = acts.last().unwrap();
    if out.dim() != targets.dim() {
        return Err(Error::DimensionMismatch {
            expected: out.ncols(),
            actual: targets.ncols(),
            context: "target width",
        });
    }
    let batch = inputs.nrows() as f64;
    let err = out - &targets;
    let loss = err.iter().map(|e| e * e).sum::<f64>() / (2.0 * batch);

    let banks = net.weights.len();
    let mut gw = Vec::with_capacity(banks);
    let mut gb = Vec::with_capacity(banks);
    // dL/dz at the output layer
    let mut delta = &err * &out.mapv(|y| y * (1.0 - y)) / batch;
    for b in (0..banks).rev() {
        gw.push(acts[b].t().dot(&delta));
        gb.push(delta.sum_axis(Axis(0)));
        if b > 0 {
            let a = &acts[b];
            delta = delta.dot(&net.weights[b].t()) * &a.mapv(|v| v * (1.0 - v));
        }
    }
    gw.reverse();
    gb.reverse();
    Ok((
        loss,
        Gradients {
            weights: gw,
            biases: gb,
        },
    ))
}

/// Minibatch gradient descent on mean-squared error with one-hot targets.
pub fn train_backprop(
    net: &FloatNetwork,
    data: &Dataset,
    params: &TrainParams,
) -> Result<FloatNetwork> {
    data.check_compatible(&net.arch)?;
    let targets = data.one_hot(net.arch.output_dim());
    train_on_targets(net, data.inputs().view(), targets.view(), params)
}

/// Minibatch gradient descent on mean-squared error against arbitrary targets.
pub fn train_on_targets(
    net: &FloatNetwork,
    inputs: ArrayView2<f64>,
    targets: ArrayView2<f64>,
    params: &TrainParams,
) -> Result<FloatNetwork> {
    if params.batch == 0 {
        return Err(Error::InvalidDataset("batch size must be positive".into()));
    }
    if inputs.nrows() == 0 || inputs.nrows() != targets.nrows() {
        return Err(Error::InvalidDataset(format!(
            "{} inputs for {} targets",
            inputs.nrows(),
            targets.nrows()
        )));
    }
    let mut net = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = inputs.nrows();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(params.batch) {
            let x = inputs.select(Axis(0), chunk);
            let t = targets.select(Axis(0), chunk);
            let (loss, grads) = backprop(&net, x.view(), t.view())?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, loss });
            }
            epoch_loss += loss * chunk.len() as f64;
            for (w, g) in net.weights.iter_mut().zip(&grads.weights) {
                w.scaled_add(-params.lr, g);
            }
            for (b, g) in net.biases.iter_mut().zip(&grads.biases) {
                b.scaled_add(-params.lr, g);
            }
        }
        let mean = epoch_loss / n as f64;
        if !mean.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, loss: mean });
        }
        log::debug!("epoch {epoch}: loss {mean:.6}");
    }
    Ok(net)
}

/// Float-network accuracy, argmax with ties to the lowest index.
pub(crate) fn float_predictions(net: &FloatNetwork, inputs: ArrayView2<f64>) -> Result<Vec<usize>> {
    let out = net.forward_batch(inputs)?;
    Ok(out
        .rows()
        .into_iter()
        .map(|r| {
            let mut best = 0;
            for i in 1..r.len() {
                if r[i] > r[best] {
                    best = i;
                }
            }
            best
        })
        .collect())
}

impl FloatNetwork {
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        data.check_compatible(&self.arch)?;
        let preds = float_predictions(self, data.inputs().view())?;
        let correct = preds
            .iter()
            .zip(data.labels())
            .filter(|(p, l)| p == l)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }
}
