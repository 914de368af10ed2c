use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neurons per layer, input first and output last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NetworkArch(Vec<usize>);

impl NetworkArch {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::InvalidArch(format!(
                "need input, at least one hidden and an output layer, got {} layers",
                layer_sizes.len()
            )));
        }
        if let Some(pos) = layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidArch(format!("layer {pos} has zero neurons")));
        }
        Ok(Self(layer_sizes))
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn input_dim(&self) -> usize {
        self.0[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// One weight bank per pair of adjacent layers.
    pub fn bank_count(&self) -> usize {
        self.0.len() - 1
    }

    /// `(fan_in, fan_out)` of every bank.
    pub fn bank_shapes(&self) -> Vec<(usize, usize)> {
        self.0.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn synapse_count(&self) -> usize {
        self.bank_shapes().iter().map(|(r, c)| r * c).sum()
    }

    pub fn neuron_count(&self) -> usize {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<usize>> for NetworkArch {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NetworkArch> for Vec<usize> {
    fn from(a: NetworkArch) -> Self {
        a.0
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Float network. `weights[b]` is `fan_in x fan_out`; `biases[b]` belongs to layer `b + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatNetwork {
    pub arch: NetworkArch,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Glorot-uniform weights, zero biases.
pub fn init_network(arch: &NetworkArch, seed: u64) -> FloatNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(arch.bank_count());
    let mut biases = Vec::with_capacity(arch.bank_count());
    for (fan_in, fan_out) in arch.bank_shapes() {
        let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
        weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || {
            rng.random_range(-r..=r)
        }));
        biases.push(Array1::zeros(fan_out));
    }
    FloatNetwork {
        arch: arch.clone(),
        weights,
        biases,
    }
}

impl FloatNetwork {
    pub fn validate(&self) -> Result<()> {
        let shapes = self.arch.bank_shapes();
        if self.weights.len() != shapes.len() || self.biases.len() != shapes.len() {
            return Err(Error::DimensionMismatch {
                expected: shapes.len(),
                actual: self.weights.len().min(self.biases.len()),
                context: "weight bank count",
            });
        }
        for ((w, b), &(r, c)) in self.weights.iter().zip(&self.biases).zip(&shapes) {
            if w.dim() != (r, c) || b.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: r * c,
                    actual: w.len(),
                    context: "weight bank shape",
                });
            }
            if !w.iter().chain(b.iter()).all(|v| v.is_finite()) {
                return Err(Error::InvalidArch("non-finite parameter".into()));
            }
        }
        Ok(())
    }

    /// Activations of every layer for a batch (`batch x input_dim`), input included.
    pub fn activations(&self, inputs: ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        check_input_dim(self.arch.input_dim(), inputs.ncols())?;
        let mut acts = Vec::with_capacity(self.arch.layer_sizes().len());
        acts.push(inputs.to_owned());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let next = layer_forward(acts.last().unwrap().view(), w.view(), b.view());
            acts.push(next);
        }
        Ok(acts)
    }

    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.activations(inputs)?.pop().unwrap())
    }

    pub fn forward(&self, input: ArrayView1<f64>) -> Result<Array1<f64>> {
        let batch = input.insert_axis(Axis(0));
        Ok(self.forward_batch(batch)?.row(0).to_owned())
    }
}

pub(crate) fn check_input_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected,
            actual,
            context: "input dimension",
        });
    }
    Ok(())
}

/// `sigmoid(a . W + b)` row-wise.
pub(crate) fn layer_forward(
    a: ArrayView2<f64>,
    w: ArrayView2<f64>,
    b: ArrayView1<f64>,
) -> Array2<f64> {
    let mut z = a.dot(&w);
    z += &b;
    z.mapv_inplace(sigmoid);
    z
}
