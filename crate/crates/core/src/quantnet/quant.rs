use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, EvalResult};
use super::network::{check_input_dim, layer_forward, FloatNetwork, NetworkArch};
use super::store::WeightStore;
use crate::error::{Error, Result};

/// Two's-complement fixed point; the sign bit is the MSB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FixedPointFormat {
    total_bits: u8,
}

impl Default for FixedPointFormat {
    fn default() -> Self {
        Self { total_bits: 8 }
    }
}

impl FixedPointFormat {
    pub fn new(total_bits: u8) -> Result<Self> {
        if !(2..=16).contains(&total_bits) {
            return Err(Error::InvalidFormat(format!(
                "total_bits must be in 2..=16, got {total_bits}"
            )));
        }
        Ok(Self { total_bits })
    }

    pub fn total_bits(&self) -> u8 {
        self.total_bits
    }

    pub fn word_bits(&self) -> usize {
        self.total_bits as usize
    }

    pub fn max_code(&self) -> i32 {
        (1 << (self.total_bits - 1)) - 1
    }

    pub fn min_code(&self) -> i32 {
        -(1 << (self.total_bits - 1))
    }

    /// All-ones mask over the word.
    pub fn word_mask(&self) -> u16 {
        (((1u32) << self.total_bits) - 1) as u16
    }

    pub fn encode(&self, code: i32) -> u16 {
        debug_assert!((self.min_code()..=self.max_code()).contains(&code));
        (code as u16) & self.word_mask()
    }

    /// Sign-extends a stored pattern; bits above the word are ignored.
    pub fn decode(&self, pattern: u16) -> i32 {
        let shift = 32 - self.total_bits as u32;
        (((pattern & self.word_mask()) as i32) << shift) >> shift
    }
}

impl TryFrom<u8> for FixedPointFormat {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FixedPointFormat> for u8 {
    fn from(f: FixedPointFormat) -> Self {
        f.total_bits
    }
}

/// Integer codes of one weight bank, row-major `rows x cols`; value = code * scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantBank {
    pub rows: usize,
    pub cols: usize,
    pub codes: Vec<i16>,
    pub scale: f64,
}

impl QuantBank {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn code(&self, row: usize, col: usize) -> i32 {
        self.codes[row * self.cols + col] as i32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedNetwork {
    pub arch: NetworkArch,
    pub format: FixedPointFormat,
    pub banks: Vec<QuantBank>,
    /// Kept in float and never routed through a store.
    pub biases: Vec<Array1<f64>>,
}

/// Per-bank symmetric quantization, round half away from zero.
///
/// `scale = max|w| / (2^(n-1) - 1)`, so `-2^(n-1)` is never produced. An
/// all-zero bank gets scale 1.
pub fn quantize(net: &FloatNetwork, format: FixedPointFormat) -> Result<QuantizedNetwork> {
    net.validate()?;
    let max_code = format.max_code();
    let banks = net
        .weights
        .iter()
        .map(|w| {
            let max_abs = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if max_abs > 0.0 {
                max_abs / max_code as f64
            } else {
                1.0
            };
            let codes = w
                .iter()
                .map(|&v| ((v / scale).round() as i32).clamp(-max_code, max_code) as i16)
                .collect();
            QuantBank {
                rows: w.nrows(),
                cols: w.ncols(),
                codes,
                scale,
            }
        })
        .collect();
    Ok(QuantizedNetwork {
        arch: net.arch.clone(),
        format,
        banks,
        biases: net.biases.clone(),
    })
}

impl QuantizedNetwork {
    pub fn bank_shapes(&self) -> Vec<(usize, usize)> {
        self.banks.iter().map(QuantBank::shape).collect()
    }

    /// Stored bit pattern of one weight.
    pub fn pattern(&self, bank: usize, row: usize, col: usize) -> u16 {
        self.format.encode(self.banks[bank].code(row, col))
    }

    /// Dequantized weight matrices read straight from the codes.
    pub fn dequantized_weights(&self) -> Vec<Array2<f64>> {
        self.banks
            .iter()
            .map(|b| {
                Array2::from_shape_fn((b.rows, b.cols), |(r, c)| b.code(r, c) as f64 * b.scale)
            })
            .collect()
    }

    /// Fetches every weight once through `store` and dequantizes with the bank scale.
    pub fn fetch_weights(&self, store: &dyn WeightStore) -> Vec<Array2<f64>> {
        let mut buf = Vec::new();
        self.banks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                buf.clear();
                buf.resize(b.rows * b.cols, 0);
                store.read_bank(i, b.shape(), &mut buf);
                let values = buf
                    .iter()
                    .map(|&p| self.format.decode(p) as f64 * b.scale)
                    .collect();
                Array2::from_shape_vec((b.rows, b.cols), values).unwrap()
            })
            .collect()
    }

    fn forward_with(&self, weights: &[Array2<f64>], inputs: ArrayView2<f64>) -> Array2<f64> {
        let mut a = inputs.to_owned();
        for (w, b) in weights.iter().zip(&self.biases) {
            a = layer_forward(a.view(), w.view(), b.view());
        }
        a
    }

    /// Output activations for a batch; one fetch of every weight for the whole batch.
    pub fn forward_batch(
        &self,
        inputs: ArrayView2<f64>,
        store: &dyn WeightStore,
    ) -> Result<Array2<f64>> {
        check_input_dim(self.arch.input_dim(), inputs.ncols())?;
        let weights = self.fetch_weights(store);
        Ok(self.forward_with(&weights, inputs))
    }

    pub fn forward(&self, input: ArrayView1<f64>, store: &dyn WeightStore) -> Result<Array1<f64>> {
        let out = self.forward_batch(input.insert_axis(Axis(0)), store)?;
        Ok(out.row(0).to_owned())
    }

    /// Forward pass on the dequantized codes without any store.
    pub fn forward_direct(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_input_dim(self.arch.input_dim(), inputs.ncols())?;
        Ok(self.forward_with(&self.dequantized_weights(), inputs))
    }
}

impl WeightStore for QuantizedNetwork {
    fn read(&self, bank: usize, row: usize, col: usize) -> u16 {
        self.pattern(bank, row, col)
    }

    fn read_bank(&self, bank: usize, _shape: (usize, usize), out: &mut [u16]) {
        for (o, &c) in out.iter_mut().zip(&self.banks[bank].codes) {
            *o = self.format.encode(c as i32);
        }
    }
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(row: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Classification accuracy with every weight read through `store`.
///
/// Static stores are fetched once for the whole split; per-access stores are
/// re-fetched for every sample.
pub fn evaluate(
    net: &QuantizedNetwork,
    data: &Dataset,
    store: &dyn WeightStore,
) -> Result<EvalResult> {
    data.check_compatible(&net.arch)?;
    let classes = net.arch.output_dim();
    let predictions: Vec<usize> = if store.per_access() {
        data.inputs()
            .rows()
            .into_iter()
            .map(|x| net.forward(x, store).map(|y| argmax(y.view())))
            .collect::<Result<_>>()?
    } else {
        let out = net.forward_batch(data.inputs().view(), store)?;
        out.rows().into_iter().map(argmax).collect()
    };
    Ok(EvalResult::from_predictions(
        &predictions,
        data.labels(),
        classes,
    ))
}
