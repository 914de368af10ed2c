use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::network::NetworkArch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Labelled samples, one row per sample, features in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Array2<f64>,
    labels: Vec<usize>,
    split: Split,
}

impl Dataset {
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>, split: Split) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        if inputs.nrows() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} samples but {} labels",
                inputs.nrows(),
                labels.len()
            )));
        }
        if let Some(v) = inputs.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidDataset(format!(
                "feature value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            inputs,
            labels,
            split,
        })
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Input width must match the input layer and every label must name an output neuron.
    pub fn check_compatible(&self, arch: &NetworkArch) -> Result<()> {
        if self.dim() != arch.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: arch.input_dim(),
                actual: self.dim(),
                context: "dataset input dimension",
            });
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= arch.output_dim()) {
            return Err(Error::InvalidDataset(format!(
                "label {l} not below output size {}",
                arch.output_dim()
            )));
        }
        Ok(())
    }

    /// Per-class sample counts over `classes` classes.
    pub fn class_counts(&self, classes: usize) -> Vec<usize> {
        let mut counts = vec![0; classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Fraction of samples in the most frequent class.
    pub fn majority_rate(&self, classes: usize) -> f64 {
        let max = self.class_counts(classes).into_iter().max().unwrap_or(0);
        max as f64 / self.len() as f64
    }

    /// One-hot target matrix.
    pub fn one_hot(&self, classes: usize) -> Array2<f64> {
        let mut t = Array2::zeros((self.len(), classes));
        for (i, &l) in self.labels.iter().enumerate() {
            t[[i, l]] = 1.0;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCount {
    pub total: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub correct: usize,
    pub total: usize,
    /// `correct / total`.
    pub accuracy: f64,
    pub per_class: Vec<ClassCount>,
}

impl EvalResult {
    pub(crate) fn from_predictions(
        predictions: &[usize],
        labels: &[usize],
        classes: usize,
    ) -> Self {
        let mut per_class = vec![ClassCount::default(); classes];
        let mut correct = 0;
        for (&p, &l) in predictions.iter().zip(labels) {
            per_class[l].total += 1;
            if p == l {
                per_class[l].correct += 1;
                correct += 1;
            }
        }
        let total = labels.len();
        Self {
            correct,
            total,
            accuracy: correct as f64 / total as f64,
            per_class,
        }
    }
}
