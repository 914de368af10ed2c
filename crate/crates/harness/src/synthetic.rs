//! Gaussian class blobs shaped like small grayscale images.
//!
//! When `dim` is a perfect square the informative features are a centred
//! square covering half the side length and the border stays at zero, so the
//! first weight bank sees many inputs that carry no signal. Otherwise every
//! feature is informative.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use synmem_core::quantnet::{Dataset, Split};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub classes: usize,
    pub dim: usize,
    /// Seeds the class means; samples of each split use derived streams.
    pub seed: u64,
    /// Per-feature Gaussian noise std-dev before clamping to `[0, 1]`.
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_noise() -> f64 {
    0.35
}

impl BlobSpec {
    pub fn new(classes: usize, dim: usize, seed: u64) -> Self {
        Self {
            classes,
            dim,
            seed,
            noise: default_noise(),
        }
    }

    /// Indices of features that depend on the class.
    pub fn informative(&self) -> Vec<usize> {
        let side = (self.dim as f64).sqrt().round() as usize;
        if side * side != self.dim || side < 4 {
            return (0..self.dim).collect();
        }
        let inner = side / 2;
        let start = (side - inner) / 2;
        (start..start + inner)
            .flat_map(|r| (start..start + inner).map(move |c| r * side + c))
            .collect()
    }

    fn means(&self) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut m = Array2::zeros((self.classes, self.dim));
        let feats = self.informative();
        for c in 0..self.classes {
            for &f in &feats {
                m[[c, f]] = rng.random_range(0.0..1.0);
            }
        }
        m
    }

    /// `n` samples with balanced, shuffled labels.
    pub fn sample(&self, n: usize, split: Split) -> Result<Dataset> {
        if self.classes < 2 {
            return Err(HarnessError::Config(format!(
                "synthetic data needs at least 2 classes, got {}",
                self.classes
            )));
        }
        if n == 0 || self.dim == 0 {
            return Err(HarnessError::Config(
                "synthetic data needs n > 0 and dim > 0".into(),
            ));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(HarnessError::Config(format!("bad noise {}", self.noise)));
        }
        let means = self.means();
        let feats = self.informative();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(match split {
            Split::Train => 1,
            Split::Test => 2,
        });
        let mut labels: Vec<usize> = (0..n).map(|i| i % self.classes).collect();
        labels.shuffle(&mut rng);
        let normal = Normal::new(0.0, self.noise.max(f64::MIN_POSITIVE)).unwrap();
        let mut x = Array2::zeros((n, self.dim));
        for (i, &l) in labels.iter().enumerate() {
            for &f in &feats {
                let noise = if self.noise > 0.0 {
                    normal.sample(&mut rng)
                } else {
                    0.0
                };
                x[[i, f]] = (means[[l, f]] + noise).clamp(0.0, 1.0);
            }
        }
        Ok(Dataset::new(x, labels, split)?)
    }
}

/// Training split of the default blobs.
pub fn gen_synthetic(classes: usize, dim: usize, n: usize, seed: u64) -> Result<Dataset> {
    BlobSpec::new(classes, dim, seed).sample(n, Split::Train)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(
            gen_synthetic(4, 16, 50, 3).unwrap(),
            gen_synthetic(4, 16, 50, 3).unwrap()
        );
        assert_ne!(
            gen_synthetic(4, 16, 50, 3).unwrap(),
            gen_synthetic(4, 16, 50, 4).unwrap()
        );
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(gen_synthetic(4, 16, 0, 3).is_err());
        assert!(gen_synthetic(1, 16, 10, 3).is_err());
    }

    #[test]
    fn image_shaped_blobs_have_blank_border() {
        let spec = BlobSpec::new(10, 784, 1);
        let feats = spec.informative();
        assert_eq!(feats.len(), 196);
        let d = spec.sample(20, Split::Test).unwrap();
        // first and last image rows are never informative
        assert!(d.inputs().iter().take(28).all(|&v| v == 0.0));
        assert_eq!(d.class_counts(10), vec![2; 10]);
    }

    #[test]
    fn splits_share_means_but_not_samples() {
        let spec = BlobSpec::new(3, 9, 5);
        let a = spec.sample(30, Split::Train).unwrap();
        let b = spec.sample(30, Split::Test).unwrap();
        assert_ne!(a.inputs(), b.inputs());
        assert_eq!(spec.means(), spec.means());
    }
}
