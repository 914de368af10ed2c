//! Monte Carlo evaluation of (voltage, layout) points.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use synmem_core::faultmem::{sample_chip, write_weights, LayoutScheme, MemoryLayout};
use synmem_core::powerarea::{aggregate, savings, AccessTrace, PowerAreaReport, Savings};
use synmem_core::quantnet::{
    evaluate, init_network, quantize, train_backprop, Dataset, EvalResult, FloatNetwork,
    QuantizedNetwork, Split,
};

use crate::config::{DatasetSource, LoadedConfig};
use crate::error::{io_err, HarnessError, Result};
use crate::idx::load_idx;
use crate::seeds;
use crate::synthetic::BlobSpec;

/// Accuracy statistics over the chips of one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyStats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single chip.
    pub std: f64,
    pub min: f64,
}

impl AccuracyStats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Standard error of the mean over `n` chips.
    pub fn std_err(&self, n: usize) -> f64 {
        self.std / (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub voltage: f64,
    pub layout: String,
    pub chips: usize,
    pub accuracy: AccuracyStats,
    pub chip_accuracies: Vec<f64>,
    pub power: PowerAreaReport,
    pub savings: Savings,
    pub seed: u64,
    pub chip_seeds: Vec<u64>,
}

/// A trained, quantized network with its test split and loaded configuration.
pub struct Experiment {
    pub cfg: LoadedConfig,
    pub test: Dataset,
    pub float_net: FloatNetwork,
    pub float_accuracy: f64,
    pub qnet: QuantizedNetwork,
    /// Accuracy with every weight read back intact.
    pub fault_free: EvalResult,
    pub baseline: PowerAreaReport,
    pool: rayon::ThreadPool,
}

/// Train and test splits named by the config.
pub fn load_datasets(cfg: &LoadedConfig) -> Result<(Dataset, Dataset)> {
    match &cfg.config.dataset {
        DatasetSource::Synthetic {
            classes,
            dim,
            seed,
            noise,
            train,
            test,
        } => {
            let spec = BlobSpec {
                classes: *classes,
                dim: *dim,
                seed: *seed,
                noise: *noise,
            };
            Ok((
                spec.sample(*train, Split::Train)?,
                spec.sample(*test, Split::Test)?,
            ))
        }
        DatasetSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
            test_limit,
        } => {
            let train = load_idx(
                &cfg.resolve_path(train_images),
                &cfg.resolve_path(train_labels),
                Split::Train,
            )?;
            let mut test = load_idx(
                &cfg.resolve_path(test_images),
                &cfg.resolve_path(test_labels),
                Split::Test,
            )?;
            if let Some(n) = *test_limit {
                if n < test.len() {
                    let x = test.inputs().slice(ndarray::s![..n, ..]).to_owned();
                    test = Dataset::new(x, test.labels()[..n].to_vec(), Split::Test)?;
                }
            }
            Ok((train, test))
        }
    }
}

/// Fits the float network described by the config.
pub fn train_network(cfg: &LoadedConfig, train: &Dataset) -> Result<FloatNetwork> {
    let c = &cfg.config;
    train.check_compatible(&c.arch)?;
    let init = init_network(&c.arch, c.training.seed);
    Ok(train_backprop(&init, train, &c.training)?)
}

pub fn save_network(net: &FloatNetwork, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, serde_json::to_vec(net)?).map_err(io_err(path))
}

pub fn load_network(path: &Path) -> Result<FloatNetwork> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let net: FloatNetwork = serde_json::from_slice(&bytes)?;
    net.validate()?;
    Ok(net)
}

fn trace_for(cfg: &LoadedConfig, shapes: &[(usize, usize)]) -> AccessTrace {
    let t = cfg.config.trace;
    AccessTrace::per_word(shapes, t.reads_per_word, t.writes_per_word)
}

/// Closed-form power and area of a layout at a voltage, under the config's
/// power parameters and access trace.
pub fn power_for(
    cfg: &LoadedConfig,
    shapes: &[(usize, usize)],
    scheme: &LayoutScheme,
    volts: f64,
) -> Result<PowerAreaReport> {
    let layout = cfg.config.layout(scheme)?;
    Ok(aggregate(
        &cfg.power,
        &layout,
        shapes,
        &trace_for(cfg, shapes),
        volts,
    )?)
}

impl Experiment {
    /// Loads data and obtains the float network: from `cache` when the file
    /// exists and matches the architecture, otherwise by training (and then
    /// writing `cache`, when given).
    pub fn prepare(cfg: LoadedConfig, cache: Option<&Path>, jobs: usize) -> Result<Self> {
        let (train, test) = load_datasets(&cfg)?;
        let cached = match cache {
            Some(p) if p.exists() => {
                let net = load_network(p)?;
                if net.arch == cfg.config.arch {
                    log::info!("using cached network {}", p.display());
                    Some(net)
                } else {
                    log::warn!(
                        "cached network {} has a different architecture",
                        p.display()
                    );
                    None
                }
            }
            _ => None,
        };
        let net = match cached {
            Some(n) => n,
            None => {
                log::info!("training {:?}", cfg.config.arch.layer_sizes());
                let n = train_network(&cfg, &train)?;
                if let Some(p) = cache {
                    save_network(&n, p)?;
                }
                n
            }
        };
        Self::from_network(cfg, net, test, jobs)
    }

    pub fn from_network(
        cfg: LoadedConfig,
        float_net: FloatNetwork,
        test: Dataset,
        jobs: usize,
    ) -> Result<Self> {
        test.check_compatible(&cfg.config.arch)?;
        let float_accuracy = float_net.accuracy(&test)?;
        let qnet = quantize(&float_net, cfg.config.format())?;
        let fault_free = evaluate(&qnet, &test, &qnet)?;
        let b = &cfg.config.baseline;
        let baseline = power_for(&cfg, &qnet.bank_shapes(), &b.layout, b.voltage)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        Ok(Self {
            cfg,
            test,
            float_net,
            float_accuracy,
            qnet,
            fault_free,
            baseline,
            pool,
        })
    }

    pub fn bank_shapes(&self) -> Vec<(usize, usize)> {
        self.qnet.bank_shapes()
    }

    pub fn layout(&self, scheme: &LayoutScheme) -> Result<MemoryLayout> {
        self.cfg.config.layout(scheme)
    }

    pub fn trace(&self) -> AccessTrace {
        trace_for(&self.cfg, &self.bank_shapes())
    }

    /// Closed-form power and area of a layout at a voltage.
    pub fn power_report(&self, scheme: &LayoutScheme, volts: f64) -> Result<PowerAreaReport> {
        power_for(&self.cfg, &self.bank_shapes(), scheme, volts)
    }

    /// Seeds of the point and of each of its chips.
    pub fn point_seeds(&self, volts: f64, layout: &MemoryLayout) -> Result<(u64, Vec<u64>)> {
        let ks = layout.resolve(self.qnet.arch.bank_count())?;
        let digest = seeds::layout_digest(&ks, layout.word_bits());
        let point = seeds::point_seed(self.cfg.config.master_seed, volts, digest);
        let chips = (0..self.cfg.config.chips_per_point as u64)
            .map(|i| seeds::chip_seed(point, i))
            .collect();
        Ok((point, chips))
    }

    /// Accuracy of one chip.
    pub fn evaluate_chip(&self, layout: &MemoryLayout, volts: f64, chip_seed: u64) -> Result<f64> {
        let chip = sample_chip(
            layout,
            &self.cfg.failure_model,
            volts,
            &self.bank_shapes(),
            chip_seed,
        )?;
        let store = write_weights(
            &chip,
            &self.qnet,
            seeds::write_seed(chip_seed),
            self.cfg.config.access_mode,
        )?;
        Ok(evaluate(&self.qnet, &self.test, &store)?.accuracy)
    }

    /// Samples `chips_per_point` chips at `volts`, loads and evaluates each,
    /// and attaches the closed-form power/area. Chips run on the experiment's
    /// thread pool; results are reduced in chip order.
    pub fn run_point(&self, volts: f64, scheme: &LayoutScheme) -> Result<RunResult> {
        let layout = self.layout(scheme)?;
        if !self.cfg.failure_model.in_support(volts) {
            return Err(HarnessError::Config(format!(
                "voltage {volts} outside failure-model support"
            )));
        }
        let (seed, chip_seeds) = self.point_seeds(volts, &layout)?;
        let accs: Vec<f64> = self.pool.install(|| {
            chip_seeds
                .par_iter()
                .map(|&s| self.evaluate_chip(&layout, volts, s))
                .collect::<Result<Vec<f64>>>()
        })?;
        let power = self.power_report(scheme, volts)?;
        Ok(RunResult {
            voltage: volts,
            layout: scheme.to_string(),
            chips: accs.len(),
            accuracy: AccuracyStats::from_samples(&accs),
            chip_accuracies: accs,
            savings: savings(&power, &self.baseline)?,
            power,
            seed,
            chip_seeds,
        })
    }

    /// Accuracy loss in percentage points relative to the fault-free network.
    pub fn loss_pts(&self, accuracy: f64) -> f64 {
        100.0 * (self.fault_free.accuracy - accuracy)
    }
}
