#![allow(dead_code)]

use std::path::PathBuf;

use synmem_core::faultmem::{AccessMode, FailureCurve, FailureModel, LayoutScheme};
use synmem_core::powerarea::PowerParams;
use synmem_core::quantnet::TrainParams;
use synmem_harness::config::{BaselineSpec, DatasetSource, TraceSpec, SCHEMA_VERSION};
use synmem_harness::runner::{load_datasets, train_network};
use synmem_harness::{Experiment, ExperimentConfig, LoadedConfig};

pub fn small_config(layouts: Vec<LayoutScheme>, voltages: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        arch: serde_json::from_str("[64, 32, 16, 4]").unwrap(),
        word_bits: Default::default(),
        dataset: DatasetSource::Synthetic {
            classes: 4,
            dim: 64,
            seed: 11,
            noise: 0.35,
            train: 1200,
            test: 400,
        },
        training: TrainParams {
            lr: 2.0,
            epochs: 30,
            batch: 16,
            seed: 3,
        },
        failure_model: PathBuf::from("unused.json"),
        power_params: None,
        layouts,
        voltages,
        chips_per_point: 8,
        master_seed: 99,
        access_mode: AccessMode::Static,
        baseline: BaselineSpec {
            layout: LayoutScheme::AllSixT,
            voltage: 0.75,
        },
        trace: TraceSpec::default(),
        profiles: None,
    }
}

/// Read-access and write curves falling from 0.2 / 0.05 at 0.55 V to zero at 0.95 V.
pub fn steep_model() -> FailureModel {
    FailureModel::six_t(
        FailureCurve::Table(vec![
            (0.55, 0.2),
            (0.65, 0.05),
            (0.75, 1e-3),
            (0.85, 1e-5),
            (0.95, 0.0),
        ]),
        FailureCurve::Table(vec![
            (0.55, 0.05),
            (0.65, 0.01),
            (0.75, 2e-4),
            (0.85, 2e-6),
            (0.95, 0.0),
        ]),
        0.95,
    )
    .unwrap()
}

pub fn loaded(config: ExperimentConfig, model: FailureModel) -> LoadedConfig {
    LoadedConfig {
        config,
        base_dir: PathBuf::from("."),
        failure_model: model,
        power: PowerParams::default(),
    }
}

pub fn experiment(cfg: LoadedConfig, jobs: usize) -> Experiment {
    let (train, test) = load_datasets(&cfg).unwrap();
    let net = train_network(&cfg, &train).unwrap();
    Experiment::from_network(cfg, net, test, jobs).unwrap()
}

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}
