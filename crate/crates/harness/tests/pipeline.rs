mod common;

use std::fs;
use std::sync::OnceLock;

use common::*;
use synmem_core::faultmem::{AccessMode, FailureModel, LayoutScheme};
use synmem_core::powerarea::savings;
use synmem_core::quantnet::{Split, TrainParams};
use synmem_harness::output::CSV_COLUMNS;
use synmem_harness::runner::train_network;
use synmem_harness::sweep::{compare_sensitivity_profiles, sweep, write_profile_report};
use synmem_harness::synthetic::gen_synthetic;
use synmem_harness::{Experiment, ExperimentConfig, LoadedConfig};

fn hybrid(k: usize) -> LayoutScheme {
    LayoutScheme::HybridUniform { k }
}

fn banks(k: &[usize]) -> LayoutScheme {
    LayoutScheme::SensitivityBanks {
        k_per_bank: k.to_vec(),
    }
}

fn shared() -> &'static Experiment {
    static EXP: OnceLock<Experiment> = OnceLock::new();
    EXP.get_or_init(|| {
        let cfg = small_config(vec![LayoutScheme::AllSixT, hybrid(3)], vec![0.95, 0.65]);
        experiment(loaded(cfg, steep_model()), 2)
    })
}

/// Same network as `shared`, different config knobs.
fn variant(f: impl FnOnce(&mut ExperimentConfig), model: FailureModel, jobs: usize) -> Experiment {
    let base = shared();
    let mut cfg = base.cfg.config.clone();
    f(&mut cfg);
    Experiment::from_network(
        loaded(cfg, model),
        base.float_net.clone(),
        base.test.clone(),
        jobs,
    )
    .unwrap()
}

#[test]
fn blobs_are_learnable_by_a_two_hidden_layer_net() {
    let train = gen_synthetic(4, 64, 1200, 11).unwrap();
    assert_eq!(train.split(), Split::Train);
    let cfg = loaded(
        small_config(vec![LayoutScheme::AllSixT], vec![0.95]),
        steep_model(),
    );
    let net = train_network(&cfg, &train).unwrap();
    let test = synmem_harness::synthetic::BlobSpec::new(4, 64, 11)
        .sample(400, Split::Test)
        .unwrap();
    let acc = net.accuracy(&test).unwrap();
    assert!(acc > 0.95, "accuracy {acc}");
}

#[test]
fn nominal_voltage_is_fault_free() {
    let e = shared();
    let r = e.run_point(0.95, &LayoutScheme::AllSixT).unwrap();
    assert_eq!(r.accuracy.std, 0.0);
    assert_eq!(r.accuracy.mean, e.fault_free.accuracy);
    assert_eq!(r.chips, 8);
}

#[test]
fn fully_protected_is_fault_free_everywhere() {
    let e = shared();
    for v in [0.55, 0.65, 0.8] {
        let r = e.run_point(v, &hybrid(8)).unwrap();
        assert!(
            r.chip_accuracies
                .iter()
                .all(|&a| a == e.fault_free.accuracy),
            "{v}"
        );
    }
    let all8 = e.run_point(0.55, &banks(&[8, 8, 8])).unwrap();
    assert_eq!(all8.accuracy.mean, e.fault_free.accuracy);
    assert!((all8.power.area_overhead - 0.37).abs() < 1e-12);
}

#[test]
fn layout_equivalences() {
    let e = shared();
    let strip = |mut r: synmem_harness::RunResult| {
        r.layout.clear();
        r
    };
    let a = strip(e.run_point(0.6, &LayoutScheme::AllSixT).unwrap());
    let h0 = strip(e.run_point(0.6, &hybrid(0)).unwrap());
    let b0 = strip(e.run_point(0.6, &banks(&[0, 0, 0])).unwrap());
    assert!(a.accuracy.mean < e.fault_free.accuracy);
    assert_eq!(a, h0);
    assert_eq!(a, b0);
    for k in [1, 3, 5] {
        let h = strip(e.run_point(0.6, &hybrid(k)).unwrap());
        let b = strip(e.run_point(0.6, &banks(&[k, k, k])).unwrap());
        assert_eq!(h, b, "k={k}");
    }
}

#[test]
fn baseline_against_itself_saves_nothing() {
    let e = shared();
    let b = &e.cfg.config.baseline;
    let r = e.run_point(b.voltage, &b.layout).unwrap();
    let s = savings(&r.power, &e.baseline).unwrap();
    assert_eq!(s.total_pct, 0.0);
    assert_eq!(s.read_pct, Some(0.0));
    assert_eq!(s.leakage_pct, Some(0.0));
    assert_eq!(s.write_pct, None);
    assert_eq!(r.savings, s);
}

#[test]
fn repeated_points_are_identical() {
    let e = shared();
    let a = e.run_point(0.65, &hybrid(1)).unwrap();
    let b = e.run_point(0.65, &hybrid(1)).unwrap();
    assert_eq!(a, b);
    let other = variant(|c| c.master_seed += 1, steep_model(), 1);
    let c = other.run_point(0.65, &hybrid(1)).unwrap();
    assert_ne!(a.chip_seeds, c.chip_seeds);
}

#[test]
fn bernoulli_mode_is_deterministic_and_clean_at_nominal() {
    let e = variant(|c| c.access_mode = AccessMode::Bernoulli, steep_model(), 2);
    let nom = e.run_point(0.95, &LayoutScheme::AllSixT).unwrap();
    assert_eq!(nom.accuracy.mean, e.fault_free.accuracy);
    let a = e.run_point(0.6, &LayoutScheme::AllSixT).unwrap();
    let b = e.run_point(0.6, &LayoutScheme::AllSixT).unwrap();
    assert_eq!(a, b);
    assert!(a.accuracy.mean < e.fault_free.accuracy);
}

#[test]
fn accuracy_falls_with_voltage() {
    let e = variant(|c| c.chips_per_point = 20, steep_model(), 2);
    let rows: Vec<_> = [0.95, 0.85, 0.75, 0.65]
        .iter()
        .map(|&v| e.run_point(v, &LayoutScheme::AllSixT).unwrap())
        .collect();
    for w in rows.windows(2) {
        let slack = 2.0 * w[0].accuracy.std.max(w[1].accuracy.std);
        assert!(
            w[1].accuracy.mean <= w[0].accuracy.mean + slack,
            "{} V {} -> {} V {}",
            w[0].voltage,
            w[0].accuracy.mean,
            w[1].voltage,
            w[1].accuracy.mean
        );
    }
    let h3 = e.run_point(0.65, &hybrid(3)).unwrap();
    assert!(h3.accuracy.mean >= rows[3].accuracy.mean);
}

#[test]
fn total_corruption_reaches_majority_rate() {
    // every stored bit is a power-up coin flip
    let m = FailureModel::constant(0.0, 1.0).unwrap();
    let e = variant(|c| c.chips_per_point = 40, m, 2);
    let r = e.run_point(0.6, &LayoutScheme::AllSixT).unwrap();
    let majority = e.test.majority_rate(4);
    let se = r.accuracy.std_err(r.chips);
    assert!(
        (r.accuracy.mean - majority).abs() <= 3.0 * se,
        "mean {} majority {majority} se {se}",
        r.accuracy.mean
    );
}

#[test]
fn sweep_writes_csv_and_summary() {
    let e = shared();
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(e, Some(dir.path())).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows.iter()
            .map(|r| (r.voltage, r.layout.as_str()))
            .collect::<Vec<_>>(),
        [
            (0.95, "all6t"),
            (0.95, "hybrid:3"),
            (0.65, "all6t"),
            (0.65, "hybrid:3")
        ]
    );
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.count(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["config_hash"], e.cfg.config.hash());
    assert_eq!(summary["master_seed"], 99);
    assert_eq!(
        summary["points"][3]["chip_seeds"].as_array().unwrap().len(),
        8
    );
    assert!(summary["error"].is_null());
}

#[test]
fn sweep_failure_keeps_partial_rows() {
    let e = variant(|c| c.voltages = vec![0.95, 0.3, 0.65], steep_model(), 1);
    let dir = tempfile::tempdir().unwrap();
    assert!(sweep(&e, Some(dir.path())).is_err());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 1);
    assert!(lines[3].starts_with("0.3,all6t,0,error: "));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["points"].as_array().unwrap().len(), 2);
    assert!(summary["error"].as_str().unwrap().contains("0.3"));
}

#[test]
fn sweep_csv_is_independent_of_thread_count() {
    let one = variant(|_| {}, steep_model(), 1);
    let four = variant(|_| {}, steep_model(), 4);
    let (d1, d4) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    sweep(&one, Some(d1.path())).unwrap();
    sweep(&four, Some(d4.path())).unwrap();
    assert_eq!(
        fs::read(d1.path().join("sweep.csv")).unwrap(),
        fs::read(d4.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn profile_report() {
    let e = shared();
    let dir = tempfile::tempdir().unwrap();
    let report = compare_sensitivity_profiles(
        e,
        &[vec![0, 0, 0], vec![3, 2, 2], vec![2, 3, 2]],
        &[LayoutScheme::AllSixT],
        0.65,
    )
    .unwrap();
    write_profile_report(&report, dir.path()).unwrap();
    let zero = report.row("banks:0,0,0").unwrap();
    let all6 = report.row("all6t").unwrap();
    assert_eq!(zero.result.chip_accuracies, all6.result.chip_accuracies);
    assert_eq!(zero.result.power, all6.result.power);
    // same k sum, protection moved off the 64x32 bank onto the 32x16 bank
    let big = report.row("banks:3,2,2").unwrap();
    let small = report.row("banks:2,3,2").unwrap();
    assert!(small.result.power.area_overhead < big.result.power.area_overhead);
    let overheads: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.result.power.area_overhead)
        .collect();
    assert!(overheads.windows(2).all(|w| w[0] <= w[1]));
    assert!(report.rows.iter().any(|r| r.pareto));
    let csv = fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .ends_with(",seed,role,loss_pts,pareto"));
    assert!(dir.path().join("profiles.json").exists());
}

#[test]
fn profile_length_is_checked() {
    let e = shared();
    assert!(compare_sensitivity_profiles(e, &[vec![1, 2]], &[], 0.65).is_err());
}

#[test]
fn shipped_config_loads() {
    let cfg = LoadedConfig::load(&configs_dir().join("default.json")).unwrap();
    assert_eq!(cfg.config.arch.layer_sizes(), &[784, 256, 128, 64, 32, 10]);
    assert_eq!(cfg.config.chips_per_point, 20);
    assert_eq!(cfg.failure_model.support(), (0.5, 0.95));
    let p = cfg.config.profiles.as_ref().unwrap();
    assert_eq!(p.candidates, vec![vec![2, 4, 2, 2, 3], vec![1, 3, 1, 1, 3]]);
    assert_eq!(cfg.power, synmem_core::powerarea::PowerParams::default());
    let mnist = ExperimentConfig::from_json_str(
        &fs::read_to_string(configs_dir().join("mnist.json")).unwrap(),
    )
    .unwrap();
    mnist.validate().unwrap();
}

#[test]
fn config_errors() {
    let text = fs::read_to_string(configs_dir().join("default.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = 2.into();
    assert!(ExperimentConfig::from_json_str(&v.to_string()).is_err());
    v["schema_version"] = 1.into();
    v["bogus"] = true.into();
    assert!(ExperimentConfig::from_json_str(&v.to_string()).is_err());
    v.as_object_mut().unwrap().remove("bogus");
    v["chips_per_point"] = 0.into();
    let c = ExperimentConfig::from_json_str(&v.to_string()).unwrap();
    assert!(c.validate().is_err());
    v["chips_per_point"] = 5.into();
    v["voltages"] = serde_json::json!([0.95, 0.45]);
    let c = ExperimentConfig::from_json_str(&v.to_string()).unwrap();
    let err = LoadedConfig::from_config(c, configs_dir()).unwrap_err();
    assert!(err.to_string().contains("0.45"), "{err}");
    v["voltages"] = serde_json::json!([0.95]);
    v["layouts"] = serde_json::json!(["banks:1,2"]);
    let c = ExperimentConfig::from_json_str(&v.to_string()).unwrap();
    assert!(c.validate().is_err());
}

#[test]
fn training_params_round_trip_through_json() {
    let t = TrainParams {
        lr: 0.5,
        epochs: 3,
        batch: 7,
        seed: 9,
    };
    let back: TrainParams = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
    assert_eq!(t, back);
}
