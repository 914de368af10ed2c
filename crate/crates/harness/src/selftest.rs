//! Fast subset of the property checks, runnable from the CLI.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synmem_core::faultmem::{sample_chip, FailureModel, MemoryLayout};
use synmem_core::powerarea::{aggregate, area, AccessTrace, PowerParams};
use synmem_core::quantnet::{backprop, init_network, quantize, FixedPointFormat, NetworkArch};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn gradient() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let arch = NetworkArch::new(vec![3, 3, 2]).unwrap();
        let mut net = init_network(&arch, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_simple_fn((3, 3), || rng.random::<f64>());
        let t = Array2::from_shape_simple_fn((3, 2), || rng.random_range(0..2) as f64);
        let (_, g) = backprop(&net, x.view(), t.view()).unwrap();
        let eps = 1e-5;
        for b in 0..net.weights.len() {
            let cols = net.weights[b].ncols();
            for i in 0..net.weights[b].len() {
                let (r, c) = (i / cols, i % cols);
                let orig = net.weights[b][[r, c]];
                net.weights[b][[r, c]] = orig + eps;
                let up = backprop(&net, x.view(), t.view()).unwrap().0;
                net.weights[b][[r, c]] = orig - eps;
                let down = backprop(&net, x.view(), t.view()).unwrap().0;
                net.weights[b][[r, c]] = orig;
                let fd = (up - down) / (2.0 * eps);
                let a = g.weights[b][[r, c]];
                worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-7));
            }
        }
    }
    check(
        "gradient-vs-finite-difference",
        worst < 1e-4,
        format!("max rel err {worst:.2e}"),
    )
}

fn quantization() -> Check {
    let arch = NetworkArch::new(vec![30, 20, 10]).unwrap();
    let net = init_network(&arch, 4);
    let q = quantize(&net, FixedPointFormat::default()).unwrap();
    let mut worst = 0.0f64;
    for (w, b) in net.weights.iter().zip(&q.banks) {
        for (v, &c) in w.iter().zip(&b.codes) {
            worst = worst.max((c as f64 * b.scale - v).abs() / (b.scale / 2.0));
        }
    }
    check(
        "quantization-round-trip",
        worst <= 1.0 + 1e-9,
        format!("max error {worst:.4} half-steps"),
    )
}

fn fault_statistics() -> Check {
    let layout = MemoryLayout::all_six_t(8).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [1e-3, 1e-2, 1e-1] {
        let m = FailureModel::constant(p, p / 2.0).unwrap();
        let chip = sample_chip(&layout, &m, 0.6, &[(1000, 125)], 17).unwrap();
        let n = chip.six_t_bits() as f64;
        let within =
            |count: u64, q: f64| (count as f64 - n * q).abs() <= 3.0 * (n * q * (1.0 - q)).sqrt();
        let r_ok = within(chip.read_fault_count(), p);
        let w_ok = within(chip.write_fault_count(), p / 2.0);
        let disjoint = chip
            .banks
            .iter()
            .all(|b| b.read.iter().zip(&b.write).all(|(r, w)| r & w == 0));
        ok &= r_ok && w_ok && disjoint;
        detail.push(format!(
            "p={p:e}: read {} write {}",
            chip.read_fault_count(),
            chip.write_fault_count()
        ));
    }
    check("fault-rate-binomial-3sigma", ok, detail.join("; "))
}

fn protection() -> Check {
    let m = FailureModel::constant(0.3, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for i in 0..100u64 {
        let ks: Vec<usize> = (0..3).map(|_| rng.random_range(0..=8)).collect();
        let l = MemoryLayout::banks(ks, 8).unwrap();
        let chip = sample_chip(&l, &m, 0.6, &[(8, 6), (6, 4), (4, 2)], i).unwrap();
        for b in &chip.banks {
            violations += b
                .read
                .iter()
                .zip(&b.write)
                .filter(|(r, w)| (*r | *w) & b.protected != 0)
                .count();
        }
    }
    check(
        "no-faults-in-8t-cells",
        violations == 0,
        format!("{violations} violations"),
    )
}

fn power_closed_forms() -> Check {
    let p = PowerParams::default();
    let shapes = [(1, 1)];
    let trace = AccessTrace::per_word(&shapes, 1, 0);
    let a6 = aggregate(
        &p,
        &MemoryLayout::all_six_t(8).unwrap(),
        &shapes,
        &trace,
        p.vnom,
    )
    .unwrap();
    let h3 = aggregate(
        &p,
        &MemoryLayout::hybrid(3, 8).unwrap(),
        &shapes,
        &trace,
        p.vnom,
    )
    .unwrap();
    let ov = area(&p, &MemoryLayout::hybrid(3, 8).unwrap(), &[(64, 32)])
        .unwrap()
        .overhead_fraction;
    let ok =
        a6.read_power == 8.0 && (h3.read_power - 8.6).abs() < 1e-12 && (ov - 0.13875).abs() < 1e-12;
    check(
        "power-area-closed-forms",
        ok,
        format!(
            "all6t {} hybrid3 {} overhead {ov}",
            a6.read_power, h3.read_power
        ),
    )
}

fn determinism() -> Check {
    let m = FailureModel::constant(0.05, 0.01).unwrap();
    let l = MemoryLayout::hybrid(2, 8).unwrap();
    let a = sample_chip(&l, &m, 0.6, &[(50, 40)], 123).unwrap();
    let b = sample_chip(&l, &m, 0.6, &[(50, 40)], 123).unwrap();
    check("chip-sampling-determinism", a == b, String::new())
}

pub fn run() -> Vec<Check> {
    vec![
        gradient(),
        quantization(),
        fault_statistics(),
        protection(),
        power_closed_forms(),
        determinism(),
    ]
}
