use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use synmem_core::faultmem::{AccessMode, LayoutScheme};
use synmem_core::powerarea::savings;
use synmem_core::quantnet::{evaluate, quantize};
use synmem_harness::output::{write_json, CsvSink};
use synmem_harness::runner::{load_datasets, load_network, power_for, save_network, train_network};
use synmem_harness::sweep::{
    compare_sensitivity_profiles, search_profile, sweep, write_profile_report,
};
use synmem_harness::{selftest, Experiment, LoadedConfig};

#[derive(Parser)]
#[command(
    name = "synmem",
    version,
    about = "Voltage-scaled hybrid 8T-6T synaptic memory simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, default_value = "configs/default.json")]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for chip evaluation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Read-fault semantics.
    #[arg(long, value_parser = ["static", "bernoulli"])]
    mode: Option<String>,
    /// Cached float network; defaults to <out>/float_net.json.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<LoadedConfig> {
        let mut cfg = LoadedConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(s) = self.seed {
            cfg.config.master_seed = s;
        }
        if let Some(m) = &self.mode {
            cfg.config.access_mode = m.parse::<AccessMode>()?;
        }
        Ok(cfg)
    }

    fn cache_path(&self) -> PathBuf {
        self.cache
            .clone()
            .unwrap_or_else(|| self.out.join("float_net.json"))
    }

    fn experiment(&self) -> Result<Experiment> {
        let cfg = self.load()?;
        let exp = Experiment::prepare(cfg, Some(&self.cache_path()), self.jobs)?;
        eprintln!(
            "float accuracy {:.4}, {}-bit accuracy {:.4}",
            exp.float_accuracy,
            exp.qnet.format.word_bits(),
            exp.fault_free.accuracy
        );
        Ok(exp)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the float network and cache it.
    Train(Common),
    /// Quantize the cached (or freshly trained) network and report accuracy.
    Quantize(Common),
    /// Monte Carlo sweep over the config's voltages and layouts.
    Sweep(Common),
    /// Compare per-bank sensitivity profiles.
    Profiles {
        #[command(flatten)]
        common: Common,
        /// Greedy search for a cheaper profile, starting from this one (comma-separated).
        #[arg(long)]
        search: Option<String>,
    },
    /// Closed-form power and area only.
    Power(Common),
    /// Run the fast property checks.
    Selftest,
}

fn train(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let (train, test) = load_datasets(&cfg)?;
    let net = train_network(&cfg, &train)?;
    let path = c.cache_path();
    save_network(&net, &path)?;
    println!(
        "train accuracy {:.4}, test accuracy {:.4}; wrote {}",
        net.accuracy(&train)?,
        net.accuracy(&test)?,
        path.display()
    );
    Ok(())
}

fn quantize_cmd(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let (train, test) = load_datasets(&cfg)?;
    let path = c.cache_path();
    let net = if path.exists() {
        load_network(&path)?
    } else {
        let n = train_network(&cfg, &train)?;
        save_network(&n, &path)?;
        n
    };
    let q = quantize(&net, cfg.config.format())?;
    let acc = evaluate(&q, &test, &q)?;
    let out = c.out.join("quantized_net.json");
    write_json(&out, &q)?;
    let float = net.accuracy(&test)?;
    println!(
        "float {:.4}  {}-bit {:.4}  delta {:.3} pts; wrote {}",
        float,
        q.format.word_bits(),
        acc.accuracy,
        100.0 * (float - acc.accuracy),
        out.display()
    );
    Ok(())
}

fn sweep_cmd(c: &Common) -> Result<()> {
    let exp = c.experiment()?;
    let rows = sweep(&exp, Some(&c.out))?;
    for r in &rows {
        println!(
            "{:>5.3} V  {:<18} acc {:.4} (std {:.4}, min {:.4})  savings {:>7.2}%  area +{:.3}%",
            r.voltage,
            r.layout,
            r.accuracy.mean,
            r.accuracy.std,
            r.accuracy.min,
            r.savings.total_pct,
            100.0 * r.power.area_overhead
        );
    }
    println!("wrote {}", c.out.join("sweep.csv").display());
    Ok(())
}

fn profiles_cmd(c: &Common, search: Option<&str>) -> Result<()> {
    let exp = c.experiment()?;
    let Some(spec) = exp.cfg.config.profiles.clone() else {
        bail!("config has no `profiles` section");
    };
    if let Some(start) = search {
        let start: Vec<usize> = start
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .context("parsing --search profile")?;
        let (best, steps) = search_profile(&exp, spec.voltage, start, spec.max_loss_pts)?;
        for s in &steps {
            println!("accepted {} (acc {:.4})", s.layout, s.accuracy.mean);
        }
        println!("final profile {best:?}");
        return Ok(());
    }
    let report =
        compare_sensitivity_profiles(&exp, &spec.candidates, &spec.references, spec.voltage)?;
    write_profile_report(&report, &c.out)?;
    for r in &report.rows {
        println!(
            "{:<18} acc {:.4}  loss {:>6.3} pts  savings {:>7.2}%  area +{:>7.3}%{}",
            r.result.layout,
            r.result.accuracy.mean,
            r.loss_pts,
            r.result.savings.total_pct,
            100.0 * r.result.power.area_overhead,
            if r.pareto { "  *" } else { "" }
        );
    }
    println!("wrote {}", c.out.join("profiles.csv").display());
    Ok(())
}

fn power_cmd(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let shapes = cfg.config.arch.bank_shapes();
    let b = &cfg.config.baseline;
    let baseline = power_for(&cfg, &shapes, &b.layout, b.voltage)?;
    let mut layouts: Vec<LayoutScheme> = cfg.config.layouts.clone();
    if let Some(p) = &cfg.config.profiles {
        layouts.extend(p.candidates.iter().map(|k| LayoutScheme::SensitivityBanks {
            k_per_bank: k.clone(),
        }));
    }
    let path = c.out.join("power.csv");
    let mut sink = CsvSink::create(&path, &[])?;
    for &v in &cfg.config.voltages {
        for l in &layouts {
            let r = power_for(&cfg, &shapes, l, v)?;
            let s = savings(&r, &baseline)?;
            println!(
                "{v:>5.3} V  {:<18} total {:>12.4}  savings {:>7.2}%  area +{:.3}%",
                l.to_string(),
                r.total,
                s.total_pct,
                100.0 * r.area_overhead
            );
            sink.write(&[
                v.to_string(),
                l.to_string(),
                "0".into(),
                String::new(),
                String::new(),
                String::new(),
                r.read_power.to_string(),
                r.write_power.to_string(),
                r.leakage_power.to_string(),
                r.total.to_string(),
                s.total_pct.to_string(),
                r.area_units.to_string(),
                (100.0 * r.area_overhead).to_string(),
                String::new(),
            ])?;
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn selftest_cmd() -> Result<()> {
    let checks = selftest::run();
    for c in &checks {
        println!(
            "[{}] {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if checks.iter().any(|c| !c.passed) {
        bail!("selftest failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Train(c) => train(c),
        Command::Quantize(c) => quantize_cmd(c),
        Command::Sweep(c) => sweep_cmd(c),
        Command::Profiles { common, search } => profiles_cmd(common, search.as_deref()),
        Command::Power(c) => power_cmd(c),
        Command::Selftest => selftest_cmd(),
    }
}
