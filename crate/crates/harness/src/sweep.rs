//! Voltage x layout sweeps and per-bank sensitivity-profile studies.

use std::path::Path;

use serde::{Deserialize, Serialize};
use synmem_core::faultmem::{AccessMode, LayoutScheme};
use synmem_core::powerarea::PowerAreaReport;

use crate::error::{HarnessError, Result};
use crate::output::{csv_record, error_record, write_json, CsvSink};
use crate::runner::{Experiment, RunResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub layout: String,
    pub voltage: f64,
    pub report: PowerAreaReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config_hash: String,
    pub master_seed: u64,
    pub access_mode: AccessMode,
    pub chips_per_point: usize,
    pub float_accuracy: f64,
    pub fault_free_accuracy: f64,
    pub baseline: BaselineSummary,
    pub points: Vec<RunResult>,
    pub error: Option<String>,
}

fn summary(exp: &Experiment, points: Vec<RunResult>, error: Option<String>) -> SweepSummary {
    let c = &exp.cfg.config;
    SweepSummary {
        config_hash: c.hash(),
        master_seed: c.master_seed,
        access_mode: c.access_mode,
        chips_per_point: c.chips_per_point,
        float_accuracy: exp.float_accuracy,
        fault_free_accuracy: exp.fault_free.accuracy,
        baseline: BaselineSummary {
            layout: c.baseline.layout.to_string(),
            voltage: c.baseline.voltage,
            report: exp.baseline,
        },
        points,
        error,
    }
}

/// Every (voltage, layout) pair of the config, voltage-major. Writes
/// `sweep.csv` and `summary.json` under `out_dir` when given. Rows are
/// flushed as they complete; a failing point leaves an error row and the
/// error in the summary.
pub fn sweep(exp: &Experiment, out_dir: Option<&Path>) -> Result<Vec<RunResult>> {
    let c = &exp.cfg.config;
    let mut sink = match out_dir {
        Some(d) => Some(CsvSink::create(&d.join("sweep.csv"), &[])?),
        None => None,
    };
    let mut rows = Vec::new();
    for &v in &c.voltages {
        for layout in &c.layouts {
            match exp.run_point(v, layout) {
                Ok(r) => {
                    log::info!(
                        "{v:.3} V {layout}: acc {:.4} +- {:.4}, savings {:.2}%",
                        r.accuracy.mean,
                        r.accuracy.std,
                        r.savings.total_pct
                    );
                    if let Some(s) = sink.as_mut() {
                        s.write(&csv_record(&r))?;
                    }
                    rows.push(r);
                }
                Err(e) => {
                    let msg = e.to_string();
                    if let Some(s) = sink.as_mut() {
                        s.write(&error_record(v, &layout.to_string(), &msg))?;
                    }
                    if let Some(d) = out_dir {
                        write_json(&d.join("summary.json"), &summary(exp, rows, Some(msg)))?;
                    }
                    return Err(e);
                }
            }
        }
    }
    if let Some(d) = out_dir {
        write_json(&d.join("summary.json"), &summary(exp, rows.clone(), None))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileRole {
    Candidate,
    Reference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRow {
    pub role: ProfileRole,
    pub k_per_bank: Vec<usize>,
    pub result: RunResult,
    /// Accuracy loss versus the fault-free network, percentage points.
    pub loss_pts: f64,
    /// Not dominated in (area overhead, power savings, mean accuracy) by any other row.
    pub pareto: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    pub voltage: f64,
    pub fault_free_accuracy: f64,
    /// Sorted by area overhead, then layout label.
    pub rows: Vec<ProfileRow>,
}

impl ProfileReport {
    pub fn row(&self, layout: &str) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.result.layout == layout)
    }
}

fn dominates(a: &RunResult, b: &RunResult) -> bool {
    let (aa, ba) = (a.power.area_overhead, b.power.area_overhead);
    let (as_, bs) = (a.savings.total_pct, b.savings.total_pct);
    let (am, bm) = (a.accuracy.mean, b.accuracy.mean);
    aa <= ba && as_ >= bs && am >= bm && (aa < ba || as_ > bs || am > bm)
}

/// Evaluates each per-bank profile (and each reference layout) at `voltage`.
pub fn compare_sensitivity_profiles(
    exp: &Experiment,
    profiles: &[Vec<usize>],
    references: &[LayoutScheme],
    voltage: f64,
) -> Result<ProfileReport> {
    let banks = exp.qnet.arch.bank_count();
    let mut rows = Vec::new();
    let mut eval = |scheme: LayoutScheme, role| -> Result<()> {
        let layout = exp.layout(&scheme)?;
        let ks = layout.resolve(banks)?;
        let result = exp.run_point(voltage, &scheme)?;
        rows.push(ProfileRow {
            role,
            k_per_bank: ks,
            loss_pts: exp.loss_pts(result.accuracy.mean),
            result,
            pareto: false,
        });
        Ok(())
    };
    for p in profiles {
        if p.len() != banks {
            return Err(HarnessError::Config(format!(
                "profile {p:?} has {} entries for {banks} banks",
                p.len()
            )));
        }
        eval(
            LayoutScheme::SensitivityBanks {
                k_per_bank: p.clone(),
            },
            ProfileRole::Candidate,
        )?;
    }
    for r in references {
        eval(r.clone(), ProfileRole::Reference)?;
    }
    let flags: Vec<bool> = rows
        .iter()
        .map(|r| !rows.iter().any(|o| dominates(&o.result, &r.result)))
        .collect();
    for (r, f) in rows.iter_mut().zip(flags) {
        r.pareto = f;
    }
    rows.sort_by(|a, b| {
        a.result
            .power
            .area_overhead
            .total_cmp(&b.result.power.area_overhead)
            .then_with(|| a.result.layout.cmp(&b.result.layout))
    });
    Ok(ProfileReport {
        voltage,
        fault_free_accuracy: exp.fault_free.accuracy,
        rows,
    })
}

pub fn write_profile_report(report: &ProfileReport, out_dir: &Path) -> Result<()> {
    let mut sink = CsvSink::create(
        &out_dir.join("profiles.csv"),
        &["role", "loss_pts", "pareto"],
    )?;
    for r in &report.rows {
        let mut rec = csv_record(&r.result);
        rec.push(
            match r.role {
                ProfileRole::Candidate => "candidate",
                ProfileRole::Reference => "reference",
            }
            .into(),
        );
        rec.push(r.loss_pts.to_string());
        rec.push(r.pareto.to_string());
        sink.write(&rec)?;
    }
    write_json(&out_dir.join("profiles.json"), report)
}

/// Greedy area reduction: starting from `start`, repeatedly lower by one the
/// protected count of the bank that frees the most 8T cells, as long as the
/// mean accuracy loss stays within `max_loss_pts`. Returns the final profile
/// and every accepted step.
pub fn search_profile(
    exp: &Experiment,
    voltage: f64,
    start: Vec<usize>,
    max_loss_pts: f64,
) -> Result<(Vec<usize>, Vec<RunResult>)> {
    let shapes = exp.bank_shapes();
    if start.len() != shapes.len() {
        return Err(HarnessError::Config(format!(
            "start profile {start:?} has {} entries for {} banks",
            start.len(),
            shapes.len()
        )));
    }
    let mut current = start;
    let mut accepted = Vec::new();
    // largest banks first: lowering k there frees the most area
    let mut order: Vec<usize> = (0..shapes.len()).collect();
    order.sort_by_key(|&b| std::cmp::Reverse(shapes[b].0 * shapes[b].1));
    loop {
        let mut stepped = false;
        for &b in &order {
            if current[b] == 0 {
                continue;
            }
            let mut cand = current.clone();
            cand[b] -= 1;
            let scheme = LayoutScheme::SensitivityBanks {
                k_per_bank: cand.clone(),
            };
            let r = exp.run_point(voltage, &scheme)?;
            let loss = exp.loss_pts(r.accuracy.mean);
            log::info!("search {scheme}: loss {loss:.3} pts");
            if loss <= max_loss_pts {
                current = cand;
                accepted.push(r);
                stepped = true;
                break;
            }
        }
        if !stepped {
            return Ok((current, accepted));
        }
    }
}
