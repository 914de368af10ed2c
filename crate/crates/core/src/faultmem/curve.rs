use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitcellKind {
    #[serde(rename = "sixT")]
    SixT,
    #[serde(rename = "eightT")]
    EightT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureType {
    ReadAccess,
    Write,
    ReadDisturb,
}

/// Threshold-voltage variation of a transistor relative to a minimum-sized one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VtVariationParams {
    /// Std-dev of a minimum-sized device, volts.
    pub sigma_vt0: f64,
    pub l: f64,
    pub w: f64,
    pub l_min: f64,
    pub w_min: f64,
}

/// `sigma_vt0 * sqrt((Lmin / L) * (Wmin / W))`.
pub fn sigma_vt(p: &VtVariationParams) -> Result<f64> {
    let all = [p.sigma_vt0, p.l, p.w, p.l_min, p.w_min];
    if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidDevice(format!(
            "all device parameters must be positive: {p:?}"
        )));
    }
    if p.l < p.l_min || p.w < p.w_min {
        return Err(Error::InvalidDevice(format!(
            "L={} W={} below minimum L={} W={}",
            p.l, p.w, p.l_min, p.w_min
        )));
    }
    Ok(p.sigma_vt0 * ((p.l_min / p.l) * (p.w_min / p.w)).sqrt())
}

/// Failure probability versus supply voltage.
///
/// JSON forms: `"zero"`, `{"table": [[volts, p], ...]}` or
/// `{"analytic": {"mu0": .., "slope": .., "sigma_m": ..}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCurve {
    #[default]
    Zero,
    /// `(voltage, probability)` points, ascending in voltage.
    Table(Vec<(f64, f64)>),
    /// Gaussian margin: `p(V) = Phi(-(mu0 + slope * (V - vnom)) / sigma_m)`.
    Analytic { mu0: f64, slope: f64, sigma_m: f64 },
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

impl FailureCurve {
    /// A voltage-independent probability.
    pub fn constant(p: f64) -> Self {
        Self::Table(vec![(0.0, p)])
    }

    /// Sorts table points by voltage.
    pub fn normalize(&mut self) {
        if let Self::Table(points) = self {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Table(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidCurve("empty table".into()));
                }
                for &(v, p) in points {
                    if !v.is_finite() || !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidCurve(format!(
                            "bad point ({v}, {p}): need finite voltage and p in [0, 1]"
                        )));
                    }
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidCurve(format!(
                            "voltages not strictly ascending at {}",
                            w[1].0
                        )));
                    }
                    if w[1].1 > w[0].1 {
                        return Err(Error::InvalidCurve(format!(
                            "probability rises from {} to {} between {} V and {} V",
                            w[0].1, w[1].1, w[0].0, w[1].0
                        )));
                    }
                }
                Ok(())
            }
            Self::Analytic {
                mu0,
                slope,
                sigma_m,
            } => {
                if !mu0.is_finite() || !slope.is_finite() || !sigma_m.is_finite() {
                    return Err(Error::InvalidCurve("non-finite analytic parameter".into()));
                }
                if *sigma_m <= 0.0 {
                    return Err(Error::InvalidCurve("sigma_m must be positive".into()));
                }
                if *slope < 0.0 {
                    return Err(Error::InvalidCurve(
                        "negative slope makes failures improve as voltage drops".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Probability at `volts`.
    ///
    /// Tables interpolate linearly in log-probability between tabulated points
    /// (linearly in probability when a neighbour is zero) and clamp beyond the ends.
    pub fn eval(&self, volts: f64, vnom: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Table(points) => {
                let first = points[0];
                let last = points[points.len() - 1];
                if volts <= first.0 {
                    return first.1;
                }
                if volts >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|&(v, _)| v <= volts);
                let (v0, p0) = points[i - 1];
                let (v1, p1) = points[i];
                if volts == v0 {
                    return p0;
                }
                let t = (volts - v0) / (v1 - v0);
                if p0 > 0.0 && p1 > 0.0 {
                    (p0.ln() + t * (p1.ln() - p0.ln())).exp()
                } else {
                    p0 + t * (p1 - p0)
                }
            }
            Self::Analytic {
                mu0,
                slope,
                sigma_m,
            } => phi(-(mu0 + slope * (volts - vnom)) / sigma_m),
        }
    }

    /// Voltage range covered by a table; unbounded otherwise.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::Table(points) if points.len() > 1 => {
                Some((points[0].0, points[points.len() - 1].0))
            }
            _ => None,
        }
    }

    fn is_identically_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Table(points) => points.iter().all(|&(_, p)| p == 0.0),
            Self::Analytic { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellCurves {
    #[serde(default)]
    pub read_access: FailureCurve,
    #[serde(default)]
    pub write: FailureCurve,
    #[serde(default)]
    pub read_disturb: FailureCurve,
}

impl CellCurves {
    pub fn curve(&self, t: FailureType) -> &FailureCurve {
        match t {
            FailureType::ReadAccess => &self.read_access,
            FailureType::Write => &self.write,
            FailureType::ReadDisturb => &self.read_disturb,
        }
    }

    fn curves_mut(&mut self) -> [&mut FailureCurve; 3] {
        [
            &mut self.read_access,
            &mut self.write,
            &mut self.read_disturb,
        ]
    }

    fn all(&self) -> [&FailureCurve; 3] {
        [&self.read_access, &self.write, &self.read_disturb]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cells {
    #[serde(rename = "sixT")]
    pub six_t: CellCurves,
    #[serde(rename = "eightT", default)]
    pub eight_t: CellCurves,
}

/// Voltage-to-probability curves for each bitcell kind and failure type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureModel {
    /// Nominal supply, volts.
    #[serde(default = "default_vnom")]
    pub vnom: f64,
    pub cells: Cells,
}

fn default_vnom() -> f64 {
    0.95
}

impl FailureModel {
    /// 6T curves as given, 8T and read-disturb zero.
    pub fn six_t(read_access: FailureCurve, write: FailureCurve, vnom: f64) -> Result<Self> {
        let mut m = Self {
            vnom,
            cells: Cells {
                six_t: CellCurves {
                    read_access,
                    write,
                    read_disturb: FailureCurve::Zero,
                },
                eight_t: CellCurves::default(),
            },
        };
        m.normalize();
        m.validate()?;
        Ok(m)
    }

    /// Voltage-independent 6T probabilities; handy for tests and sensitivity studies.
    pub fn constant(p_read_access: f64, p_write: f64) -> Result<Self> {
        Self::six_t(
            FailureCurve::constant(p_read_access),
            FailureCurve::constant(p_write),
            default_vnom(),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut m: Self = serde_json::from_str(s)?;
        m.normalize();
        m.validate()?;
        Ok(m)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn normalize(&mut self) {
        for c in self
            .cells
            .six_t
            .curves_mut()
            .into_iter()
            .chain(self.cells.eight_t.curves_mut())
        {
            c.normalize();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.vnom.is_finite() || self.vnom <= 0.0 {
            return Err(Error::InvalidCurve(format!(
                "vnom must be positive, got {}",
                self.vnom
            )));
        }
        for c in self
            .cells
            .six_t
            .all()
            .into_iter()
            .chain(self.cells.eight_t.all())
        {
            c.validate()?;
        }
        if !self
            .cells
            .eight_t
            .all()
            .iter()
            .all(|c| c.is_identically_zero())
        {
            return Err(Error::InvalidCurve(
                "8T failure curves must be identically zero".into(),
            ));
        }
        Ok(())
    }

    pub fn failure_prob(&self, kind: BitcellKind, t: FailureType, volts: f64) -> f64 {
        match kind {
            BitcellKind::EightT => 0.0,
            BitcellKind::SixT => self.cells.six_t.curve(t).eval(volts, self.vnom),
        }
    }

    /// Intersection of the voltage ranges covered by the 6T tables.
    pub fn support(&self) -> (f64, f64) {
        self.cells
            .six_t
            .all()
            .iter()
            .filter_map(|c| c.support())
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (a, b)| {
                (lo.max(a), hi.min(b))
            })
    }

    pub fn in_support(&self, volts: f64) -> bool {
        let (lo, hi) = self.support();
        volts >= lo && volts <= hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dev(sigma_vt0: f64, l: f64, w: f64) -> VtVariationParams {
        VtVariationParams {
            sigma_vt0,
            l,
            w,
            l_min: 1.0,
            w_min: 1.0,
        }
    }

    #[test]
    fn sigma_vt_scaling() {
        assert!((sigma_vt(&dev(0.030, 1.0, 1.0)).unwrap() - 0.030).abs() < 1e-15);
        assert!((sigma_vt(&dev(0.030, 1.0, 4.0)).unwrap() - 0.015).abs() < 1e-15);
        assert!((sigma_vt(&dev(0.040, 2.0, 2.0)).unwrap() - 0.020).abs() < 1e-15);
        assert!(sigma_vt(&dev(0.030, 0.0, 1.0)).is_err());
        assert!(sigma_vt(&dev(-0.03, 1.0, 1.0)).is_err());
        assert!(sigma_vt(&dev(0.030, 0.5, 1.0)).is_err());
    }

    fn table() -> FailureCurve {
        FailureCurve::Table(vec![(0.6, 1e-1), (0.7, 1e-3), (0.8, 1e-5), (0.95, 0.0)])
    }

    #[test]
    fn table_hits_points_exactly_and_interpolates_in_log() {
        let c = table();
        c.validate().unwrap();
        for (v, p) in [(0.6, 1e-1), (0.7, 1e-3), (0.8, 1e-5), (0.95, 0.0)] {
            assert_eq!(c.eval(v, 0.95), p);
        }
        // halfway in log space between 1e-1 and 1e-3
        assert!((c.eval(0.65, 0.95) - 1e-2).abs() < 1e-12);
        // clamped beyond the ends
        assert_eq!(c.eval(0.4, 0.95), 1e-1);
        assert_eq!(c.eval(1.2, 0.95), 0.0);
        // linear next to a zero endpoint
        assert!((c.eval(0.875, 0.95) - 0.5e-5).abs() < 1e-18);
        assert_eq!(c.support(), Some((0.6, 0.95)));
    }

    #[test]
    fn table_validation() {
        assert!(FailureCurve::Table(vec![]).validate().is_err());
        assert!(FailureCurve::Table(vec![(0.6, 0.1), (0.7, 0.2)])
            .validate()
            .is_err());
        assert!(FailureCurve::Table(vec![(0.6, 1.5)]).validate().is_err());
        assert!(FailureCurve::Table(vec![(0.7, 0.1), (0.6, 0.2)])
            .validate()
            .is_err());
    }

    #[test]
    fn analytic_at_zero_margin_is_half() {
        let c = FailureCurve::Analytic {
            mu0: 0.1,
            slope: 0.5,
            sigma_m: 0.02,
        };
        c.validate().unwrap();
        // mu0 + slope * (V - vnom) = 0 at V = vnom - 0.2
        assert!((c.eval(0.75, 0.95) - 0.5).abs() < 1e-12);
        assert!(c.eval(0.95, 0.95) < 1e-6);
        assert!(FailureCurve::Analytic {
            mu0: 0.1,
            slope: -1.0,
            sigma_m: 0.02
        }
        .validate()
        .is_err());
    }

    #[test]
    fn eight_t_never_fails() {
        let m = FailureModel::constant(0.3, 0.2).unwrap();
        for v in [0.3, 0.6, 0.95] {
            for t in [
                FailureType::ReadAccess,
                FailureType::Write,
                FailureType::ReadDisturb,
            ] {
                assert_eq!(m.failure_prob(BitcellKind::EightT, t, v), 0.0);
            }
        }
        assert_eq!(
            m.failure_prob(BitcellKind::SixT, FailureType::ReadAccess, 0.6),
            0.3
        );
        assert_eq!(
            m.failure_prob(BitcellKind::SixT, FailureType::ReadDisturb, 0.6),
            0.0
        );
    }

    #[test]
    fn json_forms_and_nonzero_eight_t_rejected() {
        let json = r#"{
            "vnom": 0.95,
            "cells": {
                "sixT": {
                    "read_access": {"table": [[0.8, 1e-5], [0.6, 1e-1]]},
                    "write": {"analytic": {"mu0": 0.2, "slope": 1.0, "sigma_m": 0.05}}
                },
                "eightT": {"read_access": "zero"}
            }
        }"#;
        let m = FailureModel::from_json_str(json).unwrap();
        // unsorted table is sorted on load
        assert_eq!(
            m.cells.six_t.read_access,
            FailureCurve::Table(vec![(0.6, 1e-1), (0.8, 1e-5)])
        );
        assert_eq!(m.cells.six_t.read_disturb, FailureCurve::Zero);
        let back = FailureModel::from_json_str(&m.to_json_string().unwrap()).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"cells": {"sixT": {}, "eightT": {"write": {"table": [[0.6, 0.01]]}}}}"#;
        assert!(FailureModel::from_json_str(bad).is_err());
        let empty = r#"{"cells": {"sixT": {"read_access": {"table": []}}}}"#;
        assert!(FailureModel::from_json_str(empty).is_err());
    }

    fn arb_table() -> impl Strategy<Value = FailureCurve> {
        prop::collection::vec((0.3f64..1.2, 0.0f64..=1.0), 1..8).prop_map(|mut pts| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| a.0 == b.0);
            // force non-increasing probabilities
            let mut ps: Vec<f64> = pts.iter().map(|p| p.1).collect();
            ps.sort_by(|a, b| b.total_cmp(a));
            FailureCurve::Table(pts.iter().zip(ps).map(|(p, q)| (p.0, q)).collect())
        })
    }

    fn arb_analytic() -> impl Strategy<Value = FailureCurve> {
        (-0.5f64..0.5, 0.0f64..5.0, 1e-3f64..0.5).prop_map(|(mu0, slope, sigma_m)| {
            FailureCurve::Analytic {
                mu0,
                slope,
                sigma_m,
            }
        })
    }

    proptest! {
        #[test]
        fn curves_are_monotone_non_increasing(
            c in prop_oneof![arb_table(), arb_analytic()],
            a in 0.2f64..1.3,
            b in 0.2f64..1.3,
        ) {
            c.validate().unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (plo, phi) = (c.eval(lo, 0.95), c.eval(hi, 0.95));
            prop_assert!((0.0..=1.0).contains(&plo) && (0.0..=1.0).contains(&phi));
            prop_assert!(phi <= plo * (1.0 + 1e-12) + 1e-300);
        }
    }
}
