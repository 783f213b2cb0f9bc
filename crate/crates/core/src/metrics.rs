//! Operational characteristics, AUOC and variable importance.

use serde::{Deserialize, Serialize};

use crate::fmt::{json_opt_f64, json_vec_f64};
use crate::model::PartitionLedger;

/// Outcome of one solver run on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub variant: String,
    pub solved: bool,
    /// Evaluations used; for a solved run, the evaluation that solved it.
    pub fevals: u64,
    #[serde(serialize_with = "json_opt_f64")]
    pub best_f: Option<f64>,
    #[serde(serialize_with = "json_opt_f64")]
    pub rel_err: Option<f64>,
    pub error: Option<String>,
    #[serde(serialize_with = "json_vec_f64")]
    pub importance: Vec<f64>,
}

/// `|best - f*| / |f*|`, or the absolute gap when `|f*| < 1e-12`.
pub fn relative_error(best: f64, f_glob: f64) -> f64 {
    if f_glob.abs() < 1e-12 {
        (best - f_glob).abs()
    } else {
        (best - f_glob).abs() / f_glob.abs()
    }
}

/// Step curve `c(γ)` sampled at its grid points; constant to the right of
/// each point and zero left of the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcCurve {
    pub gamma: Vec<f64>,
    pub c: Vec<f64>,
}

/// Sorted distinct solve counts up to `gamma_max`, framed by 0 and `gamma_max`.
pub fn oc_grid(records: &[RunRecord], gamma_max: f64) -> Vec<f64> {
    let mut g: Vec<f64> = records
        .iter()
        .filter(|r| r.solved && (r.fevals as f64) <= gamma_max)
        .map(|r| r.fevals as f64)
        .collect();
    g.push(0.0);
    g.push(gamma_max);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Fraction of records solved within `γ` evaluations, at each grid point.
pub fn operational_characteristic(records: &[RunRecord], gamma_grid: &[f64]) -> OcCurve {
    let total = records.len();
    let mut solves: Vec<f64> = records
        .iter()
        .filter(|r| r.solved)
        .map(|r| r.fevals as f64)
        .collect();
    solves.sort_by(f64::total_cmp);
    let c = gamma_grid
        .iter()
        .map(|&g| {
            if total == 0 {
                0.0
            } else {
                solves.partition_point(|&e| e <= g) as f64 / total as f64
            }
        })
        .collect();
    OcCurve {
        gamma: gamma_grid.to_vec(),
        c,
    }
}

/// `(1/γ_max) ∫₀^{γ_max} c(γ) dγ` for a step curve whose grid contains every jump.
pub fn auoc(curve: &OcCurve, gamma_max: f64) -> f64 {
    if gamma_max <= 0.0 {
        return 0.0;
    }
    let mut area = 0.0;
    for (i, (&g, &c)) in curve.gamma.iter().zip(&curve.c).enumerate() {
        if g >= gamma_max {
            break;
        }
        let next = curve
            .gamma
            .get(i + 1)
            .copied()
            .unwrap_or(gamma_max)
            .min(gamma_max);
        area += c * (next - g.max(0.0));
    }
    (area / gamma_max).clamp(0.0, 1.0)
}

/// AUOC of `records` on the exact grid.
pub fn auoc_of(records: &[RunRecord], gamma_max: f64) -> f64 {
    auoc(
        &operational_characteristic(records, &oc_grid(records, gamma_max)),
        gamma_max,
    )
}

/// Mean slope row over the ledger, normalized to sum to one; uniform when
/// every slope is zero.
pub fn variable_importance(ledger: &PartitionLedger) -> Vec<f64> {
    variable_importance_scaled(ledger, None)
}

/// As [`variable_importance`], optionally converting slopes to problem units
/// by dividing coordinate `n` by `widths[n]`.
pub fn variable_importance_scaled(ledger: &PartitionLedger, widths: Option<&[f64]>) -> Vec<f64> {
    let n = ledger.dim();
    let mut mean = vec![0.0; n];
    for p in ledger.iter() {
        for (m, s) in mean.iter_mut().zip(&p.slopes) {
            *m += s;
        }
    }
    if let Some(w) = widths {
        for (m, w) in mean.iter_mut().zip(w) {
            *m /= w;
        }
    }
    normalize(mean)
}

fn normalize(mean: Vec<f64>) -> Vec<f64> {
    let n = mean.len();
    let total: f64 = mean.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return vec![1.0 / n as f64; n];
    }
    let mut v: Vec<f64> = mean.iter().map(|m| m / total).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - v.iter().sum::<f64>();
    if let Some(big) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    {
        v[big] += residue;
    }
    v
}
