//! Runs a solver configuration over a manifest and aggregates the results.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, json_f64, json_opt_f64};
use crate::manifest::{Manifest, ManifestRecord};
use crate::metrics::{auoc_of, relative_error, variable_importance, RunRecord};
use crate::solver::{run, SolverConfig, Status};

pub const AVERAGING_NOTE: &str =
    "average_evals is taken over solved runs only; unsolved runs are excluded";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub total: usize,
    pub solved: usize,
    #[serde(serialize_with = "json_f64")]
    pub percentage_solved: f64,
    #[serde(serialize_with = "json_opt_f64")]
    pub average_evals: Option<f64>,
    #[serde(serialize_with = "json_f64")]
    pub auoc: f64,
    pub gamma_max: u64,
}

impl Aggregate {
    pub fn from_rows(rows: &[RunRecord], gamma_max: u64) -> Self {
        let solved: Vec<&RunRecord> = rows.iter().filter(|r| r.solved).collect();
        let total = rows.len();
        let average_evals = (!solved.is_empty())
            .then(|| solved.iter().map(|r| r.fevals as f64).sum::<f64>() / solved.len() as f64);
        Self {
            total,
            solved: solved.len(),
            percentage_solved: if total == 0 {
                0.0
            } else {
                100.0 * solved.len() as f64 / total as f64
            },
            average_evals,
            auoc: auoc_of(rows, gamma_max as f64),
            gamma_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config: SolverConfig,
    pub seeds: Vec<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub jobs: usize,
    pub averaging: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: ReportMetadata,
    pub aggregate: Aggregate,
    pub rows: Vec<RunRecord>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("bad report: {e}")))
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_csv(rows: &[RunRecord]) -> String {
    let mut out = String::from("problem,N,variant,solved,fevals,best_f,rel_err\n");
    let opt = |x: Option<f64>| x.map(f17).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.problem,
            r.n,
            r.variant,
            r.solved,
            r.fevals,
            opt(r.best_f),
            opt(r.rel_err)
        );
    }
    out
}

/// Solves one manifest problem; failures are reported in the row.
pub fn run_record(record: &ManifestRecord, cfg: &SolverConfig) -> RunRecord {
    let mut row = RunRecord {
        problem: record.label(),
        n: record.n,
        variant: cfg.variant.to_string(),
        solved: false,
        fevals: 0,
        best_f: None,
        rel_err: None,
        error: None,
        importance: Vec::new(),
    };
    let problem = match record.build() {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let (trace, ledger) = match run(&problem.handle, cfg) {
        Ok(out) => (out.trace, out.ledger),
        Err(fail) => {
            row.error = Some(fail.error.to_string());
            (fail.trace, fail.ledger)
        }
    };
    row.solved = trace.status == Status::Solved && row.error.is_none();
    row.fevals = trace.solved_at.unwrap_or(trace.evaluations.len() as u64);
    if !trace.evaluations.is_empty() {
        row.best_f = Some(trace.best_value);
        row.rel_err = Some(relative_error(trace.best_value, problem.known_optimum));
    }
    if !ledger.is_empty() {
        row.importance = variable_importance(&ledger);
    }
    row
}

/// Runs every manifest problem on a pool of `jobs` threads (0 = rayon's
/// default). Rows come back in manifest order and do not depend on `jobs`.
pub fn run_benchmark(manifest: &Manifest, cfg: &SolverConfig, jobs: usize) -> Result<BenchmarkReport> {
    if manifest.is_empty() {
        return Err(Error::EmptyManifest);
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let rows: Vec<RunRecord> = pool.install(|| {
        manifest
            .records
            .par_iter()
            .map(|r| run_record(r, cfg))
            .collect()
    });
    let gamma_max = cfg.stop.max_fun_evals as u64;
    Ok(BenchmarkReport {
        metadata: ReportMetadata {
            config: *cfg,
            seeds: manifest.records.iter().map(|r| r.seed).collect(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            jobs: pool.current_num_threads(),
            averaging: AVERAGING_NOTE.to_string(),
        },
        aggregate: Aggregate::from_rows(&rows, gamma_max),
        rows,
    })
}
