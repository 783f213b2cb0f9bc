//! The outer optimization loop: select, sample, divide, update slopes, and
//! optionally refine locally, until a stopping rule fires.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::{global_slope_max, local_constants, update_slopes_on_division};
use crate::local::{CoordinateDescent, ExclusionRegistry, GateDecision, LocalOptimizer};
use crate::model::{ObjectiveHandle, PartitionLedger, StopRule};
use crate::partition::{
    divide_partition, division_order, init_root_with, sample_cost, sample_partition,
};
use crate::select::{
    select_hlo, select_potentially_optimal, select_with_constants, LargestBoxRule, Reasons,
    Selected, SelectionOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Adaptive local constants blended from slopes and the global estimate.
    Halo,
    /// The global slope estimate for every partition.
    Hlo,
    /// Potentially optimal hyperrectangles, no local search.
    Direct,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Halo => "halo",
            Variant::Hlo => "hlo",
            Variant::Direct => "direct",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "halo" => Ok(Variant::Halo),
            "hlo" => Ok(Variant::Hlo),
            "direct" => Ok(Variant::Direct),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Largest half-diagonal from which a local search may start.
    pub beta: f64,
    pub exclusion_radius: f64,
    pub stop: StopRule,
    pub local_search: bool,
    pub direct_epsilon_rel: f64,
    pub largest_box_rule: LargestBoxRule,
    /// Per-invocation local-search cap is `local_evals_per_dim * N`.
    pub local_evals_per_dim: usize,
    pub local: CoordinateDescent,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Halo,
            beta: 1e-4,
            exclusion_radius: 1e-4,
            stop: StopRule::default(),
            local_search: true,
            direct_epsilon_rel: 1e-4,
            largest_box_rule: LargestBoxRule::LowerBound,
            local_evals_per_dim: 100,
            local: CoordinateDescent::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, max_fun_evals: usize) -> Self {
        self.stop.max_fun_evals = max_fun_evals;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn without_local_search(mut self) -> Self {
        self.local_search = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.stop.validate()?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("beta must be finite and >= 0".into()));
        }
        if !(self.exclusion_radius > 0.0) {
            return Err(Error::InvalidConfig("exclusion radius must be positive".into()));
        }
        if !(self.direct_epsilon_rel >= 0.0) {
            return Err(Error::InvalidConfig("direct epsilon must be >= 0".into()));
        }
        if self.local_evals_per_dim == 0 {
            return Err(Error::InvalidConfig("local_evals_per_dim must be positive".into()));
        }
        Ok(())
    }

    fn uses_local_search(&self) -> bool {
        self.local_search && self.variant != Variant::Direct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solved,
    BudgetExhausted,
    IterLimit,
    /// Every partition is below floating-point resolution.
    Stalled,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Solved => "solved",
            Status::BudgetExhausted => "budget_exhausted",
            Status::IterLimit => "iter_limit",
            Status::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSource {
    Init,
    Sample,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub index: u64,
    /// Normalized coordinates.
    pub point: Vec<f64>,
    pub value: f64,
    pub best: f64,
    pub source: EvalSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub selected: Vec<Selected>,
    pub partitions: usize,
    pub global_constant: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchRecord {
    pub iteration: usize,
    pub partition_id: usize,
    pub start: Vec<f64>,
    pub start_value: f64,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub evaluations: Vec<EvalRecord>,
    pub iterations: Vec<IterationRecord>,
    pub local_searches: Vec<LocalSearchRecord>,
    pub status: Status,
    pub best_value: f64,
    /// Best point in problem units.
    pub best_point: Vec<f64>,
    /// Evaluation count at which the stopping tolerance was first met.
    pub solved_at: Option<u64>,
}

impl RunTrace {
    fn empty() -> Self {
        Self {
            evaluations: Vec::new(),
            iterations: Vec::new(),
            local_searches: Vec::new(),
            status: Status::IterLimit,
            best_value: f64::INFINITY,
            best_point: Vec::new(),
            solved_at: None,
        }
    }

    pub fn eval_count(&self) -> u64 {
        self.evaluations.len() as u64
    }
}

/// A finished run: the trace plus the final partition ledger.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub trace: RunTrace,
    pub ledger: PartitionLedger,
    pub eval_count: u64,
}

/// A run aborted by an evaluator failure, with everything recorded so far.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub trace: RunTrace,
    pub ledger: PartitionLedger,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} evaluations: {}",
            self.trace.evaluations.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {}

/// `true` when `best` is within `tol` of `f_glob`, relative unless `f_glob` is ~0.
pub fn is_solved(best: f64, f_glob: f64, tol: f64) -> bool {
    if f_glob.abs() < 1e-12 {
        (best - f_glob).abs() <= tol
    } else {
        (best - f_glob) / f_glob.abs() <= tol
    }
}

/// Stopping status after an evaluation, `None` to continue.
pub fn check_stop(
    best: f64,
    eval_count: u64,
    known_optimum: Option<f64>,
    stop: &StopRule,
) -> Option<Status> {
    if let Some(f_glob) = known_optimum {
        if is_solved(best, f_glob, stop.rel_error_tol) {
            return Some(Status::Solved);
        }
    }
    if eval_count >= stop.max_fun_evals as u64 {
        return Some(Status::BudgetExhausted);
    }
    None
}

enum Halt {
    Stop(Status),
    Failed(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExhausted { .. } => Halt::Stop(Status::BudgetExhausted),
            other => Halt::Failed(other),
        }
    }
}

/// Evaluation bookkeeping kept apart from the ledger so both can be borrowed.
struct Recorder {
    obj: ObjectiveHandle,
    stop: StopRule,
    trace: RunTrace,
    best_unit: Vec<f64>,
}

impl Recorder {
    fn remaining(&self) -> usize {
        (self.stop.max_fun_evals as u64).saturating_sub(self.obj.eval_count()) as usize
    }

    fn eval(&mut self, q: &[f64], source: EvalSource) -> Result<f64, Halt> {
        if self.remaining() == 0 {
            return Err(Halt::Stop(Status::BudgetExhausted));
        }
        let q: Vec<f64> = q.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let x = self.obj.domain().denormalize_point(&q)?;
        let value = self.obj.evaluate(&x)?;
        if value < self.trace.best_value {
            self.trace.best_value = value;
            self.trace.best_point = x;
            self.best_unit = q.clone();
        }
        let index = self.obj.eval_count() - 1;
        self.trace.evaluations.push(EvalRecord {
            index,
            point: q,
            value,
            best: self.trace.best_value,
            source,
        });
        // Only a solve halts mid-plan; an exhausted budget is noticed when the
        // next plan does not fit, so a plan that fit is always completed.
        match check_stop(
            self.trace.best_value,
            self.obj.eval_count(),
            self.obj.known_optimum(),
            &self.stop,
        ) {
            Some(Status::Solved) => {
                self.trace.solved_at = Some(self.obj.eval_count());
                Err(Halt::Stop(Status::Solved))
            }
            _ => Ok(value),
        }
    }
}

struct Solver<'a> {
    cfg: SolverConfig,
    ledger: PartitionLedger,
    rec: Recorder,
    registry: ExclusionRegistry,
    local: &'a dyn LocalOptimizer,
}

impl Solver<'_> {
    fn select(&self) -> (SelectionOutcome, f64) {
        let global = global_slope_max(&self.ledger);
        let outcome = match self.cfg.variant {
            Variant::Halo => {
                let constants = local_constants(&self.ledger);
                select_with_constants(&self.ledger, &constants, self.cfg.largest_box_rule)
            }
            Variant::Hlo => select_hlo(&self.ledger, global),
            Variant::Direct => SelectionOutcome {
                entries: select_potentially_optimal(&self.ledger, self.cfg.direct_epsilon_rel)
                    .into_iter()
                    .map(|id| Selected {
                        id,
                        reasons: Reasons::default(),
                    })
                    .collect(),
            },
        };
        (outcome, global)
    }

    fn divide(&mut self, id: usize) -> Result<(), Halt> {
        let cost = sample_cost(self.ledger.get(id)?);
        let remaining = self.rec.remaining();
        if cost > remaining {
            return Err(Halt::Stop(Status::BudgetExhausted));
        }
        let rec = &mut self.rec;
        let plan = sample_partition(&self.ledger, id, remaining, |q| {
            rec.eval(q, EvalSource::Sample)
        })?;
        let order = division_order(&plan);
        let children = divide_partition(&mut self.ledger, id, &plan, &order)?;
        update_slopes_on_division(&mut self.ledger, id, &plan, &order, &children)?;
        Ok(())
    }

    fn local_search(&mut self, id: usize, iteration: usize) -> Result<(), Halt> {
        let part = self.ledger.get(id)?;
        let start = part.center.clone();
        let start_value = part.value;
        let initial_step = part.half_diagonal().max(1e-3);
        let budget = self
            .rec
            .remaining()
            .min(self.cfg.local_evals_per_dim * self.ledger.dim());
        let mut halted: Option<Halt> = None;
        let rec = &mut self.rec;
        let mut objective = |q: &[f64]| match rec.eval(q, EvalSource::Local) {
            Ok(v) => Some(v),
            Err(h) => {
                halted = Some(h);
                None
            }
        };
        let result = self
            .local
            .minimize(&mut objective, &start, start_value, initial_step, budget);
        self.rec.trace.local_searches.push(LocalSearchRecord {
            iteration,
            partition_id: id,
            start,
            start_value,
            value: result.value,
            evaluations: result.evaluations,
            converged: result.converged,
        });
        match halted {
            Some(h) => Err(h),
            None => Ok(()),
        }
    }

    fn iterate(&mut self, iteration: usize) -> Result<(), Halt> {
        let (selection, global) = self.select();
        if selection.is_empty() {
            return Err(Halt::Stop(Status::Stalled));
        }
        self.rec.trace.iterations.push(IterationRecord {
            iteration,
            selected: selection.entries.clone(),
            partitions: self.ledger.len(),
            global_constant: global,
            evaluations: self.rec.obj.eval_count(),
        });
        // gate (and run) every local search before any division
        let mut to_divide = Vec::with_capacity(selection.entries.len());
        for entry in &selection.entries {
            let mut divide = true;
            if self.cfg.uses_local_search() && entry.local_candidate() {
                match self.registry.gate(entry.id, &self.ledger) {
                    GateDecision::SelectForDivision => {}
                    GateDecision::Run => {
                        self.local_search(entry.id, iteration)?;
                        divide = entry.reasons.largest_box;
                    }
                    GateDecision::SkipDivisionOnly => divide = entry.reasons.largest_box,
                }
            }
            if divide {
                to_divide.push(entry.id);
            }
        }
        for id in to_divide {
            self.divide(id)?;
        }
        Ok(())
    }

    fn run(&mut self) -> Result<Status, Halt> {
        let dim = self.rec.obj.dim();
        let rec = &mut self.rec;
        let mut solved = false;
        self.ledger = init_root_with(dim, |q| match rec.eval(q, EvalSource::Init) {
            Err(Halt::Stop(Status::Solved)) => {
                solved = true;
                Ok(rec.trace.best_value)
            }
            other => other,
        })?;
        if solved {
            return Err(Halt::Stop(Status::Solved));
        }
        for k in 0..self.cfg.stop.max_iter {
            self.iterate(k)?;
        }
        Ok(Status::IterLimit)
    }
}

/// Runs the configured variant with the built-in coordinate-descent refiner.
pub fn run(obj: &ObjectiveHandle, cfg: &SolverConfig) -> Result<SolverRun, RunFailure> {
    run_with(obj, cfg, &cfg.local)
}

/// Runs with a caller-supplied local optimizer.
///
/// The handle is cloned with a fresh counter, so concurrent runs on clones of
/// one handle never share counts.
pub fn run_with(
    obj: &ObjectiveHandle,
    cfg: &SolverConfig,
    local: &dyn LocalOptimizer,
) -> Result<SolverRun, RunFailure> {
    let dim = obj.dim();
    if let Err(error) = cfg.validate() {
        return Err(RunFailure {
            error,
            trace: RunTrace::empty(),
            ledger: PartitionLedger::new(dim),
        });
    }
    let mut solver = Solver {
        cfg: *cfg,
        ledger: PartitionLedger::new(dim),
        rec: Recorder {
            obj: obj.fresh(),
            stop: cfg.stop,
            trace: RunTrace::empty(),
            best_unit: Vec::new(),
        },
        registry: ExclusionRegistry::new(cfg.exclusion_radius, cfg.beta),
        local,
    };
    let outcome = solver.run();
    let Solver { ledger, rec, .. } = solver;
    let mut trace = rec.trace;
    match outcome {
        Ok(status) | Err(Halt::Stop(status)) => {
            trace.status = status;
            Ok(SolverRun {
                trace,
                ledger,
                eval_count: rec.obj.eval_count(),
            })
        }
        Err(Halt::Failed(error)) => Err(RunFailure {
            error,
            trace,
            ledger,
        }),
    }
}
