//! Local refinement from small, promising partition centers.
//!
//! A candidate starts a local search only if its box is no larger than `beta`
//! and no previous start (or its neighbourhood) lies within `radius` of it.
//! A box already in the registry is divided when selected again.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{distance, PartitionLedger};

/// Outcome of [`ExclusionRegistry::gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDecision {
    /// The box is still too large; divide it as usual.
    SelectForDivision,
    /// Start a local search from the box center.
    Run,
    /// Too close to an earlier start; neither search nor divide.
    SkipDivisionOnly,
}

/// The set of partition ids near previous local-search starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionRegistry {
    members: BTreeSet<usize>,
    radius: f64,
    beta: f64,
}

impl ExclusionRegistry {
    pub fn new(radius: f64, beta: f64) -> Self {
        assert!(radius > 0.0, "exclusion radius must be positive");
        assert!(beta >= 0.0, "beta must be nonnegative");
        Self {
            members: BTreeSet::new(),
            radius,
            beta,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.contains(&id)
    }

    /// Decides what to do with a lowest-bound or lowest-value candidate and
    /// records it in the registry.
    pub fn gate(&mut self, candidate: usize, ledger: &PartitionLedger) -> GateDecision {
        let part = &ledger.partitions()[candidate];
        if part.half_diagonal() > self.beta || self.members.contains(&candidate) {
            return GateDecision::SelectForDivision;
        }
        let x = &part.center;
        let blocked = self
            .members
            .iter()
            .any(|&j| distance(x, &ledger.partitions()[j].center) <= self.radius);
        if blocked {
            self.members.insert(candidate);
            return GateDecision::SkipDivisionOnly;
        }
        for p in ledger.iter() {
            if distance(x, &p.center) <= self.radius {
                self.members.insert(p.id);
            }
        }
        self.members.insert(candidate);
        GateDecision::Run
    }
}

pub fn gate_local_search(
    candidate: usize,
    ledger: &PartitionLedger,
    registry: &mut ExclusionRegistry,
) -> GateDecision {
    registry.gate(candidate, ledger)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    /// Final point in normalized units.
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Objective as seen by a local optimizer: a normalized point in, a value out,
/// or `None` once the caller wants the search to stop.
pub type LocalObjective<'a> = dyn FnMut(&[f64]) -> Option<f64> + 'a;

/// Bound-constrained local minimizer over `[0,1]^N`.
pub trait LocalOptimizer: Send + Sync {
    /// Minimizes from `x0`, whose value `f0` is already known. Must not call
    /// `f` more than `budget` times.
    fn minimize(
        &self,
        f: &mut LocalObjective<'_>,
        x0: &[f64],
        f0: f64,
        initial_step: f64,
        budget: usize,
    ) -> LocalResult;
}

/// Cyclic derivative-free coordinate search with an Armijo-type expansion
/// line search, in the style of Lucidi–Sciandrone.
///
/// Each coordinate keeps its own tentative step `a`. A trial `x ± a e_i`
/// (truncated at the box) is accepted when `f(trial) <= f(x) - gamma * a^2`;
/// an accepted step keeps doubling while the doubled step still passes the
/// test and improves on the last accepted point. The final step becomes the
/// next tentative step; rejection in both directions halves it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDescent {
    pub tol: f64,
    pub gamma: f64,
    pub max_step: f64,
}

impl Default for CoordinateDescent {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            gamma: 1e-6,
            max_step: 0.5,
        }
    }
}

enum Probe {
    Value(f64),
    Stop,
}

impl LocalOptimizer for CoordinateDescent {
    fn minimize(
        &self,
        f: &mut LocalObjective<'_>,
        x0: &[f64],
        f0: f64,
        initial_step: f64,
        budget: usize,
    ) -> LocalResult {
        let mut x: Vec<f64> = x0.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let mut fx = f0;
        let mut steps = vec![initial_step.min(self.max_step); x.len()];
        let mut evals = 0usize;
        let mut interrupted = false;
        let mut probe = |y: &[f64], evals: &mut usize| -> Probe {
            if *evals >= budget || interrupted {
                return Probe::Stop;
            }
            *evals += 1;
            match f(y) {
                Some(v) => Probe::Value(v),
                None => {
                    interrupted = true;
                    Probe::Stop
                }
            }
        };
        let done = |x: Vec<f64>, fx, evals, converged| LocalResult {
            point: x,
            value: fx,
            evaluations: evals,
            converged,
        };

        loop {
            if steps.iter().all(|&a| a < self.tol) {
                return done(x, fx, evals, true);
            }
            let mut trials = 0usize;
            let mut flat = true;
            for i in 0..x.len() {
                let a = steps[i];
                if a < self.tol {
                    continue;
                }
                let mut accepted = None;
                for dir in [1.0, -1.0] {
                    let room = if dir > 0.0 { 1.0 - x[i] } else { x[i] };
                    let step = a.min(room);
                    if step <= 0.0 {
                        continue;
                    }
                    let mut y = x.clone();
                    y[i] = (x[i] + dir * step).clamp(0.0, 1.0);
                    let fy = match probe(&y, &mut evals) {
                        Probe::Value(v) => v,
                        Probe::Stop => return done(x, fx, evals, false),
                    };
                    trials += 1;
                    if fy != fx {
                        flat = false;
                    }
                    if fy > fx - self.gamma * step * step {
                        continue;
                    }
                    // expansion
                    let (mut best_step, mut best_f) = (step, fy);
                    while best_step < room {
                        let next = (2.0 * best_step).min(room);
                        let mut z = x.clone();
                        z[i] = (x[i] + dir * next).clamp(0.0, 1.0);
                        let fz = match probe(&z, &mut evals) {
                            Probe::Value(v) => v,
                            Probe::Stop => {
                                x[i] = (x[i] + dir * best_step).clamp(0.0, 1.0);
                                return done(x, best_f, evals, false);
                            }
                        };
                        if fz < best_f && fz <= fx - self.gamma * next * next {
                            best_step = next;
                            best_f = fz;
                        } else {
                            break;
                        }
                    }
                    x[i] = (x[i] + dir * best_step).clamp(0.0, 1.0);
                    fx = best_f;
                    accepted = Some(best_step);
                    break;
                }
                steps[i] = match accepted {
                    Some(step) => step.min(self.max_step),
                    None => 0.5 * a,
                };
            }
            // a sweep that saw only identical values carries no descent information
            if trials > 0 && flat {
                return done(x, fx, evals, true);
            }
        }
    }
}

/// Runs [`CoordinateDescent`] with default settings except the stopping step `tol`.
pub fn coordinate_descent_minimize(
    f: &mut LocalObjective<'_>,
    x0: &[f64],
    f0: f64,
    budget: usize,
    tol: f64,
) -> LocalResult {
    let cd = CoordinateDescent {
        tol,
        ..CoordinateDescent::default()
    };
    cd.minimize(f, x0, f0, 1e-3, budget)
}
