//! Domain types shared by every solver component.
//!
//! All partition geometry lives in the unit hypercube `[0,1]^N`. Objectives are
//! always called in problem units; [`BoxDomain`] converts between the two.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to compare side lengths and half-diagonals that
/// were produced by repeated division by three.
pub const SIZE_REL_TOL: f64 = 1e-12;

/// `true` when `a` and `b` agree within [`SIZE_REL_TOL`] relative to the larger.
#[inline]
pub fn same_size(a: f64, b: f64) -> bool {
    (a - b).abs() <= SIZE_REL_TOL * a.abs().max(b.abs())
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned search box `{x : lower <= x <= upper}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (n, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidDomain(format!(
                    "coordinate {n}: lower {l} must be finite and below upper {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit hypercube in `dim` dimensions.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    /// Same bounds `[lower, upper]` on every coordinate.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// Maps a point in problem units onto `[0,1]^N`.
    pub fn normalize_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p.len())?;
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .enumerate()
            .map(|(index, (&x, (&l, &u)))| {
                if !(l <= x && x <= u) {
                    return Err(Error::DomainViolation {
                        index,
                        value: x,
                        lower: l,
                        upper: u,
                    });
                }
                Ok((x - l) / (u - l))
            })
            .collect()
    }

    /// Maps a point of `[0,1]^N` back into problem units.
    pub fn denormalize_point(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(q.len())?;
        q.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .enumerate()
            .map(|(index, (&t, (&l, &u)))| {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::DomainViolation {
                        index,
                        value: t,
                        lower: 0.0,
                        upper: 1.0,
                    });
                }
                Ok(l + t * (u - l))
            })
            .collect()
    }
}

/// One hyperrectangle of the partition, in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub id: usize,
    pub center: Vec<f64>,
    /// Distance from the center to the boundary along each coordinate.
    pub half_sides: Vec<f64>,
    pub value: f64,
    /// Absolute slope estimates along each coordinate.
    pub slopes: Vec<f64>,
}

impl Partition {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Center-to-vertex distance, `||u - l|| / 2`.
    pub fn half_diagonal(&self) -> f64 {
        norm(&self.half_sides)
    }

    /// Full diagonal divided by the unit-cube diagonal; 1 for the root box.
    pub fn relative_diagonal(&self) -> f64 {
        let sq: f64 = self.half_sides.iter().map(|s| 4.0 * s * s).sum();
        (sq / self.dim() as f64).sqrt()
    }

    pub fn slope_norm(&self) -> f64 {
        norm(&self.slopes)
    }

    pub fn volume(&self) -> f64 {
        self.half_sides.iter().map(|s| 2.0 * s).product()
    }

    pub fn max_half_side(&self) -> f64 {
        self.half_sides.iter().copied().fold(0.0, f64::max)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.center.iter().zip(&self.half_sides))
            .all(|(x, (c, s))| (x - c).abs() <= s * (1.0 + 1e-9))
    }
}

/// Append-only store of every partition created during a run.
///
/// Each stored partition is a leaf: a divided box keeps its center and id and
/// only shrinks, so the ledger as a whole always tiles the unit hypercube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionLedger {
    dim: usize,
    partitions: Vec<Partition>,
}

impl PartitionLedger {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            partitions: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.partitions.iter()
    }

    pub fn get(&self, id: usize) -> Result<&Partition> {
        self.partitions.get(id).ok_or(Error::UnknownPartition(id))
    }

    pub fn get_mut(&mut self, id: usize) -> Result<&mut Partition> {
        self.partitions.get_mut(id).ok_or(Error::UnknownPartition(id))
    }

    /// Appends a partition and returns its id, which is always the current length.
    pub fn push(
        &mut self,
        center: Vec<f64>,
        half_sides: Vec<f64>,
        value: f64,
        slopes: Vec<f64>,
    ) -> usize {
        debug_assert_eq!(center.len(), self.dim);
        debug_assert_eq!(half_sides.len(), self.dim);
        debug_assert_eq!(slopes.len(), self.dim);
        let id = self.partitions.len();
        self.partitions.push(Partition {
            id,
            center,
            half_sides,
            value,
            slopes,
        });
        id
    }

    pub fn total_volume(&self) -> f64 {
        self.partitions.iter().map(Partition::volume).sum()
    }

    pub fn max_half_diagonal(&self) -> f64 {
        self.partitions
            .iter()
            .map(Partition::half_diagonal)
            .fold(0.0, f64::max)
    }

    /// Lowest-valued partition, lowest id on ties.
    pub fn best(&self) -> Option<&Partition> {
        self.partitions.iter().fold(None, |best, p| match best {
            Some(b) if b.value <= p.value => Some(b),
            _ => Some(p),
        })
    }
}

pub type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Evaluator for an objective over a box, with its own evaluation counter.
///
/// Cloning shares the evaluator but copies the counter, so every solver
/// instance counts only its own evaluations.
#[derive(Clone)]
pub struct ObjectiveHandle {
    evaluator: Arc<Evaluator>,
    domain: BoxDomain,
    eval_count: u64,
    known_optimum: Option<f64>,
    known_minimizer: Option<Vec<f64>>,
}

impl fmt::Debug for ObjectiveHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveHandle")
            .field("domain", &self.domain)
            .field("eval_count", &self.eval_count)
            .field("known_optimum", &self.known_optimum)
            .field("known_minimizer", &self.known_minimizer)
            .finish_non_exhaustive()
    }
}

impl ObjectiveHandle {
    pub fn new<F>(domain: BoxDomain, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_arc(domain, Arc::new(f))
    }

    pub fn from_arc(domain: BoxDomain, evaluator: Arc<Evaluator>) -> Self {
        Self {
            evaluator,
            domain,
            eval_count: 0,
            known_optimum: None,
            known_minimizer: None,
        }
    }

    pub fn with_known_optimum(mut self, value: f64) -> Self {
        self.known_optimum = Some(value);
        self
    }

    pub fn with_known_minimizer(mut self, x: Vec<f64>) -> Self {
        self.known_minimizer = Some(x);
        self
    }

    /// Copy of this handle with the counter reset.
    pub fn fresh(&self) -> Self {
        let mut h = self.clone();
        h.eval_count = 0;
        h
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn known_minimizer(&self) -> Option<&[f64]> {
        self.known_minimizer.as_deref()
    }

    pub fn evaluator(&self) -> &Arc<Evaluator> {
        &self.evaluator
    }

    /// Evaluates at a point in problem units. Non-finite results are errors
    /// but still count as an evaluation.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        self.eval_count += 1;
        let value = (self.evaluator)(x);
        if !value.is_finite() {
            return Err(Error::NonFiniteValue {
                value,
                eval_index: self.eval_count - 1,
            });
        }
        Ok(value)
    }

    /// Evaluates at a point of the unit hypercube.
    pub fn evaluate_unit(&mut self, q: &[f64]) -> Result<f64> {
        let x = self.domain.denormalize_point(q)?;
        self.evaluate(&x)
    }

    /// Evaluates without touching the counter; for reporting and oracles.
    pub fn peek(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }
}

/// Termination limits for a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_fun_evals: usize,
    pub rel_error_tol: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_fun_evals: 30_000,
            rel_error_tol: 1e-4,
            max_iter: 1_000_000,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_fun_evals == 0 || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "max_fun_evals and max_iter must be positive".into(),
            ));
        }
        if !(self.rel_error_tol > 0.0) {
            return Err(Error::InvalidConfig("rel_error_tol must be positive".into()));
        }
        Ok(())
    }
}
