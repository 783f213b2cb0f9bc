//! Reproducible benchmark objectives.
//!
//! Randomness comes from ChaCha8 seeded with the problem seed; independent
//! draws for the same seed use separate ChaCha streams (see [`problem_rng`]),
//! so generated problems are identical on every platform.

mod classical;
mod schoen;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::ObjectiveHandle;

pub use classical::{
    classical_names, classical_problem, classical_problem_opt, classical_suite, CLASSICAL_DIMS,
};
pub use schoen::{schoen_from_spec, schoen_generate, SchoenSpec, MAX_STATIONARY, MIN_STATIONARY};

/// Stream used for Schoen anchors, exponents and values.
pub const STREAM_SCHOEN: u64 = 0;
/// Stream used for minimizer shifts.
pub const STREAM_SHIFT: u64 = 1;
/// Stream used by manifest generation to draw per-problem parameters.
pub const STREAM_MANIFEST: u64 = 2;

/// ChaCha8 generator for `seed` on the given stream.
pub fn problem_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A benchmark objective with its known global optimum.
#[derive(Clone)]
pub struct TestProblem {
    pub name: String,
    pub dim: usize,
    pub handle: ObjectiveHandle,
    pub known_optimum: f64,
    /// Known global minimizer in problem units.
    pub known_minimizer: Vec<f64>,
    pub shift: Option<Vec<f64>>,
}

impl fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("known_optimum", &self.known_optimum)
            .field("known_minimizer", &self.known_minimizer)
            .field("shift", &self.shift)
            .finish()
    }
}

impl TestProblem {
    pub(crate) fn new(
        name: impl Into<String>,
        handle: ObjectiveHandle,
        known_optimum: f64,
        known_minimizer: Vec<f64>,
    ) -> Self {
        let handle = handle
            .with_known_optimum(known_optimum)
            .with_known_minimizer(known_minimizer.clone());
        Self {
            name: name.into(),
            dim: handle.dim(),
            handle,
            known_optimum,
            known_minimizer,
            shift: None,
        }
    }

    /// Value at the known minimizer, without counting an evaluation.
    pub fn value_at_minimizer(&self) -> f64 {
        self.handle.peek(&self.known_minimizer)
    }

    /// Same problem with the minimizer translated by `delta` (problem units):
    /// the objective becomes `x -> f(x - delta)`.
    pub fn shifted_by(&self, delta: Vec<f64>) -> Self {
        assert_eq!(delta.len(), self.dim);
        let inner = self.handle.evaluator().clone();
        let d = delta.clone();
        let evaluator: Arc<crate::model::Evaluator> = Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - b).collect();
            inner(&y)
        });
        let minimizer: Vec<f64> = self
            .known_minimizer
            .iter()
            .zip(&delta)
            .map(|(a, b)| a + b)
            .collect();
        let handle = ObjectiveHandle::from_arc(self.handle.domain().clone(), evaluator);
        let mut p = TestProblem::new(self.name.clone(), handle, self.known_optimum, minimizer);
        let total = match &self.shift {
            Some(prev) => prev.iter().zip(&delta).map(|(a, b)| a + b).collect(),
            None => delta,
        };
        p.shift = Some(total);
        p
    }
}

/// Randomly translates the minimizer, keeping it at least a quarter of the
/// domain width away from every face.
pub fn shift_minimizer(problem: &TestProblem, seed: u64) -> TestProblem {
    let mut rng = problem_rng(seed, STREAM_SHIFT);
    let domain = problem.handle.domain();
    let delta: Vec<f64> = problem
        .known_minimizer
        .iter()
        .zip(domain.lower().iter().zip(domain.upper()))
        .map(|(&m, (&l, &u))| {
            let w = u - l;
            let lo = l + 0.25 * w;
            let hi = u - 0.25 * w;
            rng.gen_range(lo..hi) - m
        })
        .collect();
    problem.shifted_by(delta)
}
