//! Schoen-style interpolating test functions on `[0,1]^N`.
//!
//! `f(x) = Σ_j f_j Π_{m≠j} ‖x−z_m‖^{α_m} / Σ_j Π_{m≠j} ‖x−z_m‖^{α_m}`,
//! evaluated in the equivalent inverse-distance form `Σ f_j w_j / Σ w_j` with
//! `w_j = ‖x−z_j‖^{-α_j}`, falling back to `f_j` exactly at an anchor.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{problem_rng, TestProblem, STREAM_SCHOEN};
use crate::error::{Error, Result};
use crate::model::{BoxDomain, ObjectiveHandle};

pub const MIN_STATIONARY: usize = 2;
pub const MAX_STATIONARY: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenSpec {
    pub seed: u64,
    pub dim: usize,
    pub anchors: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub exponents: Vec<f64>,
}

impl SchoenSpec {
    /// Draws anchors, values in `[-1,1)` and exponents in `[2,3)`.
    pub fn generate(seed: u64, dim: usize, count: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if !(MIN_STATIONARY..=MAX_STATIONARY).contains(&count) {
            return Err(Error::InvalidConfig(format!(
                "stationary point count {count} outside [{MIN_STATIONARY}, {MAX_STATIONARY}]"
            )));
        }
        let mut rng = problem_rng(seed, STREAM_SCHOEN);
        let anchors: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let values = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let exponents = (0..count).map(|_| rng.gen_range(2.0..3.0)).collect();
        Ok(Self {
            seed,
            dim,
            anchors,
            values,
            exponents,
        })
    }

    pub fn count(&self) -> usize {
        self.anchors.len()
    }

    /// Index of the anchor with the smallest value (lowest index on ties).
    pub fn global_index(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((z, &fj), &a) in self.anchors.iter().zip(&self.values).zip(&self.exponents) {
            let d2: f64 = z.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
            if d2 == 0.0 {
                return fj;
            }
            let w = d2.powf(-0.5 * a);
            if !w.is_finite() {
                return fj;
            }
            num += fj * w;
            den += w;
        }
        num / den
    }
}

pub fn schoen_from_spec(spec: SchoenSpec) -> TestProblem {
    let g = spec.global_index();
    let optimum = spec.values[g];
    let minimizer = spec.anchors[g].clone();
    let name = format!("schoen-n{}-s{}-seed{}", spec.dim, spec.count(), spec.seed);
    let domain = BoxDomain::unit(spec.dim).expect("dimension checked at generation");
    let spec = Arc::new(spec);
    let handle = ObjectiveHandle::new(domain, move |x: &[f64]| spec.evaluate(x));
    TestProblem::new(name, handle, optimum, minimizer)
}

pub fn schoen_generate(seed: u64, dim: usize, count: usize) -> Result<TestProblem> {
    Ok(schoen_from_spec(SchoenSpec::generate(seed, dim, count)?))
}
