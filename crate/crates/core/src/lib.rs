//! Deterministic partition-based global optimization.
//!
//! The search space is normalized to the unit hypercube and split into
//! hyperrectangles by DIRECT-style trisection. Each box carries an absolute
//! slope estimate per coordinate; HALO blends those slopes with the global
//! maximum into a local Lipschitz constant whose weight shrinks with the box,
//! and uses the resulting lower bounds to choose which boxes to refine next.
//! Small promising boxes hand off to a derivative-free local search.
//!
//! ```
//! use halo_core::{run, BoxDomain, ObjectiveHandle, SolverConfig, Status};
//!
//! let obj = ObjectiveHandle::new(BoxDomain::uniform(2, -2.0, 2.0).unwrap(), |x| {
//!     (x[0] - 0.3).powi(2) + (x[1] + 1.1).powi(2)
//! })
//! .with_known_optimum(0.0);
//! let out = run(&obj, &SolverConfig::default().with_budget(2000)).unwrap();
//! assert_eq!(out.trace.status, Status::Solved);
//! ```

pub mod bench;
pub mod error;
pub mod fmt;
pub mod lipschitz;
pub mod local;
pub mod manifest;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod select;
pub mod solver;
pub mod testbed;

pub use error::{Error, Result};
pub use model::{BoxDomain, ObjectiveHandle, Partition, PartitionLedger, StopRule};
pub use solver::{run, run_with, RunTrace, SolverConfig, SolverRun, Status, Variant};
