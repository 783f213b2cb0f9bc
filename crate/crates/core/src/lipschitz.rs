//! Per-partition absolute slope vectors and local Lipschitz constant estimates.
//!
//! Slopes are refreshed only on the divided parent and its newborn children:
//! those are exactly the nearest axis neighbours created by a division, so no
//! neighbour search over the ledger is needed.

use crate::error::{Error, Result};
use crate::model::{Partition, PartitionLedger};
use crate::partition::{DivisionOrder, SamplePlan};

/// A single slope assignment made while updating after a division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeUpdate {
    pub partition_id: usize,
    pub coord: usize,
    pub slope: f64,
}

/// Refreshes slopes after `parent_id` was divided according to `plan`.
///
/// The parent gets a central difference on every sampled coordinate. Each
/// child already holds a copy of the parent's previous slopes and has the
/// coordinate it was sampled along replaced by a one-sided difference to the
/// parent center. `child_ids` are as returned by [`divide_partition`]: two per
/// coordinate of `order`.
///
/// [`divide_partition`]: crate::partition::divide_partition
pub fn update_slopes_on_division(
    ledger: &mut PartitionLedger,
    parent_id: usize,
    plan: &SamplePlan,
    order: &DivisionOrder,
    child_ids: &[usize],
) -> Result<Vec<SlopeUpdate>> {
    if child_ids.len() != 2 * order.0.len() {
        return Err(Error::InvalidConfig(format!(
            "{} children for {} divided coordinates",
            child_ids.len(),
            order.0.len()
        )));
    }
    let parent_value = ledger.get(parent_id)?.value;
    let delta = plan.delta;
    let mut updates = Vec::with_capacity(plan.coords.len() + child_ids.len());

    for (pair, &coord) in child_ids.chunks(2).zip(&order.0) {
        for &child in pair {
            let slope = (ledger.get(child)?.value - parent_value).abs() / delta;
            ledger.get_mut(child)?.slopes[coord] = slope;
            updates.push(SlopeUpdate {
                partition_id: child,
                coord,
                slope,
            });
        }
    }

    let parent = ledger.get_mut(parent_id)?;
    for (&p, &(f_plus, f_minus)) in plan.coords.iter().zip(&plan.values) {
        let slope = (f_plus - f_minus).abs() / (2.0 * delta);
        parent.slopes[p] = slope;
        updates.push(SlopeUpdate {
            partition_id: parent_id,
            coord: p,
            slope,
        });
    }
    Ok(updates)
}

/// Largest slope-vector norm over the whole ledger.
pub fn global_slope_max(ledger: &PartitionLedger) -> f64 {
    ledger
        .iter()
        .map(Partition::slope_norm)
        .fold(0.0, f64::max)
}

/// Convex blend `alpha * global + (1 - alpha) * local` with `alpha` the
/// partition diagonal relative to the unit-cube diagonal.
pub fn blend(alpha: f64, global: f64, local: f64) -> f64 {
    if global == local {
        return global;
    }
    let value = alpha * global + (1.0 - alpha) * local;
    value.clamp(global.min(local), global.max(local))
}

pub fn blend_local_constant(part: &Partition, global: f64) -> f64 {
    blend(part.relative_diagonal(), global, part.slope_norm())
}

/// Blended constants for every partition, indexed by id.
pub fn local_constants(ledger: &PartitionLedger) -> Vec<f64> {
    let global = global_slope_max(ledger);
    ledger
        .iter()
        .map(|p| blend_local_constant(p, global))
        .collect()
}

pub fn lower_bound(part: &Partition, constant: f64) -> f64 {
    part.value - constant * part.half_diagonal()
}
