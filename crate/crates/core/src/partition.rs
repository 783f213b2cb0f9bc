//! Sampling along the longest sides of a box and DIRECT-style trisection.

use crate::error::{Error, Result};
use crate::model::{same_size, ObjectiveHandle, Partition, PartitionLedger};

/// Points sampled around one parent center, before the parent is divided.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub parent_id: usize,
    /// Offset from the parent center, two thirds of the longest half-side.
    pub delta: f64,
    /// Coordinates of the longest sides, ascending.
    pub coords: Vec<usize>,
    /// `(center + delta*e_p, center - delta*e_p)` for each entry of `coords`.
    pub point_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// Objective values at `point_pairs`.
    pub values: Vec<(f64, f64)>,
}

impl SamplePlan {
    pub fn evaluations(&self) -> usize {
        2 * self.coords.len()
    }
}

/// Order in which the sampled coordinates are cut: ascending by the smaller of
/// the two new values, lower coordinate first on ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionOrder(pub Vec<usize>);

/// Creates the ledger holding the single root box, evaluating its center.
pub fn init_root_with<E, F>(dim: usize, mut eval: F) -> Result<PartitionLedger, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let center = vec![0.5; dim];
    let value = eval(&center)?;
    let mut ledger = PartitionLedger::new(dim);
    ledger.push(center, vec![0.5; dim], value, vec![0.0; dim]);
    Ok(ledger)
}

pub fn init_root(obj: &mut ObjectiveHandle) -> Result<PartitionLedger> {
    let dim = obj.dim();
    init_root_with(dim, |q| obj.evaluate_unit(q))
}

/// Coordinates attaining the largest half-side.
pub fn longest_sides(part: &Partition) -> Vec<usize> {
    let max = part.max_half_side();
    part.half_sides
        .iter()
        .enumerate()
        .filter(|(_, &s)| same_size(s, max))
        .map(|(n, _)| n)
        .collect()
}

/// Smallest trisection step (normalized units) a partition may be sampled
/// with: about 21 successive cuts of one side. Smaller boxes are retired.
pub const MIN_TRISECTION_STEP: f64 = 1e-10;

/// `true` while the trisection step of `part` is at least [`MIN_TRISECTION_STEP`].
pub fn is_divisible(part: &Partition) -> bool {
    2.0 / 3.0 * part.max_half_side() >= MIN_TRISECTION_STEP
}

/// Number of evaluations sampling `part` will consume.
pub fn sample_cost(part: &Partition) -> usize {
    2 * longest_sides(part).len()
}

/// Evaluates the `2|P|` points around the center of partition `id`.
///
/// Fails with [`Error::BudgetExhausted`] before evaluating anything when the
/// plan does not fit in `budget_left`.
pub fn sample_partition<E, F>(
    ledger: &PartitionLedger,
    id: usize,
    budget_left: usize,
    mut eval: F,
) -> Result<SamplePlan, E>
where
    E: From<Error>,
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let parent = ledger.get(id)?;
    let coords = longest_sides(parent);
    let needed = 2 * coords.len();
    if needed > budget_left {
        return Err(Error::BudgetExhausted {
            needed,
            remaining: budget_left,
        }
        .into());
    }
    let delta = 2.0 / 3.0 * parent.max_half_side();
    let mut point_pairs = Vec::with_capacity(coords.len());
    let mut values = Vec::with_capacity(coords.len());
    for &p in &coords {
        let mut plus = parent.center.clone();
        plus[p] += delta;
        let mut minus = parent.center.clone();
        minus[p] -= delta;
        let f_plus = eval(&plus)?;
        let f_minus = eval(&minus)?;
        point_pairs.push((plus, minus));
        values.push((f_plus, f_minus));
    }
    Ok(SamplePlan {
        parent_id: id,
        delta,
        coords,
        point_pairs,
        values,
    })
}

pub fn division_order(plan: &SamplePlan) -> DivisionOrder {
    let mut keyed: Vec<(f64, usize)> = plan
        .coords
        .iter()
        .zip(&plan.values)
        .map(|(&p, &(a, b))| (a.min(b), p))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    DivisionOrder(keyed.into_iter().map(|(_, p)| p).collect())
}

/// Trisects partition `id` along the sampled coordinates in `order`.
///
/// At each step the box holding the parent center is cut into thirds; the two
/// outer thirds become new partitions centered on the sampled points. Children
/// start with a copy of the parent's slopes. Returns the new ids, two per
/// coordinate in division order, `+delta` child first.
pub fn divide_partition(
    ledger: &mut PartitionLedger,
    id: usize,
    plan: &SamplePlan,
    order: &DivisionOrder,
) -> Result<Vec<usize>> {
    if plan.parent_id != id {
        return Err(Error::InvalidConfig(format!(
            "plan for partition {} applied to {id}",
            plan.parent_id
        )));
    }
    let mut sorted = order.0.clone();
    sorted.sort_unstable();
    if sorted != plan.coords {
        return Err(Error::InvalidConfig(
            "division order is not a permutation of the sampled coordinates".into(),
        ));
    }
    let new_side = plan.delta / 2.0;
    let mut children = Vec::with_capacity(2 * plan.coords.len());
    for &p in &order.0 {
        let k = plan
            .coords
            .iter()
            .position(|&c| c == p)
            .expect("checked permutation");
        let parent = ledger.get_mut(id)?;
        parent.half_sides[p] = new_side;
        let half_sides = parent.half_sides.clone();
        let slopes = parent.slopes.clone();
        let (plus, minus) = &plan.point_pairs[k];
        let (f_plus, f_minus) = plan.values[k];
        children.push(ledger.push(plus.clone(), half_sides.clone(), f_plus, slopes.clone()));
        children.push(ledger.push(minus.clone(), half_sides, f_minus, slopes));
    }
    Ok(children)
}
