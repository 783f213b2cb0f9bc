//! Choosing which partitions to sample next.
//!
//! HALO and HLO pick at most three boxes per iteration: the lowest lower bound,
//! the lowest value, and the best lower bound among the largest boxes. DIRECT
//! picks every potentially optimal box on the lower-right convex hull of
//! `(half_diagonal, value)`. Boxes too small to trisect in floating point
//! are never selected.

use serde::{Deserialize, Serialize};

use crate::lipschitz::lower_bound;
use crate::model::{same_size, PartitionLedger};
use crate::partition::is_divisible;

/// Which selection criteria a partition satisfied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reasons {
    /// Lowest lower bound over the whole ledger.
    pub lowest_bound: bool,
    /// Lowest objective value.
    pub min_value: bool,
    /// Best pick among the boxes of maximal half-diagonal.
    pub largest_box: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selected {
    pub id: usize,
    pub reasons: Reasons,
}

impl Selected {
    /// Only the lowest-bound and lowest-value picks may start a local search.
    pub fn local_candidate(&self) -> bool {
        self.reasons.lowest_bound || self.reasons.min_value
    }
}

/// Deduplicated selection in processing order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub entries: Vec<Selected>,
}

impl SelectionOutcome {
    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn mark(&mut self, id: usize, set: impl Fn(&mut Reasons)) {
        match self.entries.iter_mut().find(|e| e.id == id) {
            Some(e) => set(&mut e.reasons),
            None => {
                let mut reasons = Reasons::default();
                set(&mut reasons);
                self.entries.push(Selected { id, reasons });
            }
        }
    }
}

/// Inner ranking used for the largest-box criterion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LargestBoxRule {
    /// Lowest lower bound among the largest boxes.
    #[default]
    LowerBound,
    /// Lowest local constant among the largest boxes.
    LocalConstant,
}

/// First index attaining the minimum of `key` over `ids`.
fn argmin_by(ids: impl Iterator<Item = usize>, key: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in ids {
        let k = key(i);
        match best {
            Some((_, b)) if !(k < b) => {}
            _ => best = Some((i, k)),
        }
    }
    best.map(|(i, _)| i)
}

/// Ids of partitions that can still be trisected.
pub fn divisible_ids(ledger: &PartitionLedger) -> Vec<usize> {
    ledger.iter().filter(|p| is_divisible(p)).map(|p| p.id).collect()
}

/// Ids among `ids` whose half-diagonal equals their maximum.
fn largest_among(ledger: &PartitionLedger, ids: &[usize]) -> Vec<usize> {
    let parts = ledger.partitions();
    let max = ids
        .iter()
        .map(|&i| parts[i].half_diagonal())
        .fold(0.0, f64::max);
    ids.iter()
        .copied()
        .filter(|&i| same_size(parts[i].half_diagonal(), max))
        .collect()
}

/// Ids of the divisible partitions with the largest half-diagonal.
pub fn largest_boxes(ledger: &PartitionLedger) -> Vec<usize> {
    largest_among(ledger, &divisible_ids(ledger))
}

/// Selection from per-partition constants `constants[id]`.
pub fn select_with_constants(
    ledger: &PartitionLedger,
    constants: &[f64],
    rule: LargestBoxRule,
) -> SelectionOutcome {
    assert_eq!(constants.len(), ledger.len(), "one constant per partition");
    let mut out = SelectionOutcome::default();
    let live = divisible_ids(ledger);
    if live.is_empty() {
        return out;
    }
    let parts = ledger.partitions();
    let bounds: Vec<f64> = parts
        .iter()
        .zip(constants)
        .map(|(p, &c)| lower_bound(p, c))
        .collect();

    let by_bound = argmin_by(live.iter().copied(), |i| bounds[i]).expect("nonempty");
    let by_value = argmin_by(live.iter().copied(), |i| parts[i].value).expect("nonempty");
    let largest = largest_among(ledger, &live);
    let by_size = match rule {
        LargestBoxRule::LowerBound => argmin_by(largest.into_iter(), |i| bounds[i]),
        LargestBoxRule::LocalConstant => argmin_by(largest.into_iter(), |i| constants[i]),
    }
    .expect("nonempty");

    out.mark(by_bound, |r| r.lowest_bound = true);
    out.mark(by_value, |r| r.min_value = true);
    out.mark(by_size, |r| r.largest_box = true);
    out
}

/// HALO selection with blended local constants.
pub fn select_halo(ledger: &PartitionLedger, constants: &[f64]) -> SelectionOutcome {
    select_with_constants(ledger, constants, LargestBoxRule::LowerBound)
}

/// HLO selection: every partition uses the same global constant.
pub fn select_hlo(ledger: &PartitionLedger, global: f64) -> SelectionOutcome {
    select_with_constants(ledger, &vec![global; ledger.len()], LargestBoxRule::LowerBound)
}

/// Absolute epsilon for the potential-optimality test.
pub fn direct_epsilon(epsilon_rel: f64, f_min: f64) -> f64 {
    if epsilon_rel > 0.0 && f_min == 0.0 {
        1e-8
    } else {
        epsilon_rel * f_min.abs()
    }
}

/// DIRECT's potentially optimal partitions, in ascending id order.
///
/// A partition qualifies if some rate `K > 0` makes its bound
/// `value - K * half_diagonal` the lowest in the ledger while improving on
/// `f_min` by at least the epsilon from [`direct_epsilon`].
pub fn select_potentially_optimal(ledger: &PartitionLedger, epsilon_rel: f64) -> Vec<usize> {
    let mut order = divisible_ids(ledger);
    if order.is_empty() {
        return Vec::new();
    }
    let parts = ledger.partitions();
    let diag: Vec<f64> = parts.iter().map(|p| p.half_diagonal()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));

    // One representative per size class: its size, min value and members at that value.
    struct Class {
        size: f64,
        value: f64,
        members: Vec<usize>,
    }
    let mut classes: Vec<Class> = Vec::new();
    for id in order {
        let v = parts[id].value;
        match classes.last_mut() {
            Some(c) if same_size(c.size, diag[id]) => {
                if v < c.value {
                    c.value = v;
                    c.members.clear();
                    c.members.push(id);
                } else if v == c.value {
                    c.members.push(id);
                }
            }
            _ => classes.push(Class {
                size: diag[id],
                value: v,
                members: vec![id],
            }),
        }
    }

    let f_min = classes.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let eps = direct_epsilon(epsilon_rel, f_min);
    let start = classes
        .iter()
        .rposition(|c| c.value == f_min)
        .expect("some class holds f_min");

    let slope = |a: &Class, b: &Class| (b.value - a.value) / (b.size - a.size);
    let mut hull: Vec<usize> = Vec::new();
    for k in start..classes.len() {
        while hull.len() >= 2 {
            let a = &classes[hull[hull.len() - 2]];
            let b = &classes[hull[hull.len() - 1]];
            // drop b when it lies strictly above the chord a -> k
            if slope(a, &classes[k]) < slope(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }

    let mut chosen = Vec::new();
    for (t, &k) in hull.iter().enumerate() {
        let c = &classes[k];
        let k_hi = hull
            .get(t + 1)
            .map(|&n| slope(c, &classes[n]))
            .unwrap_or(f64::INFINITY);
        let passes = k_hi.is_infinite() || c.value - k_hi * c.size <= f_min - eps;
        if passes {
            chosen.extend_from_slice(&c.members);
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger_of(items: &[(f64, f64)]) -> PartitionLedger {
        // (half_diagonal, value) in 1-D boxes
        let mut l = PartitionLedger::new(1);
        for &(d, v) in items {
            l.push(vec![0.5], vec![d], v, vec![0.0]);
        }
        l
    }

    #[test]
    fn single_root() {
        let l = ledger_of(&[(0.5, 3.0)]);
        let out = select_halo(&l, &[0.0]);
        assert_eq!(out.ids(), vec![0]);
        let r = out.entries[0].reasons;
        assert!(r.lowest_bound && r.min_value && r.largest_box);
        assert_eq!(select_hlo(&l, 1.0).ids(), vec![0]);
        assert_eq!(select_potentially_optimal(&l, 1e-4), vec![0]);
    }

    #[test]
    fn equal_sizes_collapse_to_one() {
        let l = ledger_of(&[(0.3, 1.0), (0.3, 2.0)]);
        let out = select_halo(&l, &[1.0, 1.0]);
        assert_eq!(out.ids(), vec![0]);
        assert_eq!(select_potentially_optimal(&l, 0.0), vec![0]);
    }

    #[test]
    fn three_partition_example() {
        // A(0.9, 0.1), B(1.0, 0.5), C(0.5, 0.1) with unit constants
        let l = ledger_of(&[(0.1, 0.9), (0.5, 1.0), (0.1, 0.5)]);
        let out = select_halo(&l, &[1.0, 1.0, 1.0]);
        assert_eq!(out.ids(), vec![2, 1]);
        let c = out.entries[0].reasons;
        assert!(c.lowest_bound && c.min_value && !c.largest_box);
        assert!(out.entries[1].reasons.largest_box);
        assert!(!out.entries[1].local_candidate());
        assert_eq!(select_hlo(&l, 1.0), out);
    }

    #[test]
    fn argmin_ties_take_lowest_id() {
        let l = ledger_of(&[(0.2, 1.0), (0.2, 1.0), (0.2, 1.0)]);
        assert_eq!(select_halo(&l, &[0.0; 3]).ids(), vec![0]);
        // equal size and value: every tied box is potentially optimal
        assert_eq!(select_potentially_optimal(&l, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn local_constant_rule_differs() {
        // both boxes are largest; bound favours 0, constant favours 1
        let l = ledger_of(&[(0.5, 0.0), (0.5, 1.0)]);
        let out = select_with_constants(&l, &[1.0, 0.1], LargestBoxRule::LowerBound);
        assert!(out.entries.iter().any(|e| e.id == 0 && e.reasons.largest_box));
        let out = select_with_constants(&l, &[1.0, 0.1], LargestBoxRule::LocalConstant);
        assert!(out.entries.iter().any(|e| e.id == 1 && e.reasons.largest_box));
    }

    #[test]
    fn hull_example() {
        // (0.1, 1.0), (0.2, 0.9), (0.3, 1.5): the f_min box and the largest box
        let l = ledger_of(&[(0.1, 1.0), (0.2, 0.9), (0.3, 1.5)]);
        assert_eq!(select_potentially_optimal(&l, 0.0), vec![1, 2]);
    }

    #[test]
    fn epsilon_filters_min_box() {
        // f_min box at (0.2, 1.0); next hull box (0.5, 1.0003) gives K_hi = 0.001.
        // With eps = 1e-4 the min box needs K >= 5e-4: passes. With eps = 1e-3 it fails.
        let l = ledger_of(&[(0.2, 1.0), (0.5, 1.0003)]);
        assert_eq!(select_potentially_optimal(&l, 1e-4), vec![0, 1]);
        assert_eq!(select_potentially_optimal(&l, 1e-3), vec![1]);
    }

    #[test]
    fn epsilon_floor_at_zero_fmin() {
        assert_eq!(direct_epsilon(1e-4, 0.0), 1e-8);
        assert_eq!(direct_epsilon(0.0, 0.0), 0.0);
        assert_eq!(direct_epsilon(1e-4, -2.0), 2e-4);
    }

    #[test]
    fn collinear_middle_box_is_kept() {
        let l = ledger_of(&[(0.1, 0.0), (0.2, 1.0), (0.3, 2.0)]);
        assert_eq!(select_potentially_optimal(&l, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn smaller_boxes_than_fmin_box_never_qualify() {
        let l = ledger_of(&[(0.05, 0.5), (0.3, 0.0), (0.4, 2.0)]);
        assert_eq!(select_potentially_optimal(&l, 0.0), vec![1, 2]);
    }
}
