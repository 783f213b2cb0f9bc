use halo_core::lipschitz::local_constants;
use halo_core::model::{ObjectiveHandle, PartitionLedger};
use halo_core::select::{select_halo, select_hlo};
use halo_core::solver::EvalSource;
use halo_core::testbed::{classical_problem, schoen_generate, shift_minimizer, TestProblem};
use halo_core::{run, SolverConfig, SolverRun, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARIANTS: [Variant; 3] = [Variant::Halo, Variant::Hlo, Variant::Direct];

fn problems() -> Vec<TestProblem> {
    vec![
        classical_problem("branin", 2).unwrap(),
        shift_minimizer(&classical_problem("rastrigin", 2).unwrap(), 4),
        classical_problem("hartmann3", 3).unwrap(),
        schoen_generate(21, 3, 25).unwrap(),
    ]
}

fn unsolvable(p: &TestProblem) -> ObjectiveHandle {
    ObjectiveHandle::from_arc(p.handle.domain().clone(), p.handle.evaluator().clone())
}

fn runs(budget: usize) -> Vec<(String, SolverRun)> {
    let mut out = Vec::new();
    for p in problems() {
        for v in VARIANTS {
            let cfg = SolverConfig::new(v).with_budget(budget);
            out.push((format!("{} {v}", p.name), run(&unsolvable(&p), &cfg).unwrap()));
        }
    }
    out
}

fn overlaps(ledger: &PartitionLedger, a: usize, b: usize) -> bool {
    let (p, q) = (&ledger.partitions()[a], &ledger.partitions()[b]);
    (0..ledger.dim()).all(|n| {
        let gap = (p.center[n] - q.center[n]).abs();
        gap < p.half_sides[n] + q.half_sides[n] - 1e-12
    })
}

#[test]
fn partitions_tile_the_unit_cube() {
    for (name, r) in runs(1500) {
        let l = &r.ledger;
        assert!((l.total_volume() - 1.0).abs() < 1e-12, "{name}: volume {}", l.total_volume());
        for p in l.iter() {
            for n in 0..l.dim() {
                assert!(p.center[n] - p.half_sides[n] >= -1e-12, "{name}: box {} leaves cube", p.id);
                assert!(p.center[n] + p.half_sides[n] <= 1.0 + 1e-12, "{name}: box {} leaves cube", p.id);
            }
        }
        for a in 0..l.len() {
            for b in a + 1..l.len() {
                assert!(!overlaps(l, a, b), "{name}: boxes {a} and {b} overlap");
            }
        }
    }
}

#[test]
fn every_partition_center_was_evaluated_once() {
    for (name, r) in runs(800) {
        let centers: Vec<&[f64]> = r
            .trace
            .evaluations
            .iter()
            .filter(|e| e.source != EvalSource::Local)
            .map(|e| e.point.as_slice())
            .collect();
        assert_eq!(centers.len(), r.ledger.len(), "{name}");
        for p in r.ledger.iter() {
            assert!(centers.contains(&p.center.as_slice()), "{name}: box {} never sampled", p.id);
        }
    }
}

#[test]
fn evaluation_accounting() {
    for (name, r) in runs(2500) {
        let t = &r.trace;
        let local: usize = t.local_searches.iter().map(|s| s.evaluations).sum();
        let tagged = t.evaluations.iter().filter(|e| e.source == EvalSource::Local).count();
        assert_eq!(local, tagged, "{name}");
        // root + 2|P| per division, which adds exactly 2|P| boxes
        assert_eq!(r.eval_count as usize, r.ledger.len() + local, "{name}");
        assert_eq!(r.eval_count, t.eval_count(), "{name}");
        assert!(r.eval_count <= 2500, "{name}");
        for (k, e) in t.evaluations.iter().enumerate() {
            assert_eq!(e.index, k as u64);
        }
        assert!(t.evaluations.windows(2).all(|w| w[1].best <= w[0].best), "{name}");
    }
}

#[test]
fn local_starts_respect_the_exclusion_radius() {
    for p in problems() {
        let cfg = SolverConfig::new(Variant::Halo).with_beta(1e-2).with_budget(4000);
        let r = run(&unsolvable(&p), &cfg).unwrap();
        let starts: Vec<&[f64]> = r
            .trace
            .local_searches
            .iter()
            .map(|s| r.ledger.partitions()[s.partition_id].center.as_slice())
            .collect();
        for (i, a) in starts.iter().enumerate() {
            for b in &starts[i + 1..] {
                let d: f64 = a.iter().zip(*b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                assert!(d > cfg.exclusion_radius, "{}: starts {d} apart", p.name);
            }
        }
        for s in &r.trace.local_searches {
            let part = &r.ledger.partitions()[s.partition_id];
            assert!(part.half_diagonal() <= cfg.beta, "{}: start box too large", p.name);
        }
    }
}

#[test]
fn zero_beta_never_searches_locally() {
    for p in problems() {
        let r = run(&p.handle, &SolverConfig::new(Variant::Halo).with_beta(0.0).with_budget(3000)).unwrap();
        assert!(r.trace.local_searches.is_empty(), "{}", p.name);
    }
}

#[test]
fn runs_are_deterministic() {
    let a = runs(1200);
    let b = runs(1200);
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x.trace, y.trace, "{name}");
        assert_eq!(x.ledger, y.ledger, "{name}");
    }
}

#[test]
fn largest_box_shrinks_monotonically() {
    let p = schoen_generate(5, 2, 30).unwrap();
    for v in VARIANTS {
        let mut last = f64::INFINITY;
        for budget in (25..=2000).step_by(25) {
            let cfg = SolverConfig::new(v).without_local_search().with_budget(budget);
            let r = run(&unsolvable(&p), &cfg).unwrap();
            let hd = r.ledger.max_half_diagonal();
            assert!(hd <= last, "{v} at {budget}: {hd} > {last}");
            last = hd;
        }
        assert!(last < 2f64.sqrt() / 2.0);
    }
}

#[test]
fn halo_matches_hlo_when_local_slopes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let dim = rng.gen_range(1..=4);
        let slopes: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mut ledger = PartitionLedger::new(dim);
        for _ in 0..rng.gen_range(1..=15) {
            let half_sides = (0..dim).map(|_| 0.5 / 3f64.powi(rng.gen_range(0..4))).collect();
            ledger.push(vec![0.5; dim], half_sides, rng.gen_range(-1.0..1.0), slopes.clone());
        }
        let constants = local_constants(&ledger);
        let global = slopes.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!(constants.iter().all(|&c| c == global));
        assert_eq!(select_halo(&ledger, &constants), select_hlo(&ledger, global));
    }
}
