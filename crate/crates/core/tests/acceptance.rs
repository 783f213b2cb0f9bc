//! End-to-end acceptance checks. Runs without the libtest harness so that every
//! criterion prints its verdict line whether it passes or not.

use std::path::Path;
use std::time::Instant;

use halo_core::bench::{run_benchmark, BenchmarkReport};
use halo_core::lipschitz::{blend, global_slope_max, local_constants, update_slopes_on_division};
use halo_core::manifest::{generate_schoen, Manifest};
use halo_core::metrics::{auoc, auoc_of, oc_grid, operational_characteristic, variable_importance, OcCurve, RunRecord};
use halo_core::model::{BoxDomain, ObjectiveHandle, Partition, PartitionLedger};
use halo_core::partition::{divide_partition, division_order, init_root_with, sample_partition};
use halo_core::select::{direct_epsilon, select_halo, select_potentially_optimal};
use halo_core::testbed::{classical_problem, shift_minimizer};
use halo_core::{run, Error, SolverConfig, Status, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> Manifest {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    Manifest::read(path).expect("frozen manifest")
}

fn schoen30() -> Manifest {
    data("schoen30.jsonl")
}

fn solved_count(r: &BenchmarkReport) -> usize {
    r.rows.iter().filter(|r| r.solved).count()
}

/// Same objective with no known optimum, so runs never stop early as solved.
fn without_optimum(obj: &ObjectiveHandle) -> ObjectiveHandle {
    ObjectiveHandle::from_arc(obj.domain().clone(), obj.evaluator().clone())
}

fn criterion_1() -> Verdict {
    let sixth = 1.0 / 6.0;
    let problems = vec![
        without_optimum(&classical_problem("sphere", 2).unwrap().handle),
        without_optimum(&classical_problem("branin", 2).unwrap().handle),
        without_optimum(&classical_problem("rosenbrock", 2).unwrap().handle),
        without_optimum(&halo_core::testbed::schoen_generate(3, 2, 40).unwrap().handle),
        ObjectiveHandle::new(BoxDomain::unit(2).unwrap(), |x: &[f64]| x[1] - 3.0 * x[0]),
    ];
    for (k, obj) in problems.iter().enumerate() {
        for variant in [Variant::Halo, Variant::Hlo, Variant::Direct] {
            let cfg = SolverConfig::new(variant).with_budget(5);
            let out = run(obj, &cfg).unwrap();
            let mut pattern: Vec<(f64, f64)> = out
                .ledger
                .iter()
                .map(|p| {
                    let (a, b) = (p.half_sides[0], p.half_sides[1]);
                    (a.min(b), a.max(b))
                })
                .collect();
            pattern.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let expected = vec![
                (sixth, sixth),
                (sixth, sixth),
                (sixth, sixth),
                (sixth, 0.5),
                (sixth, 0.5),
            ];
            if out.eval_count != 5 || out.ledger.len() != 5 || pattern != expected {
                return verdict(
                    false,
                    format!("problem {k} {variant}: {} evals, pattern {pattern:?}", out.eval_count),
                );
            }
        }
    }
    verdict(true, "5 objectives x 3 variants: 5 evals, 5 boxes, half-sides 3x(1/6,1/6) + 2x(1/6,1/2)")
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_slope = 0.0f64;
    let mut worst_norm = 0.0f64;
    for _ in 0..20 {
        let dim = rng.gen_range(1..=5);
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let f = |x: &[f64]| -> f64 { x.iter().zip(&a).map(|(x, a)| x * a).sum() };
        let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut ledger = init_root_with::<Error, _>(dim, |x| Ok(f(x))).unwrap();
        let mut touched = vec![false; dim];
        for _ in 0..60 {
            // Deeper boxes lose the 1e-12 target to cancellation in f(c+d) - f(c-d).
            let open: Vec<usize> = ledger
                .iter()
                .filter(|p| p.max_half_side() >= 0.5 / 27.0)
                .map(|p| p.id)
                .collect();
            if open.is_empty() {
                break;
            }
            let id = open[rng.gen_range(0..open.len())];
            let plan = sample_partition::<Error, _>(&ledger, id, usize::MAX, |x| Ok(f(x))).unwrap();
            let order = division_order(&plan);
            let children = divide_partition(&mut ledger, id, &plan, &order).unwrap();
            update_slopes_on_division(&mut ledger, id, &plan, &order, &children).unwrap();
            let parent = ledger.get(id).unwrap();
            for &p in &plan.coords {
                touched[p] = true;
                worst_slope = worst_slope.max((parent.slopes[p] - a[p].abs()).abs());
            }
            if touched.iter().all(|&t| t) {
                worst_norm = worst_norm.max((global_slope_max(&ledger) - norm_a).abs());
            }
        }
        if !touched.iter().all(|&t| t) {
            return verdict(false, "some coordinate never divided");
        }
    }
    verdict(
        worst_slope <= 1e-12 && worst_norm <= 1e-9,
        format!("max slope error {worst_slope:.3e} (tol 1e-12), max |G - |a|| {worst_norm:.3e} (tol 1e-9)"),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut alpha_one = 0;
    for k in 0..10_000 {
        let alpha: f64 = match k % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=1.0),
        };
        let scale = 10f64.powi(rng.gen_range(-6..6));
        let global = rng.gen_range(0.0..1.0) * scale;
        let local = if k % 7 == 0 { global } else { rng.gen_range(0.0..1.0) * scale };
        let out = blend(alpha, global, local);
        if !(out >= global.min(local) && out <= global.max(local)) {
            bad += 1;
        }
        if alpha == 1.0 && out != global {
            alpha_one += 1;
        }
    }
    verdict(
        bad == 0 && alpha_one == 0,
        format!("10000 triples: {bad} outside bracket, {alpha_one} alpha=1 mismatches"),
    )
}

/// Random ledger with sizes on the trisection lattice, so equal sizes and tied
/// values are common.
fn random_ledger(rng: &mut ChaCha8Rng) -> PartitionLedger {
    let dim = rng.gen_range(1..=3);
    let count = rng.gen_range(1..=20);
    let mut ledger = PartitionLedger::new(dim);
    let mut values: Vec<f64> = Vec::new();
    for _ in 0..count {
        let half_sides: Vec<f64> = (0..dim)
            .map(|_| 0.5 / 3f64.powi(rng.gen_range(0..4)))
            .collect();
        let value = if !values.is_empty() && rng.gen_bool(0.2) {
            values[rng.gen_range(0..values.len())]
        } else if rng.gen_bool(0.1) {
            0.0
        } else {
            rng.gen_range(-2.0..2.0)
        };
        values.push(value);
        let slopes: Vec<f64> = (0..dim)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..5.0) })
            .collect();
        ledger.push(vec![0.5; dim], half_sides, value, slopes);
    }
    ledger
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Checks one HALO selection against a direct evaluation of the three criteria.
fn halo_discrepancy(ledger: &PartitionLedger) -> Option<String> {
    let parts = ledger.partitions();
    let n = ledger.dim() as f64;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let global = parts.iter().map(|p| norm(&p.slopes)).fold(0.0, f64::max);
    let constant = |p: &Partition| {
        let alpha = 2.0 * norm(&p.half_sides) / n.sqrt();
        alpha * global + (1.0 - alpha) * norm(&p.slopes)
    };
    let diag = |p: &Partition| norm(&p.half_sides);
    let bound = |p: &Partition| p.value - constant(p) * diag(p);

    let constants = local_constants(ledger);
    for (p, &c) in parts.iter().zip(&constants) {
        if !near(c, constant(p)) {
            return Some(format!("constant of {} is {c}, expected {}", p.id, constant(p)));
        }
    }
    let out = select_halo(ledger, &constants);

    let min_bound = parts.iter().map(bound).fold(f64::INFINITY, f64::min);
    let min_value = parts.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let max_diag = parts.iter().map(diag).fold(0.0, f64::max);
    let largest: Vec<&Partition> = parts.iter().filter(|p| near(diag(p), max_diag)).collect();
    let min_bound_largest = largest.iter().map(|p| bound(p)).fold(f64::INFINITY, f64::min);

    let mut seen = [0usize; 3];
    for e in &out.entries {
        let p = &parts[e.id];
        let r = e.reasons;
        if r.lowest_bound {
            seen[0] += 1;
            if !near(bound(p), min_bound) {
                return Some(format!("criterion 1 picked {} with bound {}", e.id, bound(p)));
            }
        }
        if r.min_value {
            seen[1] += 1;
            if p.value != min_value {
                return Some(format!("criterion 2 picked {} with value {}", e.id, p.value));
            }
        }
        if r.largest_box {
            seen[2] += 1;
            if !near(diag(p), max_diag) || !near(bound(p), min_bound_largest) {
                return Some(format!("criterion 3 picked {}", e.id));
            }
        }
        if !(r.lowest_bound || r.min_value || r.largest_box) {
            return Some(format!("{} selected with no reason", e.id));
        }
    }
    let mut ids = out.ids();
    ids.sort_unstable();
    ids.dedup();
    if seen != [1, 1, 1] || ids.len() != out.len() {
        return Some(format!("reason counts {seen:?}, entries {:?}", out.ids()));
    }
    None
}

/// Potential optimality by trying a grid of rates plus every critical rate.
fn brute_force_po(ledger: &PartitionLedger, epsilon_rel: f64) -> Vec<usize> {
    let parts = ledger.partitions();
    let d: Vec<f64> = parts.iter().map(|p| p.half_diagonal()).collect();
    let v: Vec<f64> = parts.iter().map(|p| p.value).collect();
    let f_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let eps = direct_epsilon(epsilon_rel, f_min);

    let mut rates: Vec<f64> = (0..10_000)
        .map(|k| 10f64.powf(-8.0 + 16.0 * k as f64 / 9_999.0))
        .collect();
    for i in 0..parts.len() {
        for j in 0..parts.len() {
            if d[i] != d[j] {
                let k = (v[i] - v[j]) / (d[i] - d[j]);
                if k > 0.0 {
                    rates.push(k);
                }
            }
        }
        let k = (v[i] - f_min + eps) / d[i];
        if k > 0.0 {
            rates.push(k);
        }
    }

    let tol = |x: f64| 1e-12 * (1.0 + x.abs());
    (0..parts.len())
        .filter(|&j| {
            rates.iter().any(|&k| {
                let lb = v[j] - k * d[j];
                lb <= f_min - eps + tol(lb)
                    && (0..parts.len()).all(|i| lb <= v[i] - k * d[i] + tol(lb))
            })
        })
        .collect()
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut halo_bad = Vec::new();
    let mut po_bad = Vec::new();
    for case in 0..1000 {
        let ledger = random_ledger(&mut rng);
        if let Some(msg) = halo_discrepancy(&ledger) {
            halo_bad.push(format!("case {case}: {msg}"));
        }
        let eps = [0.0, 1e-4, 1e-2][case % 3];
        let got = select_potentially_optimal(&ledger, eps);
        let want = brute_force_po(&ledger, eps);
        if got != want {
            po_bad.push(format!("case {case}: hull {got:?} vs grid {want:?}"));
        }
    }
    let detail = format!(
        "1000 ledgers: {} select_halo discrepancies, {} potential-optimality discrepancies{}",
        halo_bad.len(),
        po_bad.len(),
        halo_bad
            .first()
            .or(po_bad.first())
            .map(|m| format!(" (first: {m})"))
            .unwrap_or_default()
    );
    verdict(halo_bad.is_empty() && po_bad.is_empty(), detail)
}

fn criterion_5() -> Verdict {
    let obj = without_optimum(&classical_problem("rastrigin", 2).unwrap().handle);
    let cfg = SolverConfig::new(Variant::Halo)
        .without_local_search()
        .with_budget(3000);
    let out = run(&obj, &cfg).unwrap();
    let mut cells = [[false; 8]; 8];
    for e in &out.trace.evaluations {
        let i = ((e.point[0] * 8.0) as usize).min(7);
        let j = ((e.point[1] * 8.0) as usize).min(7);
        cells[i][j] = true;
    }
    let covered = cells.iter().flatten().filter(|&&c| c).count();
    let initial = 2f64.sqrt() / 2.0;
    let last = out.ledger.max_half_diagonal();
    verdict(
        out.eval_count <= 3000 && covered == 64 && last < initial,
        format!(
            "rastrigin 2-D, budget 3000, {} evals used: {covered}/64 cells covered, max half-diagonal {last:.4} < {initial:.4}",
            out.eval_count
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut identical = true;
    let mut problems = vec![
        classical_problem("rastrigin", 2).unwrap(),
        shift_minimizer(&classical_problem("sphere", 2).unwrap(), 1),
        classical_problem("hartmann3", 3).unwrap(),
    ];
    problems.push(halo_core::testbed::schoen_generate(11, 2, 30).unwrap());
    for p in &problems {
        let gated = run(&p.handle, &SolverConfig::new(Variant::Halo).with_beta(0.0).with_budget(2000)).unwrap();
        let off = run(&p.handle, &SolverConfig::new(Variant::Halo).without_local_search().with_budget(2000)).unwrap();
        let a = &gated.trace.evaluations;
        let b = &off.trace.evaluations;
        let same = a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.value.to_bits() == y.value.to_bits()
                    && x.point.iter().zip(&y.point).all(|(u, v)| u.to_bits() == v.to_bits())
            })
            && gated.trace.status == off.trace.status;
        identical &= same;
    }
    let mut worst = 0u64;
    let mut all_solved = true;
    for seed in 0..5 {
        let p = shift_minimizer(&classical_problem("sphere", 2).unwrap(), seed);
        let out = run(&p.handle, &SolverConfig::new(Variant::Halo).with_beta(1e-4)).unwrap();
        all_solved &= out.trace.status == Status::Solved && out.eval_count <= 500;
        worst = worst.max(out.eval_count);
    }
    verdict(
        identical && all_solved,
        format!(
            "beta=0 traces bit-identical: {identical}; shifted sphere (5 shifts) solved, worst {worst} evals (bound 500)"
        ),
    )
}

fn criterion_7() -> Verdict {
    let m = schoen30();
    let halo = run_benchmark(&m, &SolverConfig::new(Variant::Halo), 1).unwrap();
    let hlo = run_benchmark(&m, &SolverConfig::new(Variant::Hlo), 1).unwrap();
    let (mut sh, mut sl, mut common) = (0u64, 0u64, 0u64);
    for (a, b) in halo.rows.iter().zip(&hlo.rows) {
        if a.solved && b.solved {
            sh += a.fevals;
            sl += b.fevals;
            common += 1;
        }
    }
    let avg_h = sh as f64 / common.max(1) as f64;
    let avg_l = sl as f64 / common.max(1) as f64;
    let (ch, cl) = (solved_count(&halo), solved_count(&hlo));
    verdict(
        ch >= cl && avg_h <= 1.1 * avg_l,
        format!(
            "solved HALO {ch}/30 vs HLO {cl}/30; avg evals on {common} common: HALO {avg_h:.1} vs HLO {avg_l:.1} (limit 1.1x)"
        ),
    )
}

const DIRECT_BRANIN_BUDGET: usize = 200;

fn criterion_8() -> Verdict {
    let branin = classical_problem("branin", 2).unwrap();
    let out = run(&branin.handle, &SolverConfig::new(Variant::Direct).with_budget(DIRECT_BRANIN_BUDGET)).unwrap();
    let branin_ok = out.trace.status == Status::Solved;

    let m = data("classical20.jsonl");
    let halo = run_benchmark(&m, &SolverConfig::new(Variant::Halo), 1).unwrap();
    let direct = run_benchmark(&m, &SolverConfig::new(Variant::Direct), 1).unwrap();
    let mut wins = 0;
    let mut losses = Vec::new();
    for (a, b) in halo.rows.iter().zip(&direct.rows) {
        if a.solved && (!b.solved || a.fevals <= b.fevals) {
            wins += 1;
        } else {
            losses.push(a.problem.clone());
        }
    }
    let needed = (0.6 * m.len() as f64).ceil() as usize;
    verdict(
        branin_ok && wins >= needed,
        format!(
            "DIRECT branin {:?} at {:?} evals (budget {DIRECT_BRANIN_BUDGET}); HALO <= DIRECT on {wins}/{} (need {needed}); not won: {}",
            out.trace.status,
            out.trace.solved_at,
            m.len(),
            losses.join(", ")
        ),
    )
}

fn row(solved: bool, fevals: u64) -> RunRecord {
    RunRecord {
        problem: "p".into(),
        n: 2,
        variant: "halo".into(),
        solved,
        fevals,
        best_f: None,
        rel_err: None,
        error: None,
        importance: Vec::new(),
    }
}

fn nondecreasing(curve: &OcCurve) -> bool {
    curve.gamma.windows(2).all(|w| w[0] <= w[1]) && curve.c.windows(2).all(|w| w[0] <= w[1])
}

fn criterion_9() -> Verdict {
    let all_zero = auoc_of(&[row(true, 0), row(true, 0)], 100.0);
    let none = auoc_of(&[row(false, 100), row(false, 100)], 100.0);
    let half = auoc_of(&[row(true, 50), row(true, 50), row(false, 100), row(false, 100)], 100.0);
    let exact = all_zero == 1.0 && none == 0.0 && half == 0.25;

    let m = schoen30();
    let mut monotone = true;
    let mut curves = 0;
    for variant in [Variant::Halo, Variant::Hlo, Variant::Direct] {
        let cfg = SolverConfig::new(variant).with_budget(3000);
        let report = run_benchmark(&m, &cfg, 1).unwrap();
        let gmax = cfg.stop.max_fun_evals as f64;
        let curve = operational_characteristic(&report.rows, &oc_grid(&report.rows, gmax));
        monotone &= nondecreasing(&curve) && (0.0..=1.0).contains(&auoc(&curve, gmax));
        curves += 1;
    }
    let gen = generate_schoen(2, 10, 500).unwrap();
    let report = run_benchmark(&gen, &SolverConfig::new(Variant::Halo).with_budget(3000), 1).unwrap();
    let curve = operational_characteristic(&report.rows, &oc_grid(&report.rows, 3000.0));
    monotone &= nondecreasing(&curve);
    curves += 1;
    verdict(
        exact && monotone,
        format!("AUOC cases {all_zero} / {none} / {half} (want 1 / 0 / 0.25); {curves} OC curves nondecreasing: {monotone}"),
    )
}

fn criterion_10() -> Verdict {
    let m = schoen30();
    let mut pct = Vec::new();
    for beta in [1e-2, 1e-4, 1e-6] {
        let r = run_benchmark(&m, &SolverConfig::new(Variant::Halo).with_beta(beta), 1).unwrap();
        pct.push((beta, r.aggregate.percentage_solved));
    }
    let hi = pct.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = pct.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let listed: Vec<String> = pct.iter().map(|(b, p)| format!("beta={b:e}: {p:.1}%")).collect();
    verdict(
        hi - lo <= 15.0,
        format!("{}; spread {:.1} points (limit 15)", listed.join(", "), hi - lo),
    )
}

fn criterion_11() -> Verdict {
    let obj = ObjectiveHandle::new(BoxDomain::unit(2).unwrap(), |x: &[f64]| {
        100.0 * x[0] * x[0] + x[1] * x[1]
    });
    let out = run(&obj, &SolverConfig::new(Variant::Halo).with_budget(500)).unwrap();
    let imp = variable_importance(&out.ledger);
    let sum: f64 = imp.iter().sum();
    verdict(
        imp[0] > imp[1] && (sum - 1.0).abs() <= 1e-12 && imp[0] > 0.9,
        format!(
            "{} evals: importance ({:.4}, {:.4}), sum - 1 = {:.1e}",
            out.eval_count,
            imp[0],
            imp[1],
            sum - 1.0
        ),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("iteration-zero trace", criterion_1),
        ("slope exactness on affine functions", criterion_2),
        ("blend bracketing", criterion_3),
        ("selection oracle equivalence", criterion_4),
        ("denseness", criterion_5),
        ("local-search gate", criterion_6),
        ("HALO vs HLO ordering", criterion_7),
        ("DIRECT baseline and HALO vs DIRECT", criterion_8),
        ("AUOC and OC curves", criterion_9),
        ("beta sensitivity", criterion_10),
        ("variable importance", criterion_11),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let n = k + 1;
        let tag = format!("criterion_{n}");
        if !filter.is_empty() && !filter.iter().any(|f| tag == *f || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        println!(
            "criterion {n:>2} {}: {name} — {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
