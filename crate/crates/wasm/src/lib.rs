//! Browser bindings: every entry point takes plain arguments and returns a
//! JSON string, so the page needs no generated glue beyond `wasm-bindgen`'s.

use halo_core::lipschitz::local_constants;
use halo_core::manifest::ManifestRecord;
use halo_core::metrics::variable_importance;
use halo_core::solver::EvalSource;
use halo_core::testbed::{classical_names, TestProblem};
use halo_core::{run, SolverConfig, Variant};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest budget a single demo call may request.
pub const MAX_DEMO_BUDGET: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Core(#[from] halo_core::Error),
    #[error("budget must be between 1 and {MAX_DEMO_BUDGET}")]
    Budget,
    #[error("the partition map needs a 2-D problem, got N={0}")]
    NotPlanar(usize),
    #[error("resolution must be between 2 and 400")]
    Resolution,
}

type Result<T> = std::result::Result<T, DemoError>;

/// Resolves a classical name (shifted when `seed > 0`) or `schoen`, whose
/// generator seed is `seed`.
pub fn resolve(problem: &str, n: usize, seed: u64) -> Result<TestProblem> {
    let record = if problem == "schoen" {
        halo_core::manifest::generate_schoen(n, 1, seed)?.records.remove(0)
    } else {
        ManifestRecord::classical(problem, n, (seed > 0).then_some(seed))?
    };
    Ok(record.build()?)
}

fn config(variant: Variant, budget: usize, beta: f64) -> Result<SolverConfig> {
    if budget == 0 || budget > MAX_DEMO_BUDGET {
        return Err(DemoError::Budget);
    }
    let cfg = SolverConfig::new(variant).with_budget(budget).with_beta(beta);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Rect {
    /// Lower corner and size in normalized coordinates.
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    value: f64,
    constant: f64,
}

#[derive(Serialize)]
struct PartitionMap {
    problem: String,
    variant: String,
    status: String,
    evaluations: usize,
    best_value: f64,
    known_optimum: f64,
    solved_at: Option<u64>,
    rects: Vec<Rect>,
    /// Local-search evaluations as `[x, y]`, normalized.
    local_points: Vec<[f64; 2]>,
    best_point: [f64; 2],
    lower: Vec<f64>,
    upper: Vec<f64>,
}

pub fn partition_map_json(problem: &str, seed: u64, variant: &str, budget: usize, beta: f64) -> Result<String> {
    let p = resolve(problem, 2, seed)?;
    if p.dim != 2 {
        return Err(DemoError::NotPlanar(p.dim));
    }
    let variant: Variant = variant.parse()?;
    let out = match run(&p.handle, &config(variant, budget, beta)?) {
        Ok(out) => out,
        Err(fail) => return Err(fail.error.into()),
    };
    let constants = local_constants(&out.ledger);
    let rects = out
        .ledger
        .iter()
        .map(|part| Rect {
            x: part.center[0] - part.half_sides[0],
            y: part.center[1] - part.half_sides[1],
            w: 2.0 * part.half_sides[0],
            h: 2.0 * part.half_sides[1],
            value: part.value,
            constant: constants[part.id],
        })
        .collect();
    let local_points = out
        .trace
        .evaluations
        .iter()
        .filter(|e| e.source == EvalSource::Local)
        .map(|e| [e.point[0], e.point[1]])
        .collect();
    let domain = p.handle.domain();
    let best = domain.normalize_point(&out.trace.best_point)?;
    let map = PartitionMap {
        problem: p.name.clone(),
        variant: variant.to_string(),
        status: out.trace.status.to_string(),
        evaluations: out.trace.evaluations.len(),
        best_value: out.trace.best_value,
        known_optimum: p.known_optimum,
        solved_at: out.trace.solved_at,
        rects,
        local_points,
        best_point: [best[0], best[1]],
        lower: domain.lower().to_vec(),
        upper: domain.upper().to_vec(),
    };
    Ok(serde_json::to_string(&map).expect("finite map serializes"))
}

#[derive(Serialize)]
struct Curve {
    variant: String,
    /// Best value after each evaluation.
    best: Vec<f64>,
    solved_at: Option<u64>,
}

#[derive(Serialize)]
struct Convergence {
    problem: String,
    known_optimum: f64,
    curves: Vec<Curve>,
}

pub fn convergence_json(problem: &str, n: usize, seed: u64, budget: usize, beta: f64) -> Result<String> {
    let p = resolve(problem, n, seed)?;
    let mut curves = Vec::new();
    for variant in [Variant::Halo, Variant::Hlo, Variant::Direct] {
        let trace = match run(&p.handle, &config(variant, budget, beta)?) {
            Ok(out) => out.trace,
            Err(fail) => fail.trace,
        };
        curves.push(Curve {
            variant: variant.to_string(),
            best: trace.evaluations.iter().map(|e| e.best).collect(),
            solved_at: trace.solved_at,
        });
    }
    let c = Convergence {
        problem: p.name.clone(),
        known_optimum: p.known_optimum,
        curves,
    };
    Ok(serde_json::to_string(&c).expect("finite curves serialize"))
}

#[derive(Serialize)]
struct Importance {
    problem: String,
    evaluations: usize,
    importance: Vec<f64>,
}

/// Variable importance after a HALO run on a problem without early stopping.
pub fn importance_json(problem: &str, n: usize, seed: u64, budget: usize) -> Result<String> {
    let p = resolve(problem, n, seed)?;
    let handle = halo_core::ObjectiveHandle::from_arc(p.handle.domain().clone(), p.handle.evaluator().clone());
    let out = run(&handle, &config(Variant::Halo, budget, 1e-4)?).map_err(|f| f.error)?;
    let imp = Importance {
        problem: p.name.clone(),
        evaluations: out.trace.evaluations.len(),
        importance: variable_importance(&out.ledger),
    };
    Ok(serde_json::to_string(&imp).expect("importance serializes"))
}

#[derive(Serialize)]
struct Heatmap {
    resolution: usize,
    min: f64,
    max: f64,
    /// Row-major values, row 0 at normalized y = 0.
    values: Vec<f64>,
}

/// Objective values on a `resolution`² grid of cell centers over a 2-D problem.
pub fn heatmap_json(problem: &str, seed: u64, resolution: usize) -> Result<String> {
    if !(2..=400).contains(&resolution) {
        return Err(DemoError::Resolution);
    }
    let p = resolve(problem, 2, seed)?;
    if p.dim != 2 {
        return Err(DemoError::NotPlanar(p.dim));
    }
    let domain = p.handle.domain();
    let mut values = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let q = [(i as f64 + 0.5) / resolution as f64, (j as f64 + 0.5) / resolution as f64];
            values.push(p.handle.peek(&domain.denormalize_point(&q)?));
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = Heatmap {
        resolution,
        min,
        max,
        values,
    };
    Ok(serde_json::to_string(&h).expect("finite grid serializes"))
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Names accepted by the other entry points, as a JSON array.
#[wasm_bindgen]
pub fn problem_names() -> String {
    let mut names: Vec<&str> = classical_names().to_vec();
    names.push("schoen");
    serde_json::to_string(&names).expect("names serialize")
}

#[wasm_bindgen]
pub fn partition_map(problem: &str, seed: u32, variant: &str, budget: u32, beta: f64) -> std::result::Result<String, JsError> {
    js(partition_map_json(problem, seed.into(), variant, budget as usize, beta))
}

#[wasm_bindgen]
pub fn convergence(problem: &str, n: u32, seed: u32, budget: u32, beta: f64) -> std::result::Result<String, JsError> {
    js(convergence_json(problem, n as usize, seed.into(), budget as usize, beta))
}

#[wasm_bindgen]
pub fn importance(problem: &str, n: u32, seed: u32, budget: u32) -> std::result::Result<String, JsError> {
    js(importance_json(problem, n as usize, seed.into(), budget as usize))
}

#[wasm_bindgen]
pub fn heatmap(problem: &str, seed: u32, resolution: u32) -> std::result::Result<String, JsError> {
    js(heatmap_json(problem, seed.into(), resolution as usize))
}
