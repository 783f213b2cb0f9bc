//! Classical benchmark functions with verified optima.

use std::f64::consts::{E, PI};

use super::TestProblem;
use crate::error::{Error, Result};
use crate::model::{BoxDomain, ObjectiveHandle};

/// Dimensions for which the suite is defined.
pub const CLASSICAL_DIMS: [usize; 6] = [2, 3, 4, 6, 8, 10];

const NAMES: [&str; 14] = [
    "sphere",
    "rosenbrock",
    "rastrigin",
    "ackley",
    "griewank",
    "styblinski-tang",
    "dixon-price",
    "beale",
    "branin",
    "eggholder",
    "michalewicz",
    "adjiman",
    "hartmann3",
    "hartmann6",
];

pub fn classical_names() -> &'static [&'static str] {
    &NAMES
}

const STYBLINSKI_X: f64 = -2.9035340345322296;
const STYBLINSKI_F: f64 = -39.166165703771426;

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN3_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const HARTMANN3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];
const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartmann<const D: usize>(x: &[f64], a: &[[f64; D]; 4], p: &[[f64; D]; 4]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..D).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

fn griewank(x: &[f64]) -> f64 {
    let s = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let p: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + s - p
}

fn styblinski_tang(x: &[f64]) -> f64 {
    0.5 * x
        .iter()
        .map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v)
        .sum::<f64>()
}

fn dixon_price(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2)
        + x.windows(2)
            .enumerate()
            .map(|(i, w)| (i + 2) as f64 * (2.0 * w[1] * w[1] - w[0]).powi(2))
            .sum::<f64>()
}

fn beale(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (1.5 - a + a * b).powi(2) + (2.25 - a + a * b * b).powi(2) + (2.625 - a + a * b.powi(3)).powi(2)
}

fn branin(x: &[f64]) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x[1] - b * x[0] * x[0] + c * x[0] - 6.0).powi(2) + 10.0 * (1.0 - t) * x[0].cos() + 10.0
}

fn eggholder(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    -(b + 47.0) * (b + 0.5 * a + 47.0).abs().sqrt().sin() - a * (a - (b + 47.0)).abs().sqrt().sin()
}

fn michalewicz(x: &[f64]) -> f64 {
    -x.iter()
        .enumerate()
        .map(|(i, v)| v.sin() * ((i + 1) as f64 * v * v / PI).sin().powi(20))
        .sum::<f64>()
}

fn adjiman(x: &[f64]) -> f64 {
    x[0].cos() * x[1].sin() - x[0] / (x[1] * x[1] + 1.0)
}

fn build(
    name: &str,
    domain: BoxDomain,
    f: fn(&[f64]) -> f64,
    optimum: f64,
    minimizer: Vec<f64>,
) -> TestProblem {
    TestProblem::new(name, ObjectiveHandle::new(domain, f), optimum, minimizer)
}

/// Looks up a suite function at dimension `n`; `Ok(None)` when the function
/// is not defined at that dimension.
pub fn classical_problem_opt(name: &str, n: usize) -> Result<Option<TestProblem>> {
    let fixed = |d: usize| n == d;
    let p = match name {
        "sphere" => build(name, BoxDomain::uniform(n, -5.12, 5.12)?, sphere, 0.0, vec![0.0; n]),
        "rosenbrock" if n >= 2 => {
            build(name, BoxDomain::uniform(n, -5.0, 10.0)?, rosenbrock, 0.0, vec![1.0; n])
        }
        "rastrigin" => build(name, BoxDomain::uniform(n, -5.12, 5.12)?, rastrigin, 0.0, vec![0.0; n]),
        "ackley" => build(name, BoxDomain::uniform(n, -32.768, 32.768)?, ackley, 0.0, vec![0.0; n]),
        "griewank" => build(name, BoxDomain::uniform(n, -600.0, 600.0)?, griewank, 0.0, vec![0.0; n]),
        "styblinski-tang" => build(
            name,
            BoxDomain::uniform(n, -5.0, 5.0)?,
            styblinski_tang,
            STYBLINSKI_F * n as f64,
            vec![STYBLINSKI_X; n],
        ),
        "dixon-price" if n >= 2 => {
            let x = (1..=n as i32)
                .map(|i| {
                    let p = 2f64.powi(i);
                    2f64.powf(-(p - 2.0) / p)
                })
                .collect();
            build(name, BoxDomain::uniform(n, -10.0, 10.0)?, dixon_price, 0.0, x)
        }
        "beale" if fixed(2) => build(name, BoxDomain::uniform(2, -4.5, 4.5)?, beale, 0.0, vec![3.0, 0.5]),
        "branin" if fixed(2) => build(
            name,
            BoxDomain::new(vec![-5.0, 0.0], vec![10.0, 15.0])?,
            branin,
            0.39788735772973816,
            vec![PI, 2.275],
        ),
        "eggholder" if fixed(2) => build(
            name,
            BoxDomain::uniform(2, -512.0, 512.0)?,
            eggholder,
            -959.6406627208507,
            vec![512.0, 404.2318049938646],
        ),
        "michalewicz" if fixed(2) => build(
            name,
            BoxDomain::uniform(2, 0.0, PI)?,
            michalewicz,
            -1.8013034100985532,
            vec![2.2029055198403524, PI / 2.0],
        ),
        "adjiman" if fixed(2) => build(
            name,
            BoxDomain::new(vec![-1.0, -1.0], vec![2.0, 1.0])?,
            adjiman,
            -2.021806783359787,
            vec![2.0, 0.105783465645129],
        ),
        "hartmann3" if fixed(3) => build(
            name,
            BoxDomain::unit(3)?,
            |x| hartmann(x, &HARTMANN3_A, &HARTMANN3_P),
            -3.862779787332663,
            vec![0.11458889018184783, 0.555648894985697, 0.8525469848595796],
        ),
        "hartmann6" if fixed(6) => build(
            name,
            BoxDomain::unit(6)?,
            |x| hartmann(x, &HARTMANN6_A, &HARTMANN6_P),
            -3.3223680114155143,
            vec![
                0.20168950308154784,
                0.15001069256125274,
                0.47687397826899963,
                0.2753324293380429,
                0.31165161699824356,
                0.6573005342028397,
            ],
        ),
        n if NAMES.contains(&n) => return Ok(None),
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(Some(p))
}

/// Like [`classical_problem_opt`] but an undefined dimension is an error.
pub fn classical_problem(name: &str, n: usize) -> Result<TestProblem> {
    classical_problem_opt(name, n)?
        .ok_or_else(|| Error::UnknownProblem(format!("{name} is not defined for N={n}")))
}

/// Every suite function defined at dimension `n`, in a fixed order.
pub fn classical_suite(n: usize) -> Vec<TestProblem> {
    if !CLASSICAL_DIMS.contains(&n) {
        return Vec::new();
    }
    NAMES
        .iter()
        .filter_map(|name| classical_problem_opt(name, n).expect("known name"))
        .collect()
}
