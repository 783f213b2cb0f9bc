//! Line-delimited JSON problem sets.
//!
//! Each line is one [`ManifestRecord`]. Serialization is canonical (fixed key
//! order, 17-digit numbers), so reading and re-writing a manifest reproduces
//! it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::json_f64;
use crate::testbed::{
    classical_problem, problem_rng, schoen_generate, shift_minimizer, TestProblem,
    MAX_STATIONARY, MIN_STATIONARY, STREAM_MANIFEST,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Schoen,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub family: Family,
    pub name: String,
    pub n: usize,
    pub seed: u64,
    /// Stationary-point count (Schoen only).
    pub s: Option<usize>,
    /// Minimizer shift seed (classical only; `None` = unshifted).
    pub shift_seed: Option<u64>,
    #[serde(serialize_with = "json_f64")]
    pub known_optimum: f64,
}

impl ManifestRecord {
    pub fn schoen(seed: u64, n: usize, s: usize) -> Result<Self> {
        let p = schoen_generate(seed, n, s)?;
        Ok(Self {
            family: Family::Schoen,
            name: p.name,
            n,
            seed,
            s: Some(s),
            shift_seed: None,
            known_optimum: p.known_optimum,
        })
    }

    pub fn classical(name: &str, n: usize, shift_seed: Option<u64>) -> Result<Self> {
        let p = classical_problem(name, n)?;
        Ok(Self {
            family: Family::Classical,
            name: name.to_string(),
            n,
            seed: shift_seed.unwrap_or(0),
            s: None,
            shift_seed,
            known_optimum: p.known_optimum,
        })
    }

    /// Display label: the name, with the shift seed appended when shifted.
    pub fn label(&self) -> String {
        match (self.family, self.shift_seed) {
            (Family::Classical, Some(s)) => format!("{}-shift{}", self.name, s),
            _ => self.name.clone(),
        }
    }

    /// Constructs the problem and checks it against the recorded optimum.
    pub fn build(&self) -> Result<TestProblem> {
        let problem = match self.family {
            Family::Schoen => {
                let s = self.s.ok_or_else(|| {
                    Error::InvalidConfig(format!("{}: schoen record without s", self.name))
                })?;
                schoen_generate(self.seed, self.n, s)?
            }
            Family::Classical => {
                let p = classical_problem(&self.name, self.n)?;
                match self.shift_seed {
                    Some(seed) => shift_minimizer(&p, seed),
                    None => p,
                }
            }
        };
        if problem.known_optimum.to_bits() != self.known_optimum.to_bits() {
            return Err(Error::InvalidConfig(format!(
                "{}: recorded optimum {} differs from generated {}",
                self.label(),
                self.known_optimum,
                problem.known_optimum
            )));
        }
        Ok(problem)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest records always serialize")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Parses line-delimited records; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::Manifest {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        if records.is_empty() {
            return Err(Error::EmptyManifest);
        }
        Ok(Self { records })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}", r.to_line());
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn build_all(&self) -> Result<Vec<TestProblem>> {
        self.records.iter().map(ManifestRecord::build).collect()
    }
}

/// `count` Schoen problems in dimension `n`; problem `i` uses seed `seed + i`
/// and draws its stationary-point count from that seed's manifest stream.
pub fn generate_schoen(n: usize, count: usize, seed: u64) -> Result<Manifest> {
    let records = (0..count as u64)
        .map(|i| {
            let s_seed = seed + i;
            let s = problem_rng(s_seed, STREAM_MANIFEST).gen_range(MIN_STATIONARY..=MAX_STATIONARY);
            ManifestRecord::schoen(s_seed, n, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Manifest::new(records))
}
