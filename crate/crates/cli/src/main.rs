use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use halo_core::bench::{run_benchmark, BenchmarkReport};
use halo_core::fmt::f17;
use halo_core::manifest::{generate_schoen, Manifest, ManifestRecord};
use halo_core::metrics::{auoc, oc_grid, operational_characteristic, RunRecord};
use halo_core::{run, SolverConfig, Variant};

#[derive(Parser)]
#[command(name = "halo", version, about = "Lipschitz global optimization: solve, benchmark, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write its evaluation trace as JSON lines.
    Solve(SolveArgs),
    /// Run a solver over every problem of a manifest.
    Bench(BenchArgs),
    /// Summarize benchmark reports: AUOC, OC curve, variable importance.
    Report(ReportArgs),
    /// Write a problem manifest.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Halo,
    Hlo,
    Direct,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Halo => Variant::Halo,
            VariantArg::Hlo => Variant::Hlo,
            VariantArg::Direct => Variant::Direct,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "halo")]
    variant: VariantArg,
    /// Maximum number of function evaluations.
    #[arg(long, default_value_t = 30_000)]
    budget: usize,
    /// Largest half-diagonal from which a local search may start.
    #[arg(long, default_value_t = 1e-4)]
    beta: f64,
    /// Relative error at which a problem counts as solved.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Disable the local search entirely.
    #[arg(long)]
    no_local: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.variant.into())
            .with_budget(self.budget)
            .with_beta(self.beta);
        cfg.stop.rel_error_tol = self.tol;
        if self.no_local {
            cfg = cfg.without_local_search();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// A classical function name, `schoen`, a Schoen label such as
    /// `schoen-n2-s40-seed7`, or `<manifest>#<line>` (1-based).
    #[arg(long)]
    problem: String,
    /// Dimension for classical and `schoen` problems.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Generator seed for `schoen`; shift seed for classical functions
    /// (unshifted when omitted).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of stationary points for `schoen` (drawn from the seed when omitted).
    #[arg(long)]
    s: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Trace output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report path (JSON); the flat table goes next to it with a `.csv` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Benchmark reports written by `bench`; rows are pooled.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Print the area under the operational characteristic.
    #[arg(long)]
    auoc: bool,
    /// Write the operational characteristic as `gamma,c`.
    #[arg(long)]
    oc_csv: Option<PathBuf>,
    /// Write per-problem variable importance.
    #[arg(long)]
    importance_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Schoen,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "schoen")]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    count: usize,
    /// Seed of the first problem; problem `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
        Command::Gen(a) => gen(a),
    }
}

fn parse_schoen_label(label: &str) -> Option<(usize, usize, u64)> {
    let rest = label.strip_prefix("schoen-n")?;
    let (n, rest) = rest.split_once("-s")?;
    let (s, seed) = rest.split_once("-seed")?;
    Some((n.parse().ok()?, s.parse().ok()?, seed.parse().ok()?))
}

fn resolve_problem(a: &SolveArgs) -> Result<ManifestRecord> {
    if let Some((path, line)) = a.problem.rsplit_once('#') {
        let manifest = Manifest::read(path).with_context(|| format!("reading {path}"))?;
        let k: usize = line.parse().with_context(|| format!("bad line number {line:?}"))?;
        return match k.checked_sub(1).and_then(|i| manifest.records.get(i)) {
            Some(r) => Ok(r.clone()),
            None => bail!("{path} has {} records, no record {k}", manifest.len()),
        };
    }
    if let Some((n, s, seed)) = parse_schoen_label(&a.problem) {
        return Ok(ManifestRecord::schoen(seed, n, s)?);
    }
    if a.problem == "schoen" {
        let seed = a.seed.unwrap_or(0);
        return Ok(match a.s {
            Some(s) => ManifestRecord::schoen(seed, a.n, s)?,
            None => generate_schoen(a.n, 1, seed)?.records.remove(0),
        });
    }
    Ok(ManifestRecord::classical(&a.problem, a.n, a.seed)?)
}

fn solve(a: SolveArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let record = resolve_problem(&a)?;
    let problem = record.build()?;
    let (trace, failure) = match run(&problem.handle, &cfg) {
        Ok(out) => (out.trace, None),
        Err(fail) => (fail.trace, Some(fail.error)),
    };

    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    for e in &trace.evaluations {
        writeln!(
            w,
            "{{\"eval_index\":{},\"value\":{},\"best\":{}}}",
            e.index,
            json_number(e.value),
            json_number(e.best)
        )?;
    }
    w.flush()?;

    eprintln!(
        "{} {} N={}: {} after {} evaluations, best {} (known optimum {})",
        record.label(),
        cfg.variant,
        problem.dim,
        trace.status,
        trace.evaluations.len(),
        f17(trace.best_value),
        f17(problem.known_optimum)
    );
    if let Some(at) = trace.solved_at {
        eprintln!("solved at evaluation {at}");
    }
    match failure {
        Some(e) => Err(e).context("solver aborted"),
        None => Ok(()),
    }
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        f17(x)
    } else {
        "null".into()
    }
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let manifest = Manifest::read(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let report = run_benchmark(&manifest, &cfg, a.jobs)?;
    fs::write(&a.out, report.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    let csv = csv_path(&a.out);
    fs::write(&csv, report.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    let agg = &report.aggregate;
    println!(
        "{}: solved {}/{} ({:.1}%), average evals {}, AUOC {}",
        cfg.variant,
        agg.solved,
        agg.total,
        agg.percentage_solved,
        agg.average_evals.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into()),
        f17(agg.auoc)
    );
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.problem, r.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut rows: Vec<RunRecord> = Vec::new();
    let mut gamma_max = 0u64;
    for path in &a.inputs {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let r = BenchmarkReport::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        let agg = &r.aggregate;
        println!(
            "{}: {} solved {}/{} ({:.1}%), average evals {}",
            path.display(),
            r.metadata.config.variant,
            agg.solved,
            agg.total,
            agg.percentage_solved,
            agg.average_evals.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
        );
        gamma_max = gamma_max.max(agg.gamma_max);
        rows.extend(r.rows);
    }
    let gmax = gamma_max as f64;
    let curve = operational_characteristic(&rows, &oc_grid(&rows, gmax));
    if a.auoc {
        println!("AUOC {}", f17(auoc(&curve, gmax)));
    }
    if let Some(path) = &a.oc_csv {
        let mut out = String::from("gamma,c\n");
        for (g, c) in curve.gamma.iter().zip(&curve.c) {
            out.push_str(&format!("{},{}\n", f17(*g), f17(*c)));
        }
        fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.importance_csv {
        let mut out = String::from("problem,N,variant,coord,importance\n");
        for r in &rows {
            for (k, v) in r.importance.iter().enumerate() {
                out.push_str(&format!("{},{},{},{},{}\n", r.problem, r.n, r.variant, k, f17(*v)));
            }
        }
        fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let manifest = match a.family {
        FamilyArg::Schoen => generate_schoen(a.n, a.count, a.seed)?,
    };
    manifest
        .write(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!("wrote {} problems to {}", manifest.len(), a.out.display());
    Ok(())
}
