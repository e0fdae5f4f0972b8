//! `boxscreen` command line. Exit codes: 0 success, 1 usage or input error,
//! 2 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::driver::{solve, write_trace_csv, Screening};
use crate::duality::{select_translation_vector, TranslationStrategy, TranslationVector};
use crate::error::{Error, Result};
use crate::harness::bench::{
    compare_translations, default_strategies, run_bench, write_compare, write_report, BenchSpec,
};
use crate::harness::generate::{generate, Family, GenSpec, PRNG_NAME};
use crate::harness::io::{instance_hash, load_problem, read_vector, save_problem, BoundsSpec};
use crate::model::Problem;
use crate::solvers::{SolverConfig, SolverKind};

#[derive(Debug, Parser)]
#[command(
    name = "boxscreen",
    version,
    about = "Box-constrained least squares with safe screening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic problem to A.mtx, y.csv, bounds.csv and meta.json.
    Gen(GenArgs),
    /// Solve one problem, loaded from files or generated.
    Solve(SolveArgs),
    /// Paired screening off/on timing sweep.
    Bench(BenchArgs),
    /// Screening ratio per round for several translation vectors.
    #[command(name = "compare-t")]
    CompareT(CompareArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Instance family: nnls or bvls.
    #[arg(long, default_value = "nnls")]
    family: Family,
    #[arg(long, default_value_t = 200)]
    m: usize,
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Box half-width b (bvls).
    #[arg(long, default_value_t = 1.0)]
    box_halfwidth: f64,
    /// Density of the planted solution (nnls).
    #[arg(long, default_value_t = 0.05)]
    sparsity: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_std: f64,
}

impl GenerateArgs {
    fn spec(&self, seed: u64) -> GenSpec {
        GenSpec {
            family: self.family,
            m: self.m,
            n: self.n,
            box_halfwidth: self.box_halfwidth,
            sparsity: self.sparsity,
            noise_std: self.noise_std,
            seed,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    gen: GenerateArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Design matrix (.mtx Matrix Market, otherwise headerless CSV).
    #[arg(long, requires = "y")]
    a: Option<PathBuf>,
    /// Data vector, one-column CSV.
    #[arg(long, requires = "a")]
    y: Option<PathBuf>,
    /// `nn`, `box:lo:hi` or a two-column lower,upper CSV.
    #[arg(long, default_value = "nn")]
    bounds: String,
    /// Scale the columns of A to unit norm after loading.
    #[arg(long)]
    normalize_columns: bool,
    /// Used when no --a/--y is given.
    #[command(flatten)]
    gen: GenerateArgs,
}

impl ProblemArgs {
    fn load(&self, seed: u64) -> Result<Problem> {
        match (&self.a, &self.y) {
            (Some(a), Some(y)) => {
                let bounds: BoundsSpec = self.bounds.parse()?;
                load_problem(a, y, &bounds, self.normalize_columns)
            }
            _ => generate(&self.gen.spec(seed)),
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// pg, cd or active-set.
    #[arg(long, default_value = "cd")]
    solver: SolverKind,
    /// on or off.
    #[arg(long, default_value = "on")]
    screen: Screening,
    /// Stop once the duality gap falls below this value.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// neg-ones, neg-column=J, neg-mean-column, solve-linear or custom=FILE.
    #[arg(long)]
    t_strategy: Option<String>,
    #[arg(long, default_value_t = 1)]
    inner_passes: usize,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Generator seed and power-iteration seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-round trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Full result as JSON.
    #[arg(long)]
    result_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// TOML bench spec.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// table1_desk or fig2_desk.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "cd")]
    solver: SolverKind,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Parses `--t-strategy`.
pub fn parse_strategy(s: &str, m: usize) -> Result<TranslationStrategy> {
    match s {
        "neg-ones" => return Ok(TranslationStrategy::NegOnes),
        "neg-mean-column" => return Ok(TranslationStrategy::NegMeanColumn),
        "solve-linear" => return Ok(TranslationStrategy::SolveLinear),
        _ => {}
    }
    if let Some(j) = s.strip_prefix("neg-column=") {
        let j = j
            .parse()
            .map_err(|_| Error::BadConfig(format!("neg-column expects a column index, got `{j}`")))?;
        return Ok(TranslationStrategy::NegColumn(j));
    }
    if let Some(path) = s.strip_prefix("custom=") {
        let t = read_vector(path.as_ref())?;
        if t.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "custom t has {} entries, expected {m}",
                t.len()
            )));
        }
        return Ok(TranslationStrategy::Custom(t));
    }
    Err(Error::BadConfig(format!("unknown translation strategy `{s}`")))
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = args.gen.spec(args.seed);
    let p = generate(&spec)?;
    let files = save_problem(&args.out_dir, &p)?;
    let meta = serde_json::json!({
        "spec": spec,
        "prng": PRNG_NAME,
        "instance_hash": instance_hash(&p),
    });
    fs::write(args.out_dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    println!(
        "wrote {}, {}, {}",
        files.a.display(),
        files.y.display(),
        files.bounds.display()
    );
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let p = args.problem.load(args.seed)?;
    let mut cfg = SolverConfig::new(args.solver)
        .with_gap_tol(args.tol)
        .with_inner_passes(args.inner_passes);
    cfg.max_rounds = args.max_rounds;
    cfg.seed = args.seed;
    cfg.validate()?;

    let tv: Option<TranslationVector> = match &args.t_strategy {
        Some(s) => Some(select_translation_vector(&p, parse_strategy(s, p.m())?)?),
        None => None,
    };
    let res = solve(&p, &cfg, args.screen, tv.as_ref())?;

    if let Some(path) = &args.trace_out {
        write_trace_csv(&res.trace, fs::File::create(path)?)?;
    }
    if let Some(path) = &args.result_out {
        fs::write(path, res.to_json()?)?;
    }
    println!("solver           {}", args.solver.label());
    println!("screening        {:?}", args.screen);
    println!("size             {} x {}", p.m(), p.n());
    println!("converged        {}", res.converged);
    println!("rounds           {}", res.rounds);
    println!("objective        {:?}", res.objective());
    println!("gap              {:e}", res.gap);
    println!("screening ratio  {:.4}", res.screening_ratio());
    println!("elapsed          {:.6} s", res.elapsed);
    res.ensure_converged().map(|_| ())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut spec = match (&args.spec, &args.preset) {
        (Some(path), _) => BenchSpec::load(path)?,
        (None, Some(name)) => BenchSpec::preset(name)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(r) = args.repetitions {
        spec.repetitions = r;
    }
    let report = run_bench(&spec)?;
    write_report(&args.out_dir, &report)?;
    println!(
        "{:>5} {:>6} {:>6} {:>10} {:>11} {:>11} {:>8} {:>8} {:>7}",
        "cell", "m", "n", "b", "off_s", "on_s", "speedup", "paired", "satur."
    );
    for c in &report.cells {
        let b = c.box_halfwidth.map_or("-".to_string(), |b| format!("{b:.4}"));
        println!(
            "{:>5} {:>6} {:>6} {:>10} {:>11.6} {:>11.6} {:>8.3} {:>8.3} {:>7.3}",
            c.cell, c.m, c.n, b, c.elapsed_off, c.elapsed_on, c.speedup, c.paired_speedup, c.saturation_ratio
        );
    }
    let failures: usize = report.cells.iter().map(|c| c.failures).sum();
    if failures > 0 {
        eprintln!("{failures} run(s) failed; see runs.csv");
    }
    println!("report written to {}", args.out_dir.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let p = args.problem.load(args.seed)?;
    let mut cfg = SolverConfig::new(args.solver).with_gap_tol(args.tol);
    cfg.max_rounds = args.max_rounds;
    cfg.seed = args.seed;
    let report = compare_translations(&p, &cfg, &default_strategies(&p))?;
    for (label, why) in &report.skipped {
        eprintln!("skipped {label}: {why}");
    }
    if report.curves.is_empty() {
        return Err(Error::NoInteriorPoint {
            index: 0,
            value: f64::NAN,
            threshold: 0.0,
        });
    }
    write_compare(&args.out_dir, &report)?;
    for c in &report.curves {
        println!(
            "{:<20} rounds {:>7}  final ratio {:.4}",
            c.label,
            c.rounds,
            c.ratios.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

/// Runs the command line on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::CompareT(a) => cmd_compare(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
