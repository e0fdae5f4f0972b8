//! Solving a problem stored on disk: `A` in Matrix Market format, `y` as a
//! one-column CSV, bounds as `nn`, `box:lo:hi` or a per-coordinate CSV.
//!
//! `cargo run --release --example matrix_market [-- A.mtx y.csv [bounds]]`
//!
//! Without arguments a generated problem is written to a temporary
//! directory and read back.

use std::path::PathBuf;

use boxscreen::harness::generate::{gen_nnls, GenSpec};
use boxscreen::harness::io::{load_problem, save_problem, BoundsSpec};
use boxscreen::{solve, Result, Screening, SolveResult, SolverConfig, SolverKind};

pub fn run_example(files: Option<(PathBuf, PathBuf, String)>) -> Result<SolveResult> {
    let scratch = tempfile::tempdir()?;
    let (a, y, bounds) = match files {
        Some(f) => f,
        None => {
            let saved = save_problem(scratch.path(), &gen_nnls(&GenSpec::nnls(60, 120, 5))?)?;
            println!("wrote {} and {}", saved.a.display(), saved.y.display());
            (saved.a, saved.y, "nn".to_string())
        }
    };
    let bounds: BoundsSpec = bounds.parse()?;
    // real data sets are usually column-normalized before unmixing
    let p = load_problem(&a, &y, &bounds, true)?;
    println!("loaded {} x {} problem", p.m(), p.n());

    let res = solve(
        &p,
        &SolverConfig::new(SolverKind::CoordinateDescent),
        Screening::On,
        None,
    )?
    .ensure_converged()?;
    println!(
        "objective {:.6} after {} rounds; {:.0}% of columns screened",
        res.objective(),
        res.rounds,
        100.0 * res.screening_ratio()
    );
    Ok(res)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let files = match args.as_slice() {
        [a, y] => Some((a.into(), y.into(), "nn".to_string())),
        [a, y, b] => Some((a.into(), y.into(), b.clone())),
        _ => None,
    };
    run_example(files).map(|_| ())
}
