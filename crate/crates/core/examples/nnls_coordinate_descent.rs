//! Non-negative least squares with coordinate descent, screening on and off.
//!
//! `cargo run --release --example nnls_coordinate_descent`

use boxscreen::harness::generate::{gen_nnls, GenSpec};
use boxscreen::{solve, Result, Screening, SolveResult, SolverConfig, SolverKind};

pub fn run_example() -> Result<(SolveResult, SolveResult)> {
    let p = gen_nnls(&GenSpec::nnls(100, 300, 7))?;
    let cfg = SolverConfig::new(SolverKind::CoordinateDescent).with_gap_tol(1e-6);

    let off = solve(&p, &cfg, Screening::Off, None)?.ensure_converged()?;
    let on = solve(&p, &cfg, Screening::On, None)?.ensure_converged()?;

    println!(
        "{:>10} {:>8} {:>12} {:>10} {:>8}",
        "screening", "rounds", "objective", "time (s)", "ratio"
    );
    for (name, r) in [("off", &off), ("on", &on)] {
        println!(
            "{name:>10} {:>8} {:>12.6} {:>10.5} {:>8.3}",
            r.rounds,
            r.objective(),
            r.elapsed,
            r.screening_ratio()
        );
    }
    // the screened coordinates are exactly zero in the returned solution
    let support = on.x.iter().filter(|&&v| v > 0.0).count();
    println!("{support} of {} coordinates are positive at the solution", p.n());
    Ok((off, on))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
