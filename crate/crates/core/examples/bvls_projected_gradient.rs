//! Bounded-variable least squares with projected gradient, printing the
//! gap and the screening ratio as the solve proceeds.
//!
//! `cargo run --release --example bvls_projected_gradient`

use boxscreen::harness::generate::{gen_bvls, GenSpec};
use boxscreen::{solve, Result, Screening, SolveResult, SolverConfig, SolverKind};

pub fn run_example() -> Result<SolveResult> {
    // a narrow box: most coordinates end up at -b or b
    let p = gen_bvls(&GenSpec::bvls(200, 100, 0.02, 1))?;
    let cfg = SolverConfig::new(SolverKind::ProjectedGradient);
    let res = solve(&p, &cfg, Screening::On, None)?.ensure_converged()?;

    println!("{:>6} {:>12} {:>10} {:>9}", "round", "gap", "preserved", "ratio");
    let every = (res.trace.len() / 12).max(1);
    for r in res.trace.iter().step_by(every).chain(res.trace.last()) {
        println!(
            "{:>6} {:>12.3e} {:>10} {:>9.3}",
            r.round, r.gap, r.preserved_count, r.screening_ratio
        );
    }
    println!(
        "{} screened at the lower bound, {} at the upper bound",
        res.sat_lower.len(),
        res.sat_upper.len()
    );
    Ok(res)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
