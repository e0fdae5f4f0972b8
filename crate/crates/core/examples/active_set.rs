//! The active set method with screening, on an NNLS problem and a box
//! problem. Screened coordinates leave the candidate list for good.
//!
//! `cargo run --release --example active_set`

use boxscreen::harness::generate::{gen_bvls, gen_nnls, GenSpec};
use boxscreen::{solve, Result, Screening, SolveResult, SolverConfig, SolverKind};

pub fn run_example() -> Result<Vec<SolveResult>> {
    let problems = [
        ("nnls 80x160", gen_nnls(&GenSpec::nnls(80, 160, 2))?),
        ("bvls 120x60, b = 0.05", gen_bvls(&GenSpec::bvls(120, 60, 0.05, 2))?),
    ];
    let cfg = SolverConfig::new(SolverKind::ActiveSet);
    let mut out = Vec::new();
    for (name, p) in &problems {
        let off = solve(p, &cfg, Screening::Off, None)?.ensure_converged()?;
        let on = solve(p, &cfg, Screening::On, None)?.ensure_converged()?;
        println!(
            "{name}: {} outer iterations, objective {:.8} (off {:.8}), {:.0}% screened, gap {:.1e}",
            on.rounds,
            on.objective(),
            off.objective(),
            100.0 * on.screening_ratio(),
            on.gap
        );
        out.push(on);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
