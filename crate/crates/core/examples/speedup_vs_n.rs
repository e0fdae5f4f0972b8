//! Paired screening off/on timings for NNLS with coordinate descent as the
//! number of columns grows. `--full` runs the `table1_desk` preset.
//!
//! `cargo run --release --example speedup_vs_n [-- --full]`

use boxscreen::harness::bench::{run_bench, BenchReport, BenchSpec};
use boxscreen::harness::generate::GenSpec;
use boxscreen::Result;

pub fn run_example(full: bool) -> Result<BenchReport> {
    let mut spec = BenchSpec::table1_desk();
    if !full {
        spec.repetitions = 1;
        spec.instances = [50, 100, 150].into_iter().map(|n| GenSpec::nnls(50, n, 1)).collect();
    }
    let report = run_bench(&spec)?;
    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>8} {:>8}",
        "m", "n", "off (s)", "on (s)", "speedup", "ratio"
    );
    for c in &report.cells {
        println!(
            "{:>6} {:>6} {:>10.5} {:>10.5} {:>8.2} {:>8.3}",
            c.m, c.n, c.elapsed_off, c.elapsed_on, c.paired_speedup, c.screening_ratio
        );
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    run_example(full).map(|_| ())
}
