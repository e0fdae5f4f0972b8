//! Box-width sweep for BVLS with projected gradient: the narrower the box,
//! the more coordinates saturate and the more screening pays off. `--full`
//! runs the `fig2_desk` preset.
//!
//! `cargo run --release --example speedup_vs_saturation [-- --full]`

use boxscreen::harness::bench::{log_grid, run_bench, BenchReport, BenchSpec};
use boxscreen::harness::generate::GenSpec;
use boxscreen::Result;

pub fn run_example(full: bool) -> Result<BenchReport> {
    let mut spec = BenchSpec::fig2_desk();
    if !full {
        spec.repetitions = 1;
        spec.instances = log_grid(1e-3, 0.5, 5)
            .into_iter()
            .map(|b| GenSpec::bvls(80, 40, b, 0))
            .collect();
    }
    let report = run_bench(&spec)?;
    let mut cells = report.cells.clone();
    cells.sort_by(|a, b| a.saturation_ratio.total_cmp(&b.saturation_ratio));
    println!("{:>10} {:>11} {:>8}", "b", "saturation", "speedup");
    for c in &cells {
        println!(
            "{:>10.4} {:>11.3} {:>8.2}",
            c.box_halfwidth.unwrap_or(f64::NAN),
            c.saturation_ratio,
            c.paired_speedup
        );
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    run_example(full).map(|_| ())
}
