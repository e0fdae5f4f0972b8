//! Screening ratio per round for several choices of the translation
//! direction `t` on one NNLS problem. Writes nothing; see `boxscreen
//! compare-t` for the CSV version.
//!
//! `cargo run --release --example translation_strategies`

use boxscreen::harness::bench::{compare_translations, default_strategies, CompareReport};
use boxscreen::harness::generate::{gen_nnls, GenSpec};
use boxscreen::{Result, SolverConfig, SolverKind};

pub fn run_example() -> Result<CompareReport> {
    let p = gen_nnls(&GenSpec::nnls(100, 200, 11))?;
    let cfg = SolverConfig::new(SolverKind::CoordinateDescent);
    let report = compare_translations(&p, &cfg, &default_strategies(&p))?;

    let len = report.curves.first().map_or(0, |c| c.ratios.len());
    let marks: Vec<usize> = (0..=8).map(|k| k * (len - 1) / 8).collect();
    print!("{:<18}", "round");
    for r in &marks {
        print!("{r:>7}");
    }
    println!();
    for c in &report.curves {
        print!("{:<18}", c.label);
        for &r in &marks {
            print!("{:>7.3}", c.ratios[r]);
        }
        println!();
    }
    for (label, why) in &report.skipped {
        println!("{label}: skipped ({why})");
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
