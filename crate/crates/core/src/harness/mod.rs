//! Instance generators, problem files, benchmarks and the command line.

pub mod bench;
pub mod cli;
pub mod generate;
pub mod io;

pub use bench::{
    compare_translations, default_strategies, run_bench, saturation_ratio, BenchReport, BenchSpec, CompareReport,
};
pub use generate::{gen_bvls, gen_nnls, generate, Family, GenSpec};
pub use io::{load_problem, save_problem, BoundsSpec};
