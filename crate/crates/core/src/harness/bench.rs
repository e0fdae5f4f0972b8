//! Paired screening-off / screening-on timing runs and the translation
//! vector comparison.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{solve, Screening, SolveResult};
use crate::duality::{least_correlated_column, most_correlated_column, select_translation_vector, TranslationStrategy};
use crate::error::{Error, Result};
use crate::harness::generate::{generate, Family, GenSpec, PRNG_NAME};
use crate::harness::io::instance_hash;
use crate::model::{Loss, Problem, QuadraticLoss};
use crate::solvers::{pg_step_size, spectral_norm_estimate, SolverConfig, SolverKind, StepSize};

/// Distance to a bound under which a coordinate counts as saturated.
pub const SATURATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub name: String,
    pub solvers: Vec<SolverKind>,
    pub repetitions: usize,
    pub gap_tol: f64,
    pub inner_passes: usize,
    pub max_rounds: Option<usize>,
    /// Repetition `r` draws a fresh instance with seed `seed + r` instead of
    /// re-timing the same one. Pairs stay on identical instances either way.
    pub seed_per_repetition: bool,
    pub instances: Vec<GenSpec>,
}

/// On-disk form: either a full spec or `preset = "..."` with overrides.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    preset: Option<String>,
    name: Option<String>,
    solvers: Option<Vec<SolverKind>>,
    repetitions: Option<usize>,
    gap_tol: Option<f64>,
    inner_passes: Option<usize>,
    max_rounds: Option<usize>,
    seed_per_repetition: Option<bool>,
    instances: Option<Vec<GenSpec>>,
}

impl BenchSpec {
    /// `m = 200`, `n` in {100, 200, 400, 600}, NNLS, coordinate descent, 5 repetitions.
    pub fn table1_desk() -> Self {
        Self {
            name: "table1_desk".into(),
            solvers: vec![SolverKind::CoordinateDescent],
            repetitions: 5,
            gap_tol: 1e-6,
            inner_passes: 1,
            max_rounds: None,
            seed_per_repetition: true,
            instances: [100, 200, 400, 600]
                .into_iter()
                .map(|n| GenSpec::nnls(200, n, 1))
                .collect(),
        }
    }

    /// `m = 400`, `n = 200`, BVLS, projected gradient, 12 box widths
    /// log-spaced over `[1e-3, 0.5]`, 5 repetitions.
    pub fn fig2_desk() -> Self {
        Self {
            name: "fig2_desk".into(),
            solvers: vec![SolverKind::ProjectedGradient],
            repetitions: 5,
            gap_tol: 1e-6,
            inner_passes: 1,
            max_rounds: None,
            seed_per_repetition: true,
            instances: log_grid(1e-3, 0.5, 12)
                .into_iter()
                .map(|b| GenSpec::bvls(400, 200, b, 1))
                .collect(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "table1_desk" | "table1-desk" => Ok(Self::table1_desk()),
            "fig2_desk" | "fig2-desk" => Ok(Self::fig2_desk()),
            other => Err(Error::BadConfig(format!(
                "unknown preset `{other}` (known: table1_desk, fig2_desk)"
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::BadConfig(e.to_string()))?;
        let mut spec = match &raw.preset {
            Some(p) => Self::preset(p)?,
            None => Self {
                name: String::new(),
                solvers: Vec::new(),
                repetitions: 1,
                gap_tol: 1e-6,
                inner_passes: 1,
                max_rounds: None,
                seed_per_repetition: false,
                instances: Vec::new(),
            },
        };
        if let Some(v) = raw.name {
            spec.name = v;
        }
        if let Some(v) = raw.solvers {
            spec.solvers = v;
        }
        if let Some(v) = raw.repetitions {
            spec.repetitions = v;
        }
        if let Some(v) = raw.gap_tol {
            spec.gap_tol = v;
        }
        if let Some(v) = raw.inner_passes {
            spec.inner_passes = v;
        }
        if raw.max_rounds.is_some() {
            spec.max_rounds = raw.max_rounds;
        }
        if let Some(v) = raw.seed_per_repetition {
            spec.seed_per_repetition = v;
        }
        if let Some(v) = raw.instances {
            spec.instances = v;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::BadConfig("repetitions must be at least 1".into()));
        }
        if self.solvers.is_empty() || self.instances.is_empty() {
            return Err(Error::BadConfig(
                "a bench needs at least one solver and one instance".into(),
            ));
        }
        for g in &self.instances {
            g.validate()?;
        }
        self.solver_config(SolverKind::CoordinateDescent).validate()
    }

    pub fn solver_config(&self, kind: SolverKind) -> SolverConfig {
        let mut cfg = SolverConfig::new(kind)
            .with_gap_tol(self.gap_tol)
            .with_inner_passes(self.inner_passes);
        cfg.max_rounds = self.max_rounds;
        cfg
    }
}

/// `k` points log-spaced between `lo` and `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub cell: usize,
    pub solver: SolverKind,
    pub screening: Screening,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub repetition: usize,
    pub elapsed: f64,
    pub rounds: usize,
    pub gap: f64,
    pub converged: bool,
    pub objective: f64,
    pub screening_ratio: f64,
    pub instance_hash: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub solver: SolverKind,
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub box_halfwidth: Option<f64>,
    pub instance_hash: String,
    /// Median over repetitions.
    pub elapsed_off: f64,
    pub elapsed_on: f64,
    /// `elapsed_off / elapsed_on` on the medians.
    pub speedup: f64,
    /// Median of the per-repetition ratios.
    pub paired_speedup: f64,
    /// Fraction of coordinates of the baseline solution within `1e-7` of a
    /// bound (median over repetitions, like the two ratios below).
    pub saturation_ratio: f64,
    /// Final screening ratio of the screening-on run.
    pub screening_ratio: f64,
    pub rounds_off: usize,
    pub rounds_on: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub name: String,
    pub prng: String,
    pub threads: usize,
    pub gap_tol: f64,
    pub repetitions: usize,
    pub runs: Vec<RunRow>,
    pub cells: Vec<CellSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Fraction of coordinates within [`SATURATION_TOL`] of one of their bounds.
pub fn saturation_ratio(p: &Problem, x: &nalgebra::DVector<f64>) -> f64 {
    let count = (0..p.n())
        .filter(|&j| {
            (x[j] - p.lower()[j]).abs() <= SATURATION_TOL
                || (!p.upper_is_inf(j) && (x[j] - p.upper()[j]).abs() <= SATURATION_TOL)
        })
        .count();
    count as f64 / p.n() as f64
}

/// Sweep parallelism from `BOXSCREEN_THREADS`, default 1.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("BOXSCREEN_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(Error::BadConfig(format!(
                "BOXSCREEN_THREADS must be a positive integer, got `{s}`"
            ))),
        },
    }
}

fn run_row(
    cell: usize,
    g: &GenSpec,
    kind: SolverKind,
    screening: Screening,
    repetition: usize,
    hash: &str,
    outcome: &Result<SolveResult>,
) -> RunRow {
    let mut row = RunRow {
        cell,
        solver: kind,
        screening,
        m: g.m,
        n: g.n,
        seed: g.seed,
        repetition,
        elapsed: f64::NAN,
        rounds: 0,
        gap: f64::NAN,
        converged: false,
        objective: f64::NAN,
        screening_ratio: f64::NAN,
        instance_hash: hash.to_string(),
        error: None,
    };
    match outcome {
        Ok(res) => {
            row.elapsed = res.elapsed;
            row.rounds = res.rounds;
            row.gap = res.gap;
            row.converged = res.converged;
            row.objective = res.objective();
            row.screening_ratio = res.screening_ratio();
            if !res.converged {
                row.error = Some(format!("not converged after {} rounds (gap {:e})", res.rounds, res.gap));
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// The projected-gradient step depends on the instance alone, so it is
/// estimated once here and both runs of a pair get the same fixed step.
fn untimed_step(p: &Problem, cfg: &SolverConfig) -> SolverConfig {
    match (cfg.kind, cfg.step_size) {
        (SolverKind::ProjectedGradient, StepSize::Auto) => {
            let sigma = spectral_norm_estimate(p.a(), cfg.power_iters, cfg.seed);
            cfg.clone()
                .with_step_size(StepSize::Fixed(pg_step_size(sigma, QuadraticLoss.alpha())))
        }
        _ => cfg.clone(),
    }
}

fn run_cell(spec: &BenchSpec, cell: usize, g: &GenSpec, kind: SolverKind) -> (Vec<RunRow>, CellSummary) {
    let mut summary = CellSummary {
        cell,
        solver: kind,
        family: g.family,
        m: g.m,
        n: g.n,
        seed: g.seed,
        box_halfwidth: (g.family == Family::BvlsGaussian).then_some(g.box_halfwidth),
        instance_hash: String::new(),
        elapsed_off: f64::NAN,
        elapsed_on: f64::NAN,
        speedup: f64::NAN,
        paired_speedup: f64::NAN,
        saturation_ratio: f64::NAN,
        screening_ratio: f64::NAN,
        rounds_off: 0,
        rounds_on: 0,
        failures: 0,
    };
    let cfg = spec.solver_config(kind);
    let mut rows = Vec::with_capacity(2 * spec.repetitions);
    let (mut off, mut on, mut paired) = (Vec::new(), Vec::new(), Vec::new());
    let (mut saturation, mut screened) = (Vec::new(), Vec::new());
    let (mut rounds_off, mut rounds_on) = (Vec::new(), Vec::new());
    let mut problem: Option<(u64, Problem, String)> = None;

    for rep in 0..spec.repetitions {
        let mut gr = g.clone();
        if spec.seed_per_repetition {
            gr.seed = g.seed.wrapping_add(rep as u64);
        }
        if problem.as_ref().map(|(s, _, _)| *s) != Some(gr.seed) {
            match generate(&gr) {
                Ok(p) => {
                    let hash = instance_hash(&p);
                    problem = Some((gr.seed, p, hash));
                }
                Err(e) => {
                    summary.failures += 2;
                    rows.push(run_row(cell, &gr, kind, Screening::Off, rep, "", &Err(e)));
                    problem = None;
                    continue;
                }
            }
        }
        let (_, p, hash) = problem.as_ref().expect("instance generated above");
        if summary.instance_hash.is_empty() {
            summary.instance_hash = hash.clone();
        }

        let cfg = untimed_step(p, &cfg);
        let base = solve(p, &cfg, Screening::Off, None);
        let scr = solve(p, &cfg, Screening::On, None);
        if let Ok(b) = &base {
            saturation.push(saturation_ratio(p, &b.x));
            rounds_off.push(b.rounds as f64);
        }
        if let Ok(s) = &scr {
            screened.push(s.screening_ratio());
            rounds_on.push(s.rounds as f64);
        }
        let r_off = run_row(cell, &gr, kind, Screening::Off, rep, hash, &base);
        let r_on = run_row(cell, &gr, kind, Screening::On, rep, hash, &scr);
        let ok_off = r_off.error.is_none();
        let ok_on = r_on.error.is_none();
        summary.failures += usize::from(!ok_off) + usize::from(!ok_on);
        if ok_off {
            off.push(r_off.elapsed);
        }
        if ok_on {
            on.push(r_on.elapsed);
        }
        if ok_off && ok_on {
            paired.push(r_off.elapsed / r_on.elapsed);
        }
        rows.push(r_off);
        rows.push(r_on);
    }
    summary.elapsed_off = median(&off);
    summary.elapsed_on = median(&on);
    summary.speedup = summary.elapsed_off / summary.elapsed_on;
    summary.paired_speedup = median(&paired);
    summary.saturation_ratio = median(&saturation);
    summary.screening_ratio = median(&screened);
    summary.rounds_off = median(&rounds_off).round() as usize;
    summary.rounds_on = median(&rounds_on).round() as usize;
    (rows, summary)
}

/// Runs every (instance, solver) cell: per repetition screening off, then on.
///
/// Solve failures are recorded in the rows and do not stop the sweep.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    run_bench_with_threads(spec, threads_from_env()?)
}

pub fn run_bench_with_threads(spec: &BenchSpec, threads: usize) -> Result<BenchReport> {
    spec.validate()?;
    let cells: Vec<(usize, &GenSpec, SolverKind)> = spec
        .instances
        .iter()
        .flat_map(|g| spec.solvers.iter().map(move |&k| (g, k)))
        .enumerate()
        .map(|(i, (g, k))| (i, g, k))
        .collect();
    let results: Vec<(Vec<RunRow>, CellSummary)> = if threads <= 1 {
        cells.iter().map(|&(i, g, k)| run_cell(spec, i, g, k)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::BadConfig(e.to_string()))?;
        pool.install(|| cells.par_iter().map(|&(i, g, k)| run_cell(spec, i, g, k)).collect())
    };
    let mut report = BenchReport {
        name: spec.name.clone(),
        prng: PRNG_NAME.to_string(),
        threads,
        gap_tol: spec.gap_tol,
        repetitions: spec.repetitions,
        runs: Vec::new(),
        cells: Vec::new(),
    };
    for (rows, summary) in results {
        report.runs.extend(rows);
        report.cells.push(summary);
    }
    Ok(report)
}

/// Writes `runs.csv`, `summary.csv` and `report.json` into `dir`.
pub fn write_report(dir: &Path, report: &BenchReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
    for r in &report.runs {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for c in &report.cells {
        w.serialize(c)?;
    }
    w.flush()?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyCurve {
    pub label: String,
    pub strategy: TranslationStrategy,
    /// Screening ratio per round, padded with the final value to the common grid.
    pub ratios: Vec<f64>,
    pub rounds: usize,
    pub converged: bool,
    pub objective: f64,
    pub sat_lower: Vec<usize>,
    pub sat_upper: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub curves: Vec<StrategyCurve>,
    /// Strategies that produced no interior point, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// `-1`, the most and least correlated columns, the mean column and the
/// least-norm solution of `A^T t = -1`.
pub fn default_strategies(p: &Problem) -> Vec<TranslationStrategy> {
    let most = most_correlated_column(p.a());
    let least = least_correlated_column(p.a());
    let mut out = vec![TranslationStrategy::NegOnes, TranslationStrategy::NegColumn(most)];
    if least != most {
        out.push(TranslationStrategy::NegColumn(least));
    }
    out.push(TranslationStrategy::NegMeanColumn);
    out.push(TranslationStrategy::SolveLinear);
    out
}

/// Screening-on solves of `p`, one per translation strategy.
pub fn compare_translations(
    p: &Problem,
    cfg: &SolverConfig,
    strategies: &[TranslationStrategy],
) -> Result<CompareReport> {
    let mut curves = Vec::new();
    let mut skipped = Vec::new();
    for s in strategies {
        let tv = match select_translation_vector(p, s.clone()) {
            Ok(tv) => tv,
            Err(e) => {
                skipped.push((s.label(), e.to_string()));
                continue;
            }
        };
        let res = solve(p, cfg, Screening::On, Some(&tv))?;
        curves.push(StrategyCurve {
            label: s.label(),
            strategy: s.clone(),
            ratios: res.trace.iter().map(|r| r.screening_ratio).collect(),
            rounds: res.rounds,
            converged: res.converged,
            objective: res.objective(),
            sat_lower: res.sat_lower,
            sat_upper: res.sat_upper,
        });
    }
    let len = curves.iter().map(|c| c.ratios.len()).max().unwrap_or(0);
    for c in &mut curves {
        let last = c.ratios.last().copied().unwrap_or(0.0);
        c.ratios.resize(len, last);
    }
    Ok(CompareReport { curves, skipped })
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

/// `compare_t.csv` (one column per strategy) plus `ratio_<label>.csv` per strategy.
pub fn write_compare(dir: &Path, report: &CompareReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let len = report.curves.first().map_or(0, |c| c.ratios.len());
    let mut w = csv::Writer::from_path(dir.join("compare_t.csv"))?;
    let mut header = vec!["round".to_string()];
    header.extend(report.curves.iter().map(|c| c.label.clone()));
    w.write_record(&header)?;
    for r in 0..len {
        let mut rec = vec![r.to_string()];
        rec.extend(report.curves.iter().map(|c| format!("{:?}", c.ratios[r])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    for c in &report.curves {
        let mut w = csv::Writer::from_path(dir.join(format!("ratio_{}.csv", file_label(&c.label))))?;
        w.write_record(["round", "ratio"])?;
        for (r, v) in c.ratios.iter().enumerate() {
            w.write_record([r.to_string(), format!("{v:?}")])?;
        }
        w.flush()?;
    }
    Ok(())
}
