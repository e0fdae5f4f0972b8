mod common;

use boxscreen::harness::bench::{
    run_bench_with_threads, saturation_ratio, write_report, BenchReport, BenchSpec, RunRow,
};
use boxscreen::harness::generate::{gen_bvls, gen_nnls, GenSpec};
use boxscreen::harness::io::{instance_hash, load_problem, read_matrix, save_problem, BoundsSpec};
use boxscreen::{solve, Screening, SolverConfig, SolverKind, TraceRecord};
use common::{instance, Kind, KINDS};

fn without_time(trace: &[TraceRecord]) -> Vec<TraceRecord> {
    trace
        .iter()
        .map(|r| TraceRecord {
            elapsed: 0.0,
            ..r.clone()
        })
        .collect()
}

#[test]
fn saved_problems_reload_bit_for_bit_and_solve_identically() {
    let dir = tempfile::tempdir().unwrap();
    for (i, kind) in KINDS.into_iter().enumerate() {
        let p = instance(kind, 900 + i as u64);
        let d = dir.path().join(format!("{kind:?}"));
        let files = save_problem(&d, &p).unwrap();
        let q = load_problem(&files.a, &files.y, &BoundsSpec::File(files.bounds.clone()), false).unwrap();
        assert_eq!(instance_hash(&p), instance_hash(&q), "{kind:?}");
        for solver in [SolverKind::CoordinateDescent, SolverKind::ActiveSet] {
            let cfg = SolverConfig::new(solver);
            let a = solve(&p, &cfg, Screening::On, None).unwrap();
            let b = solve(&q, &cfg, Screening::On, None).unwrap();
            assert_eq!(without_time(&a.trace), without_time(&b.trace));
        }
    }
}

#[test]
fn coordinate_matrix_market_is_densified() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    std::fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 3\n1 1 2.5\n3 1 -1\n2 2 4e-1\n",
    )
    .unwrap();
    let a = read_matrix(&path).unwrap();
    assert_eq!((a.nrows(), a.ncols()), (3, 2));
    assert_eq!(a[(0, 0)], 2.5);
    assert_eq!(a[(2, 0)], -1.0);
    assert_eq!(a[(1, 1)], 0.4);
    assert_eq!(a[(0, 1)], 0.0);
}

#[test]
fn generators_are_deterministic_across_calls() {
    let nnls = GenSpec::nnls(40, 90, 12);
    assert_eq!(
        instance_hash(&gen_nnls(&nnls).unwrap()),
        instance_hash(&gen_nnls(&nnls).unwrap())
    );
    let bvls = GenSpec::bvls(40, 20, 0.3, 12);
    assert_eq!(
        instance_hash(&gen_bvls(&bvls).unwrap()),
        instance_hash(&gen_bvls(&bvls).unwrap())
    );
    assert_ne!(
        instance_hash(&gen_bvls(&bvls).unwrap()),
        instance_hash(&gen_bvls(&GenSpec::bvls(40, 20, 0.3, 13)).unwrap())
    );
}

#[test]
fn very_wide_box_saturates_nowhere() {
    for seed in 0..5 {
        let p = gen_bvls(&GenSpec::bvls(60, 20, 1e6, seed)).unwrap();
        let cfg = SolverConfig::new(SolverKind::ActiveSet).with_gap_tol(1e-12);
        let reference = solve(&p, &cfg, Screening::Off, None).unwrap();
        assert_eq!(saturation_ratio(&p, &reference.x), 0.0);
        let on = solve(
            &p,
            &SolverConfig::new(SolverKind::CoordinateDescent),
            Screening::On,
            None,
        )
        .unwrap();
        assert_eq!(on.screening_ratio(), 0.0);
    }
}

fn small_spec(repetitions: usize, seed_per_repetition: bool) -> BenchSpec {
    BenchSpec {
        name: "small".into(),
        solvers: vec![SolverKind::CoordinateDescent, SolverKind::ProjectedGradient],
        repetitions,
        gap_tol: 1e-6,
        inner_passes: 1,
        max_rounds: None,
        seed_per_repetition,
        instances: vec![GenSpec::nnls(20, 40, 3), GenSpec::bvls(30, 15, 0.2, 3)],
    }
}

#[test]
fn bench_pairs_runs_on_identical_instances() {
    for per_rep in [false, true] {
        let report = run_bench_with_threads(&small_spec(3, per_rep), 2).unwrap();
        assert_eq!(report.runs.len(), 2 * 2 * 3 * 2);
        for cell in &report.cells {
            assert_eq!(cell.failures, 0);
            let rows: Vec<&RunRow> = report.runs.iter().filter(|r| r.cell == cell.cell).collect();
            for rep in 0..3 {
                let pair: Vec<&&RunRow> = rows.iter().filter(|r| r.repetition == rep).collect();
                assert_eq!(pair.len(), 2);
                assert_eq!(pair[0].screening, Screening::Off);
                assert_eq!(pair[1].screening, Screening::On);
                assert_eq!(pair[0].instance_hash, pair[1].instance_hash);
                assert!((pair[0].objective - pair[1].objective).abs() <= 1e-6 * pair[0].objective.abs().max(1.0));
            }
            let hashes: std::collections::HashSet<&str> = rows.iter().map(|r| r.instance_hash.as_str()).collect();
            assert_eq!(hashes.len(), if per_rep { 3 } else { 1 });
        }
    }
}

#[test]
fn bench_report_files_round_trip() {
    let report = run_bench_with_threads(&small_spec(1, false), 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &report).unwrap();
    let json: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json, report);
    let rows: Vec<RunRow> = csv::Reader::from_path(dir.path().join("runs.csv"))
        .unwrap()
        .deserialize()
        .map(|r| r.unwrap())
        .collect();
    assert_eq!(rows, report.runs);
}

#[test]
fn mixed_bounds_load_from_a_bounds_file() {
    let p = instance(Kind::Mixed, 5);
    let dir = tempfile::tempdir().unwrap();
    let files = save_problem(dir.path(), &p).unwrap();
    let text = std::fs::read_to_string(&files.bounds).unwrap();
    assert_eq!(text.contains("inf"), !p.all_upper_finite());
    let q = load_problem(&files.a, &files.y, &BoundsSpec::File(files.bounds), false).unwrap();
    assert_eq!(q.j_inf(), p.j_inf());
}
