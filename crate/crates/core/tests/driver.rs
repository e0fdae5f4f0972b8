mod common;

use boxscreen::duality::is_dual_feasible;
use boxscreen::harness::generate::{gen_nnls, GenSpec};
use boxscreen::{solve, Error, Screening, SolverConfig, SolverKind, TraceRecord};
use common::{instance, primal_value, Kind, KINDS};
use proptest::prelude::*;

const SOLVERS: [SolverKind; 3] = [
    SolverKind::ProjectedGradient,
    SolverKind::CoordinateDescent,
    SolverKind::ActiveSet,
];

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
fn synthetic_nnls_on_and_off_agree() {
    let p = gen_nnls(&GenSpec::nnls(50, 100, 3)).unwrap();
    let cfg = SolverConfig::new(SolverKind::CoordinateDescent);
    let on = solve(&p, &cfg, Screening::On, None).unwrap();
    let off = solve(&p, &cfg, Screening::Off, None).unwrap();
    assert!(on.converged && off.converged);
    let (fon, foff) = (primal_value(&p, &on.x), primal_value(&p, &off.x));
    assert!((fon - foff).abs() <= 1e-8 * foff.abs(), "{fon} vs {foff}");
    assert!(on.screening_ratio() > 0.5, "ratio {}", on.screening_ratio());
    assert!(off.sat_lower.is_empty() && off.sat_upper.is_empty());
}

#[test]
fn results_satisfy_their_invariants() {
    for kind in KINDS {
        for seed in 0..5 {
            let p = instance(kind, 500 + seed);
            for solver in SOLVERS {
                let cfg = SolverConfig::new(solver);
                let res = solve(&p, &cfg, Screening::On, None).unwrap();
                assert!(
                    res.converged && res.gap < cfg.gap_tol,
                    "{kind:?} {solver:?} gap {}",
                    res.gap
                );
                p.is_feasible(&res.x).unwrap();
                assert!(is_dual_feasible(&p, &res.theta), "{kind:?} {solver:?}");
                assert_eq!(res.trace[0].screening_ratio, 0.0);
                for r in &res.trace {
                    let want = (p.n() - r.preserved_count) as f64 / p.n() as f64;
                    assert_eq!(r.screening_ratio, want);
                }
                assert!(res
                    .trace
                    .windows(2)
                    .all(|w| w[0].screening_ratio <= w[1].screening_ratio));
                assert!(res.trace.windows(2).all(|w| w[0].elapsed <= w[1].elapsed));
                for &j in &res.sat_lower {
                    assert_eq!(res.x[j], p.lower()[j]);
                }
                for &j in &res.sat_upper {
                    assert_eq!(res.x[j], p.upper()[j]);
                }
            }
        }
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    for kind in KINDS {
        let p = instance(kind, 77);
        for solver in SOLVERS {
            let cfg = SolverConfig::new(solver);
            let a = solve(&p, &cfg, Screening::On, None).unwrap();
            let b = solve(&p, &cfg, Screening::On, None).unwrap();
            assert_eq!(without_time(&a.trace), without_time(&b.trace));
            assert_eq!(a.x, b.x);
            assert_eq!(a.theta, b.theta);
        }
    }
}

#[test]
fn round_budget_reports_not_converged() {
    let p = instance(Kind::Bvls, 3);
    let cfg = SolverConfig::new(SolverKind::ProjectedGradient)
        .with_gap_tol(1e-14)
        .with_max_rounds(2);
    let res = solve(&p, &cfg, Screening::On, None).unwrap();
    assert!(!res.converged);
    assert_eq!(res.rounds, 2);
    assert_eq!(res.trace.len(), 3);
    assert!(matches!(
        res.ensure_converged(),
        Err(Error::NotConverged { rounds: 2, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Screened coordinates sit at the bound of a tight reference solution,
    /// and screening does not change the objective reached.
    #[test]
    fn screening_is_safe_end_to_end(seed in 0u64..1_000_000, k in 0usize..3, s in 0usize..3) {
        let p = instance(KINDS[k], seed);
        let reference = solve(&p, &SolverConfig::new(SolverKind::ActiveSet).with_gap_tol(1e-12), Screening::Off, None).unwrap();
        let cfg = SolverConfig::new(SOLVERS[s]).with_gap_tol(1e-10);
        let on = solve(&p, &cfg, Screening::On, None).unwrap();
        let off = solve(&p, &cfg, Screening::Off, None).unwrap();
        prop_assert!(on.converged && off.converged);
        for &j in &on.sat_lower {
            prop_assert!((reference.x[j] - p.lower()[j]).abs() <= 1e-7, "lower {j}");
        }
        for &j in &on.sat_upper {
            prop_assert!((reference.x[j] - p.upper()[j]).abs() <= 1e-7, "upper {j}");
        }
        let (fon, foff) = (primal_value(&p, &on.x), primal_value(&p, &off.x));
        prop_assert!((fon - foff).abs() <= 1e-8 * foff.abs().max(1.0));
    }
}
