//! One screening step by hand: build a feasible dual point for a primal
//! iterate, turn the duality gap into a safe sphere, and test every column.
//!
//! `cargo run --release --example dual_certificate`

use boxscreen::model::Loss;
use boxscreen::{
    dual_point, duality_gap, eval_dual, eval_primal, gap_safe_radius, select_translation_vector, solve, PrimalPoint,
    Problem, QuadraticLoss, Result, Screening, ScreeningState, SolverConfig, SolverKind, TranslationStrategy,
};
use nalgebra::{DMatrix, DVector};

/// Returns the coordinates screened at the lower bound from an inexact iterate.
pub fn run_example() -> Result<Vec<usize>> {
    let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.2, 0.9, 0.5, 1.0, 0.8, 0.1, 0.3, 0.7, 0.2, 0.4, 0.6]);
    let y = DVector::from_vec(vec![1.0, 0.6, -0.4, 0.1]);
    let p = Problem::nnls(a, y)?;

    // a rough guess; the solution turns out to be (0.98462, 0, 0)
    let x = DVector::from_vec(vec![0.95, 0.02, 0.0]);
    let pt = PrimalPoint::with_forward(&p, x.clone());

    // u = +inf, so the residual is pushed into the dual set along t = -1
    let tv = select_translation_vector(&p, TranslationStrategy::NegOnes)?;
    let dual = dual_point(&p, Some(&tv), &pt)?;
    let primal = eval_primal(&p, &pt)?;
    println!("x      = {:.5?}", x.as_slice());
    println!("P(x)   = {primal:.8}");
    println!("D(th)  = {:.8}", eval_dual(&p, &dual.theta)?);
    println!(
        "gap    = {:.3e} (recomputed {:.3e})",
        dual.gap,
        duality_gap(&p, &pt, &dual.theta)?
    );
    println!("A^T th = {:.5?}", dual.a_t_theta.as_slice());

    let mut st = ScreeningState::new(&p).with_translation(&tv);
    let r = st.set_radius(dual.gap, QuadraticLoss.alpha())?;
    println!(
        "radius = {r:.5} (= sqrt(2 gap): {:.5})",
        gap_safe_radius(dual.gap, 1.0)?
    );
    let (lower, upper) = st.safe_screen_test(dual.a_t_theta.as_slice());
    for j in 0..p.n() {
        let margin = dual.a_t_theta[j] + r * p.a().column(j).norm();
        let verdict = if lower.contains(&j) {
            "screened: x_j = 0 at the optimum"
        } else {
            "kept"
        };
        println!("column {j}: a_j^T theta + r ||a_j|| = {margin:+.5}  {verdict}");
    }
    assert!(upper.is_empty());

    let exact = solve(&p, &SolverConfig::new(SolverKind::ActiveSet), Screening::Off, None)?;
    println!("solution {:.5?}", exact.x.as_slice());
    Ok(lower)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
