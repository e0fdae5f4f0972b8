use std::fs;
use std::path::Path;

use boxscreen::harness::cli::run;

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("boxscreen").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_solve_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        cli(&[
            "gen",
            "--family",
            "nnls",
            "--m",
            "30",
            "--n",
            "60",
            "--seed",
            "4",
            "--out-dir",
            path(d)
        ]),
        0
    );
    for f in ["A.mtx", "y.csv", "bounds.csv", "meta.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["seed"], 4);
    assert!(meta["prng"].is_string());

    let trace = d.join("trace.csv");
    let result = d.join("result.json");
    let code = cli(&[
        "solve",
        "--a",
        path(&d.join("A.mtx")),
        "--y",
        path(&d.join("y.csv")),
        "--solver",
        "cd",
        "--screen",
        "on",
        "--tol",
        "1e-6",
        "--trace-out",
        path(&trace),
        "--result-out",
        path(&result),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("round,elapsed_s,primal,dual,gap,preserved,ratio"));
    let res: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(res["converged"], true);
    assert_eq!(res["theta"].as_array().unwrap().len(), 30);
    assert!(res["gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn solve_on_generated_problems() {
    for solver in ["pg", "cd", "active-set"] {
        for screen in ["on", "off"] {
            let code = cli(&[
                "solve",
                "--family",
                "bvls",
                "--m",
                "20",
                "--n",
                "10",
                "--box-halfwidth",
                "0.1",
                "--solver",
                solver,
                "--screen",
                screen,
            ]);
            assert_eq!(code, 0, "{solver} {screen}");
        }
    }
    let code = cli(&[
        "solve",
        "--m",
        "20",
        "--n",
        "40",
        "--t-strategy",
        "neg-mean-column",
        "--inner-passes",
        "2",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn solve_linear_on_a_wide_matrix_is_a_numerical_failure() {
    assert_eq!(
        cli(&["solve", "--m", "10", "--n", "30", "--t-strategy", "solve-linear"]),
        2
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&["solve", "--solver", "newton"]), 1);
    assert_eq!(cli(&["solve", "--t-strategy", "neg-ones-ish"]), 1);
    assert_eq!(
        cli(&["solve", "--a", "/nonexistent/A.mtx", "--y", "/nonexistent/y.csv"]),
        1
    );
    assert_eq!(cli(&["frobnicate"]), 1);
    assert_eq!(cli(&["bench", "--out-dir", "x"]), 1);
    assert_eq!(cli(&["--help"]), 0);
}

#[test]
fn unreachable_tolerance_exits_two() {
    assert_eq!(
        cli(&[
            "solve",
            "--m",
            "20",
            "--n",
            "40",
            "--tol",
            "1e-300",
            "--max-rounds",
            "3"
        ]),
        2
    );
}

#[test]
fn compare_t_writes_curves_on_one_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    assert_eq!(
        cli(&[
            "compare-t",
            "--m",
            "40",
            "--n",
            "80",
            "--seed",
            "2",
            "--out-dir",
            path(&out)
        ]),
        0
    );

    let mut r = csv::Reader::from_path(out.join("compare_t.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(&header[0], "round");
    assert!(header.len() >= 4, "{header:?}");
    let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row.len() == header.len()));

    let mut grids = Vec::new();
    for label in header.iter().skip(1) {
        let file: String = label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
            .collect();
        let mut r = csv::Reader::from_path(out.join(format!("ratio_{file}.csv"))).unwrap();
        let rounds: Vec<usize> = r.records().map(|rec| rec.unwrap()[0].parse().unwrap()).collect();
        grids.push(rounds);
    }
    assert!(grids.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(grids[0].len(), rows.len());
}

#[test]
fn bench_from_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "name = \"small\"\nsolvers = [\"coordinate-descent\", \"projected-gradient\"]\nrepetitions = 2\n\n[[instances]]\nfamily = \"nnls-half-normal\"\nm = 20\nn = 40\nseed = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(cli(&["bench", "--spec", path(&spec), "--out-dir", path(&out)]), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 8);
    assert_eq!(report["cells"].as_array().unwrap().len(), 2);
    assert!(out.join("runs.csv").exists() && out.join("summary.csv").exists());
}
