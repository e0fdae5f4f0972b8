//! Problem files: Matrix Market or CSV for `A`, one-column CSV for `y`, and
//! a bounds spec.
//!
//! Floats are written with Rust's shortest round-trip formatting, so saved
//! problems reload bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Problem;

fn parse_error(file: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

fn parse_f64(token: &str, file: &Path, line: usize, column: usize) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_error(file, line, column, format!("`{}` is not a number", token.trim())))
}

/// Reads a real Matrix Market file in array or coordinate format.
///
/// Coordinate files are densified; `symmetric` storage is expanded.
pub fn read_matrix_market(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_error(path, 1, 1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_error(
            path,
            1,
            1,
            "expected `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_error(path, 1, 3, format!("unsupported format `{other}`"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_error(path, 1, 4, format!("unsupported field `{}`", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_error(path, 1, 5, format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_error(path, 2, 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .enumerate()
        .map(|(c, tok)| {
            tok.parse()
                .map_err(|_| parse_error(path, size_line, c + 1, format!("`{tok}` is not a size")))
        })
        .collect::<Result<_>>()?;
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_error(path, size_line, 1, format!("expected {expected} sizes")));
    }
    let (m, n) = (dims[0], dims[1]);
    if symmetric && m != n {
        return Err(parse_error(path, size_line, 1, "symmetric matrix must be square"));
    }
    let mut a = DMatrix::zeros(m, n);

    if coordinate {
        let nnz = dims[2];
        let mut count = 0;
        for (ln, l) in body {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_error(path, ln, 1, "expected `row column value`"));
            }
            let index = |c: usize, bound: usize| -> Result<usize> {
                match toks[c].parse::<usize>() {
                    Ok(i) if i >= 1 && i <= bound => Ok(i - 1),
                    _ => Err(parse_error(
                        path,
                        ln,
                        c + 1,
                        format!("index `{}` out of range 1..={bound}", toks[c]),
                    )),
                }
            };
            let (i, j) = (index(0, m)?, index(1, n)?);
            let v = parse_f64(toks[2], path, ln, 3)?;
            a[(i, j)] = v;
            if symmetric {
                a[(j, i)] = v;
            }
            count += 1;
        }
        if count != nnz {
            return Err(parse_error(
                path,
                size_line,
                3,
                format!("header announces {nnz} entries, found {count}"),
            ));
        }
    } else {
        let mut values = Vec::with_capacity(m * n);
        for (ln, l) in body {
            for (c, tok) in l.split_whitespace().enumerate() {
                values.push(parse_f64(tok, path, ln, c + 1)?);
            }
        }
        if symmetric {
            let want = n * (n + 1) / 2;
            if values.len() != want {
                return Err(parse_error(
                    path,
                    size_line,
                    1,
                    format!("expected {want} entries, found {}", values.len()),
                ));
            }
            let mut it = values.into_iter();
            for j in 0..n {
                for i in j..n {
                    let v = it.next().unwrap_or(0.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        } else {
            if values.len() != m * n {
                return Err(parse_error(
                    path,
                    size_line,
                    1,
                    format!("expected {} entries, found {}", m * n, values.len()),
                ));
            }
            a = DMatrix::from_vec(m, n, values);
        }
    }
    Ok(a)
}

/// Dense `array general` Matrix Market file, column-major.
pub fn write_matrix_market(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(24 * a.len() + 64);
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
    for v in a.iter() {
        let _ = writeln!(out, "{v:?}");
    }
    fs::write(path, out)?;
    Ok(())
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?)
}

fn read_csv_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for record in csv_reader(path)?.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let values = record
            .iter()
            .enumerate()
            .map(|(c, tok)| parse_f64(tok, path, line, c + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

/// Headerless CSV, one matrix row per line.
pub fn read_csv_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_csv_rows(path)?;
    let n = rows.first().map_or(0, |(_, r)| r.len());
    if rows.is_empty() || n == 0 {
        return Err(parse_error(path, 1, 1, "empty matrix"));
    }
    if let Some((line, r)) = rows.iter().find(|(_, r)| r.len() != n) {
        return Err(parse_error(
            path,
            *line,
            r.len().min(n) + 1,
            format!("expected {n} columns, found {}", r.len()),
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i].1[j]))
}

/// `.mtx` files go through the Matrix Market reader, anything else is CSV.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => read_matrix_market(path),
        _ => read_csv_matrix(path),
    }
}

/// One-column CSV.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let rows = read_csv_rows(path)?;
    if rows.is_empty() {
        return Err(parse_error(path, 1, 1, "empty vector"));
    }
    if let Some((line, _)) = rows.iter().find(|(_, r)| r.len() != 1) {
        return Err(parse_error(path, *line, 2, "expected a single column"));
    }
    Ok(DVector::from_iterator(rows.len(), rows.iter().map(|(_, r)| r[0])))
}

pub fn write_vector(path: &Path, v: &DVector<f64>) -> Result<()> {
    let mut out = String::with_capacity(24 * v.len());
    for x in v.iter() {
        let _ = writeln!(out, "{x:?}");
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsSpec {
    /// `l = 0`, `u = +inf`.
    Nonneg,
    /// `[lo, hi]` on every coordinate.
    Box(f64, f64),
    /// Two-column `lower,upper` CSV; `inf` allowed as an upper bound.
    File(PathBuf),
}

impl std::str::FromStr for BoundsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "nn" {
            return Ok(Self::Nonneg);
        }
        if let Some(rest) = s.strip_prefix("box:") {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| Error::BadConfig(format!("bounds `{s}`: expected box:lo:hi")))?;
            let parse = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::BadConfig(format!("bounds `{s}`: `{t}` is not a number")))
            };
            return Ok(Self::Box(parse(lo)?, parse(hi)?));
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

impl BoundsSpec {
    pub fn resolve(&self, n: usize) -> Result<(DVector<f64>, DVector<f64>)> {
        match self {
            Self::Nonneg => Ok((DVector::zeros(n), DVector::from_element(n, f64::INFINITY))),
            Self::Box(lo, hi) => Ok((DVector::from_element(n, *lo), DVector::from_element(n, *hi))),
            Self::File(path) => {
                let rows = read_csv_rows(path)?;
                if let Some((line, r)) = rows.iter().find(|(_, r)| r.len() != 2) {
                    return Err(parse_error(path, *line, r.len().min(2) + 1, "expected `lower,upper`"));
                }
                if rows.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{} lists {} bounds, the matrix has {n} columns",
                        path.display(),
                        rows.len()
                    )));
                }
                let lower = DVector::from_iterator(n, rows.iter().map(|(_, r)| r[0]));
                let upper = DVector::from_iterator(n, rows.iter().map(|(_, r)| r[1]));
                Ok((lower, upper))
            }
        }
    }
}

pub fn write_bounds(path: &Path, lower: &DVector<f64>, upper: &DVector<f64>) -> Result<()> {
    let mut out = String::with_capacity(48 * lower.len());
    for (l, u) in lower.iter().zip(upper.iter()) {
        let _ = writeln!(out, "{l:?},{u:?}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Scales every column to unit Euclidean norm.
pub fn normalize_columns(a: &mut DMatrix<f64>) {
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
}

/// Loads and validates a problem; zero rows and zero columns are rejected.
pub fn load_problem(a_path: &Path, y_path: &Path, bounds: &BoundsSpec, normalize: bool) -> Result<Problem> {
    let mut a = read_matrix(a_path)?;
    let y = read_vector(y_path)?;
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "y has {} entries, A has {} rows",
            y.len(),
            a.nrows()
        )));
    }
    if let Some(j) = (0..a.ncols()).find(|&j| a.column(j).iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    if let Some(i) = (0..a.nrows()).find(|&i| a.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroRow(i));
    }
    if normalize {
        normalize_columns(&mut a);
    }
    let (lower, upper) = bounds.resolve(a.ncols())?;
    Problem::new(a, y, lower, upper)
}

/// Paths written by [`save_problem`].
#[derive(Debug, Clone)]
pub struct ProblemFiles {
    pub a: PathBuf,
    pub y: PathBuf,
    pub bounds: PathBuf,
}

/// Writes `A.mtx`, `y.csv` and `bounds.csv` into `dir`.
pub fn save_problem(dir: &Path, p: &Problem) -> Result<ProblemFiles> {
    fs::create_dir_all(dir)?;
    let files = ProblemFiles {
        a: dir.join("A.mtx"),
        y: dir.join("y.csv"),
        bounds: dir.join("bounds.csv"),
    };
    write_matrix_market(&files.a, p.a())?;
    write_vector(&files.y, p.y())?;
    write_bounds(&files.bounds, p.lower(), p.upper())?;
    Ok(files)
}

/// SHA-256 over the dimensions and the bit patterns of `A`, `y`, `l` and `u`.
pub fn instance_hash(p: &Problem) -> String {
    let mut h = Sha256::new();
    h.update((p.m() as u64).to_le_bytes());
    h.update((p.n() as u64).to_le_bytes());
    for v in p
        .a()
        .iter()
        .chain(p.y().iter())
        .chain(p.lower().iter())
        .chain(p.upper().iter())
    {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn identity_matrix_market_nnls() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.mtx");
        fs::write(
            &a,
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n",
        )
        .unwrap();
        let y = dir.path().join("y.csv");
        fs::write(&y, "1.5\n-2\n").unwrap();
        let p = load_problem(&a, &y, &BoundsSpec::Nonneg, false).unwrap();
        assert_eq!(p.a(), &DMatrix::<f64>::identity(2, 2));
        assert_eq!(p.j_inf(), &[0, 1]);
    }

    #[test]
    fn symmetric_array_is_expanded() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.mtx");
        fs::write(&a, "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        let m = read_matrix_market(&a).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }

    #[test]
    fn zero_column_is_named() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "1,0,2\n3,0,4\n").unwrap();
        let y = dir.path().join("y.csv");
        fs::write(&y, "1\n2\n").unwrap();
        let err = load_problem(&a, &y, &BoundsSpec::Nonneg, false).unwrap_err();
        assert!(matches!(err, Error::ZeroColumn(1)));
        assert!(err.to_string().contains("column 1"));
    }

    #[test]
    fn zero_row_is_rejected() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "1,2\n0,0\n").unwrap();
        let y = dir.path().join("y.csv");
        fs::write(&y, "1\n2\n").unwrap();
        assert!(matches!(
            load_problem(&a, &y, &BoundsSpec::Nonneg, false),
            Err(Error::ZeroRow(1))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "1,2\n3,x\n").unwrap();
        match read_csv_matrix(&a) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let m = dir.path().join("b.mtx");
        fs::write(&m, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap();
        match read_matrix_market(&m) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounds_specs() {
        assert_eq!("nn".parse::<BoundsSpec>().unwrap(), BoundsSpec::Nonneg);
        assert_eq!("box:-1:2.5".parse::<BoundsSpec>().unwrap(), BoundsSpec::Box(-1.0, 2.5));
        assert!("box:1".parse::<BoundsSpec>().is_err());
        let dir = tempdir().unwrap();
        let b = dir.path().join("b.csv");
        fs::write(&b, "0,1\n-1,inf\n").unwrap();
        let (l, u) = BoundsSpec::File(b).resolve(2).unwrap();
        assert_eq!(l.as_slice(), &[0.0, -1.0]);
        assert_eq!(u[1], f64::INFINITY);
    }

    #[test]
    fn save_and_reload_is_exact() {
        let a = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, 2.0, 1e-300, -5.5, 7.0]);
        let y = DVector::from_vec(vec![std::f64::consts::PI, -1e17]);
        let lower = DVector::from_vec(vec![0.0, -1.0, 0.25]);
        let upper = DVector::from_vec(vec![f64::INFINITY, 1.0, 3.0]);
        let p = Problem::new(a, y, lower, upper).unwrap();
        let dir = tempdir().unwrap();
        let files = save_problem(dir.path(), &p).unwrap();
        let q = load_problem(&files.a, &files.y, &BoundsSpec::File(files.bounds.clone()), false).unwrap();
        assert_eq!(instance_hash(&p), instance_hash(&q));
    }

    #[test]
    fn normalization_gives_unit_columns() {
        let mut a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 4.0, 0.0]);
        normalize_columns(&mut a);
        assert!((a.column(0).norm() - 1.0).abs() < 1e-15);
        assert_eq!(a[(0, 1)], 1.0);
    }
}
