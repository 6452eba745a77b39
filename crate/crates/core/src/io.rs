//! CSV and JSON serialization of the numeric types: square matrices with a
//! `dim=n` header, general matrices with a `rows=r,cols=c` header, kernels
//! and joint measures with label headers, finite spaces as JSON label lists.
//!
//! All output uses LF line endings and dot decimals; lines starting with `#`
//! are comments and are skipped on read.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::markov::{FiniteSpace, JointMeasure, MarkovKernel, ProbVector};
use crate::matfun::{SPDMatrix, SymMatrix};

fn fmt(v: f64) -> String {
    // shortest representation that round-trips f64
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn content_lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn parse_row(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| GeomError::validation(format!("{what}: bad number {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(GeomError::dims(
            format!("{expected} columns"),
            format!("{} in {what}", values.len()),
        ));
    }
    Ok(values)
}

/// Square matrix, row-major, `dim=n` header.
pub fn write_square_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("dim={}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_square_matrix(text: &str) -> Result<DMatrix<f64>> {
    let lines = content_lines(text);
    let header = lines
        .first()
        .ok_or_else(|| GeomError::validation("empty matrix file"))?;
    let dim: usize = header
        .strip_prefix("dim=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| GeomError::validation(format!("expected dim=n header, got {header:?}")))?;
    if lines.len() != dim + 1 {
        return Err(GeomError::dims(
            format!("{dim} data rows"),
            format!("{}", lines.len() - 1),
        ));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for (i, line) in lines[1..].iter().enumerate() {
        let row = parse_row(line, dim, &format!("row {i}"))?;
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn write_sym_matrix(m: &SymMatrix) -> String {
    write_square_matrix(m.as_matrix())
}

pub fn read_sym_matrix(text: &str) -> Result<SymMatrix> {
    SymMatrix::new(read_square_matrix(text)?)
}

pub fn read_spd_matrix(text: &str) -> Result<SPDMatrix> {
    SPDMatrix::new(read_sym_matrix(text)?)
}

/// General matrix, `rows=r,cols=c` header. Datasets store observations as
/// columns.
pub fn write_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("rows={},cols={}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(text: &str) -> Result<DMatrix<f64>> {
    let lines = content_lines(text);
    let header = lines
        .first()
        .ok_or_else(|| GeomError::validation("empty matrix file"))?;
    let parse_header = || -> Option<(usize, usize)> {
        let rest = header.strip_prefix("rows=")?;
        let (r, c) = rest.split_once(",cols=")?;
        Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
    };
    let (rows, cols) = parse_header().ok_or_else(|| {
        GeomError::validation(format!("expected rows=r,cols=c header, got {header:?}"))
    })?;
    if lines.len() != rows + 1 {
        return Err(GeomError::dims(
            format!("{rows} data rows"),
            format!("{}", lines.len() - 1),
        ));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, line) in lines[1..].iter().enumerate() {
        let row = parse_row(line, cols, &format!("row {i}"))?;
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Finite space as a JSON array of labels.
pub fn write_space(space: &FiniteSpace) -> String {
    let labels: Vec<String> = space
        .labels()
        .iter()
        .map(|l| format!("{:?}", l))
        .collect();
    format!("[{}]\n", labels.join(","))
}

pub fn read_space(text: &str) -> Result<FiniteSpace> {
    let value: serde_json::Value = serde_json::from_str(text.trim())
        .map_err(|e| GeomError::validation(format!("bad JSON label list: {e}")))?;
    let arr = value
        .as_array()
        .ok_or_else(|| GeomError::validation("expected a JSON array of labels"))?;
    let labels: Vec<String> = arr
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| GeomError::validation("labels must be strings"))
        })
        .collect::<Result<_>>()?;
    FiniteSpace::new(labels)
}

/// Labelled table: first cell empty, then column labels; each data row is
/// prefixed by its row label. Shared by kernels and joint measures.
fn write_labelled(
    row_labels: &[String],
    col_labels: &[String],
    entries: &DMatrix<f64>,
) -> String {
    let mut out = String::new();
    out.push(',');
    out.push_str(&col_labels.join(","));
    out.push('\n');
    for (i, label) in row_labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..col_labels.len() {
            out.push(',');
            out.push_str(&fmt(entries[(i, j)]));
        }
        out.push('\n');
    }
    out
}

fn read_labelled(text: &str) -> Result<(Vec<String>, Vec<String>, DMatrix<f64>)> {
    let lines = content_lines(text);
    let header = lines
        .first()
        .ok_or_else(|| GeomError::validation("empty labelled CSV"))?;
    let cols: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    if cols.is_empty() {
        return Err(GeomError::validation("labelled CSV needs column labels"));
    }
    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for line in &lines[1..] {
        let mut parts = line.split(',');
        let label = parts
            .next()
            .ok_or_else(|| GeomError::validation("missing row label"))?
            .trim()
            .to_string();
        let values: Vec<f64> = parts
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| GeomError::validation(format!("bad number {tok:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != cols.len() {
            return Err(GeomError::dims(
                format!("{} columns", cols.len()),
                format!("{} in row {label:?}", values.len()),
            ));
        }
        row_labels.push(label);
        data.push(values);
    }
    if row_labels.is_empty() {
        return Err(GeomError::validation("labelled CSV needs data rows"));
    }
    let m = DMatrix::from_fn(row_labels.len(), cols.len(), |i, j| data[i][j]);
    Ok((row_labels, cols, m))
}

pub fn write_kernel(kernel: &MarkovKernel) -> String {
    write_labelled(
        kernel.source().labels(),
        kernel.target().labels(),
        kernel.rows(),
    )
}

pub fn read_kernel(text: &str) -> Result<MarkovKernel> {
    let (rows_labels, col_labels, m) = read_labelled(text)?;
    let source = FiniteSpace::new(rows_labels)?;
    let target = FiniteSpace::new(col_labels)?;
    let rows: Vec<Vec<f64>> = (0..source.size())
        .map(|i| (0..target.size()).map(|j| m[(i, j)]).collect())
        .collect();
    MarkovKernel::new(source, target, rows)
}

pub fn write_joint(mu: &JointMeasure) -> String {
    write_labelled(mu.xspace().labels(), mu.yspace().labels(), mu.table())
}

pub fn read_joint(text: &str) -> Result<JointMeasure> {
    let (row_labels, col_labels, m) = read_labelled(text)?;
    let xspace = FiniteSpace::new(row_labels)?;
    let yspace = FiniteSpace::new(col_labels)?;
    JointMeasure::from_matrix(xspace, yspace, m)
}

/// Probability vector as a one-row labelled CSV.
pub fn write_prob_vector(v: &ProbVector) -> String {
    let m = DMatrix::from_fn(1, v.space().size(), |_, j| v.weights()[j]);
    write_labelled(&["p".to_string()], v.space().labels(), &m)
}

pub fn read_prob_vector(text: &str) -> Result<ProbVector> {
    let (_, col_labels, m) = read_labelled(text)?;
    if m.nrows() != 1 {
        return Err(GeomError::validation("probability vector CSV needs one row"));
    }
    let space = FiniteSpace::new(col_labels)?;
    let weights: Vec<f64> = (0..space.size()).map(|j| m[(0, j)]).collect();
    ProbVector::new(space, weights)
}
