//! Labeled input data, label folding, weighted datasets and their file formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, Matrix, RowView};

/// Raw features `Z` with labels `Y` in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledData {
    z: Matrix,
    y: Vec<f64>,
}

impl LabeledData {
    pub fn new(z: Matrix, y: Vec<f64>) -> Result<Self> {
        if z.rows() == 0 || z.cols() == 0 {
            return Err(Error::Empty("labeled data needs n >= 1 and d >= 1".into()));
        }
        if z.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: z.rows(),
                got: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidArgument(format!("label {bad} is not -1 or +1")));
        }
        check_finite(&z)?;
        Ok(Self { z, y })
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.z.cols()
    }

    /// Center every column and scale it to unit standard deviation.
    /// Constant columns are only centered. The result is stored densely.
    pub fn standardize(&mut self) {
        let mut m = self.z.to_dense();
        let (n, d) = (m.rows(), m.cols());
        for j in 0..d {
            let mean = (0..n).map(|i| m.get(i, j)).sum::<f64>() / n as f64;
            let var = (0..n).map(|i| (m.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            for i in 0..n {
                let centered = m.get(i, j) - mean;
                m.set(i, j, if sd > 0.0 { centered / sd } else { centered });
            }
        }
        self.z = Matrix::Dense(m);
    }
}

fn check_finite(m: &Matrix) -> Result<()> {
    for i in 0..m.rows() {
        let mut bad = false;
        m.row(i).for_each_nonzero(|_, v| bad |= !v.is_finite());
        if bad {
            return Err(Error::NonFinite(format!("row {i} has a NaN or infinite entry")));
        }
    }
    Ok(())
}

/// Folded design matrix `X` (rows `x_i = -Y_i Z_i`) with positive row weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Matrix,
    w: Vec<f64>,
    has_intercept: bool,
}

/// Summary statistics of a weighted dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    pub total_weight: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub omega: f64,
}

impl Dataset {
    pub fn new(x: Matrix, w: Vec<f64>, has_intercept: bool) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Empty("dataset needs n >= 1 and d >= 1".into()));
        }
        if x.rows() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: w.len(),
            });
        }
        if let Some(bad) = w.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and strictly positive, got {bad}"
            )));
        }
        check_finite(&x)?;
        Ok(Self { x, w, has_intercept })
    }

    /// Unit-weight dataset from dense rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            Matrix::Dense(DenseMatrix::from_rows(rows)),
            vec![1.0; rows.len()],
            false,
        )
    }

    pub fn with_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: w.len(),
            });
        }
        self.w = w;
        Self::new(self.x, self.w, self.has_intercept)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    #[inline]
    pub fn row(&self, i: usize) -> RowView<'_> {
        self.x.row(i)
    }

    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Rows `idx` (repetition allowed) with the given weights.
    pub fn subset(&self, idx: &[usize], w: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.x.select_rows(idx), w, self.has_intercept)
    }

    pub fn stats(&self) -> DatasetStats {
        let w_min = self.w.iter().copied().fold(f64::INFINITY, f64::min);
        let w_max = self.w.iter().copied().fold(0.0, f64::max);
        DatasetStats {
            n: self.n(),
            d: self.d(),
            nnz: self.x.nnz(),
            total_weight: self.total_weight(),
            w_min,
            w_max,
            omega: w_max / w_min,
        }
    }
}

/// `x_i = -Y_i Z_i`, optionally after appending a constant-one column to `Z`.
/// All weights are set to one.
pub fn fold_labels(data: &LabeledData, add_intercept: bool) -> Dataset {
    let (n, d) = (data.n(), data.d());
    let d_out = d + usize::from(add_intercept);
    let x = match data.z() {
        Matrix::Dense(z) => {
            let mut x = DenseMatrix::zeros(n, d_out);
            for i in 0..n {
                let s = -data.y[i];
                let row = x.row_mut(i);
                for (o, &v) in row.iter_mut().zip(z.row(i)) {
                    *o = s * v;
                }
                if add_intercept {
                    row[d] = s;
                }
            }
            Matrix::Dense(x)
        }
        Matrix::Sparse(z) => {
            let rows: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|i| {
                    let s = -data.y[i];
                    let (ix, vs) = z.row(i);
                    let mut r: Vec<(usize, f64)> =
                        ix.iter().zip(vs).map(|(&j, &v)| (j, s * v)).collect();
                    if add_intercept {
                        r.push((d, s));
                    }
                    r
                })
                .collect();
            Matrix::Sparse(CsrMatrix::from_row_entries(d_out, &rows))
        }
    };
    Dataset {
        x,
        w: vec![1.0; n],
        has_intercept: add_intercept,
    }
}

/// Input file format for labeled data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Libsvm,
    Csv,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "libsvm" | "svmlight" => Ok(Self::Libsvm),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Load labeled data. For CSV, `label_column` defaults to the last column.
pub fn load_dataset(
    path: &Path,
    format: InputFormat,
    label_column: Option<usize>,
) -> Result<LabeledData> {
    let reader = open(path)?;
    match format {
        InputFormat::Libsvm => parse_libsvm(reader),
        InputFormat::Csv => parse_csv(reader, label_column),
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

/// Parse libsvm / svmlight text (`label idx:val ...`, 1-based indices).
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<LabeledData> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let label = parse_number(toks.next().unwrap_or_default(), line_no)?;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in toks {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected index:value, got {tok:?}"),
            })?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "feature indices are 1-based".into(),
                });
            }
            let val = parse_number(val, line_no)?;
            entries.push((idx - 1, val));
            max_col = max_col.max(idx);
        }
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse {
                line: line_no,
                msg: "duplicate feature index".into(),
            });
        }
        rows.push(entries);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Empty("no data rows".into()));
    }
    let y = map_labels(&labels)?;
    let z = Matrix::Sparse(CsrMatrix::from_row_entries(max_col.max(1), &rows));
    LabeledData::new(z, y)
}

/// Parse headerless CSV. `label_column` defaults to the last column.
pub fn parse_csv<R: BufRead>(reader: R, label_column: Option<usize>) -> Result<LabeledData> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let w = *width.get_or_insert(fields.len());
        if fields.len() != w {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {w} fields, got {}", fields.len()),
            });
        }
        if w < 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: "need at least one feature and a label".into(),
            });
        }
        let lc = label_column.unwrap_or(w - 1);
        if lc >= w {
            return Err(Error::InvalidArgument(format!(
                "label column {lc} out of range for {w} fields"
            )));
        }
        for (j, f) in fields.iter().enumerate() {
            let v = parse_number(f, line_no)?;
            if j == lc {
                labels.push(v);
            } else {
                data.push(v);
            }
        }
    }
    let Some(w) = width else {
        return Err(Error::Empty("no data rows".into()));
    };
    let y = map_labels(&labels)?;
    let z = Matrix::Dense(DenseMatrix::from_row_major(labels.len(), w - 1, data));
    LabeledData::new(z, y)
}

/// Map raw labels onto `{-1, +1}`. `{0, 1}` is accepted with `0 -> -1`.
fn map_labels(raw: &[f64]) -> Result<Vec<f64>> {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in raw {
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    distinct.sort_by(f64::total_cmp);
    if distinct.len() > 2 {
        return Err(Error::TooManyClasses(distinct));
    }
    let pm = distinct.iter().all(|&v| v == -1.0 || v == 1.0);
    let zo = distinct.iter().all(|&v| v == 0.0 || v == 1.0);
    if !pm && !zo {
        return Err(Error::LabelEncoding(distinct));
    }
    Ok(raw.iter().map(|&v| if v == 1.0 { 1.0 } else { -1.0 }).collect())
}

/// Format with 17 significant digits; parses back to the identical `f64`.
pub fn fmt_exact(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write labeled data (CSV has the label as its last column).
pub fn write_labeled(path: &Path, data: &LabeledData, format: InputFormat) -> Result<()> {
    let mut out = create(path)?;
    write_labeled_to(&mut out, data, format).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn write_labeled_to<W: Write>(
    out: &mut W,
    data: &LabeledData,
    format: InputFormat,
) -> std::io::Result<()> {
    for i in 0..data.n() {
        let label = if data.y[i] > 0.0 { "1" } else { "-1" };
        match format {
            InputFormat::Csv => {
                for v in data.z.row(i).to_dense(data.d()) {
                    write!(out, "{},", fmt_exact(v))?;
                }
                writeln!(out, "{label}")?;
            }
            InputFormat::Libsvm => {
                write!(out, "{label}")?;
                let mut res = Ok(());
                data.z.row(i).for_each_nonzero(|j, v| {
                    if res.is_ok() {
                        res = write!(out, " {}:{}", j + 1, fmt_exact(v));
                    }
                });
                res?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// Weighted rows in the coreset CSV layout `index,u_weight,x_1,...,x_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRows {
    pub indices: Vec<usize>,
    pub dataset: Dataset,
}

pub fn write_weighted_rows<W: Write>(
    out: &mut W,
    indices: &[usize],
    weights: &[f64],
    rows: &Matrix,
) -> std::io::Result<()> {
    for (r, (&idx, &u)) in indices.iter().zip(weights).enumerate() {
        write!(out, "{idx},{}", fmt_exact(u))?;
        for v in rows.row(r).to_dense(rows.cols()) {
            write!(out, ",{}", fmt_exact(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_weighted_csv(
    path: &Path,
    indices: &[usize],
    weights: &[f64],
    rows: &Matrix,
) -> Result<()> {
    let mut out = create(path)?;
    write_weighted_rows(&mut out, indices, weights, rows).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn parse_weighted_rows<R: BufRead>(reader: R, has_intercept: bool) -> Result<WeightedRows> {
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    let mut data = Vec::new();
    let mut width = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let w = *width.get_or_insert(fields.len());
        if fields.len() != w || w < 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {w} >= 3 fields, got {}", fields.len()),
            });
        }
        indices.push(fields[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid index {:?}", fields[0]),
        })?);
        weights.push(parse_number(fields[1], line_no)?);
        for f in &fields[2..] {
            data.push(parse_number(f, line_no)?);
        }
    }
    let Some(w) = width else {
        return Err(Error::Empty("no data rows".into()));
    };
    let x = Matrix::Dense(DenseMatrix::from_row_major(indices.len(), w - 2, data));
    Ok(WeightedRows {
        indices,
        dataset: Dataset::new(x, weights, has_intercept)?,
    })
}

pub fn read_weighted_csv(path: &Path, has_intercept: bool) -> Result<WeightedRows> {
    parse_weighted_rows(open(path)?, has_intercept)
}
