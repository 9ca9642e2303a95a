//! CSV ingestion, one-hot expansion of categorical columns and z-score
//! normalization.
//!
//! The pipeline is `load_csv` → `one_hot_encode` → `zscore_normalize`, and
//! produces the immutable [`Dataset`] every other module works on. Missing
//! values are rejected at load time rather than imputed.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
        }
    }
}

/// Column layout of a CSV file. `columns` lists every header field in file
/// order, including the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    pub target: String,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, target: impl Into<String>) -> Self {
        Self {
            columns,
            target: target.into(),
        }
    }

    pub fn validate(&self) -> Result<usize> {
        if self.columns.is_empty() {
            return Err(Error::Schema("no columns declared".into()));
        }
        for (i, c) in self.columns.iter().enumerate() {
            if self.columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        let target = self
            .columns
            .iter()
            .position(|c| c.name == self.target)
            .ok_or_else(|| Error::Schema(format!("missing target column `{}`", self.target)))?;
        if self.columns[target].kind != ColumnKind::Numeric {
            return Err(Error::Schema(format!(
                "target column `{}` must be numeric",
                self.target
            )));
        }
        if self.columns.len() < 2 {
            return Err(Error::Schema("no feature columns declared".into()));
        }
        Ok(target)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Numeric(f64),
    Categorical(String),
}

/// Parsed but not yet encoded table.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub columns: Vec<ColumnSpec>,
    pub target: String,
    pub rows: Vec<Vec<Value>>,
}

impl RawDataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.name == self.target)
            .expect("validated at construction")
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<RawDataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path, schema)
}

/// Parses CSV text; `source` is only used in error messages.
pub fn parse_csv(text: &str, source: impl AsRef<Path>, schema: &Schema) -> Result<RawDataset> {
    let path: PathBuf = source.as_ref().to_path_buf();
    schema.validate()?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile { path });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Header {
            path: path.clone(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();

    if !header.iter().any(|h| h == &schema.target) {
        return Err(Error::Header {
            path,
            message: format!("missing target column `{}`", schema.target),
        });
    }
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    if header.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(Error::Header {
            path,
            message: format!("expected [{}], found [{}]", expected.join(","), header.join(",")),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Header {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let row_no = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if record.len() != schema.columns.len() {
            return Err(Error::Cell {
                path,
                row: row_no,
                column: schema.columns[record.len().min(schema.columns.len() - 1)]
                    .name
                    .clone(),
                message: format!(
                    "expected {} fields, found {}",
                    schema.columns.len(),
                    record.len()
                ),
            });
        }
        let mut values = Vec::with_capacity(record.len());
        for (cell, spec) in record.iter().zip(&schema.columns) {
            let fail = |message: &str| Error::Cell {
                path: path.clone(),
                row: row_no,
                column: spec.name.clone(),
                message: message.to_owned(),
            };
            if cell.contains('"') {
                return Err(fail("quoted fields are not supported"));
            }
            if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
                return Err(fail("missing value"));
            }
            let value = match spec.kind {
                ColumnKind::Numeric => {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| fail(&format!("cannot parse `{cell}` as a number")))?;
                    if !v.is_finite() {
                        return Err(fail("non-finite number"));
                    }
                    Value::Numeric(v)
                }
                ColumnKind::Categorical => Value::Categorical(cell.to_owned()),
            };
            values.push(value);
        }
        rows.push(values);
    }

    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: need at least 2 data rows, found {}",
            path.display(),
            rows.len()
        )));
    }

    Ok(RawDataset {
        columns: schema.columns.clone(),
        target: schema.target.clone(),
        rows,
    })
}

/// Indicator columns produced from one categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalBlock {
    pub column: String,
    /// First output column of the block.
    pub start: usize,
    /// Levels in first-appearance order; level `i` maps to column `start + i`.
    pub levels: Vec<String>,
}

/// Feature matrix after one-hot encoding, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFeatures {
    pub matrix: Array2<f64>,
    pub names: Vec<String>,
    pub target: Array1<f64>,
    pub blocks: Vec<CategoricalBlock>,
}

pub fn one_hot_encode(raw: &RawDataset) -> EncodedFeatures {
    let target_idx = raw.target_index();
    let n = raw.n_rows();

    // Output layout: one entry per raw feature column.
    enum Plan {
        Numeric(usize),
        OneHot { col: usize, levels: Vec<String> },
    }

    let mut plans = Vec::new();
    for (col, spec) in raw.columns.iter().enumerate() {
        if col == target_idx {
            continue;
        }
        match spec.kind {
            ColumnKind::Numeric => plans.push(Plan::Numeric(col)),
            ColumnKind::Categorical => {
                let mut levels: Vec<String> = Vec::new();
                for row in &raw.rows {
                    if let Value::Categorical(s) = &row[col] {
                        if !levels.contains(s) {
                            levels.push(s.clone());
                        }
                    }
                }
                if levels.len() == 1 {
                    log::warn!(
                        "categorical column `{}` has a single level; emitting a constant indicator",
                        spec.name
                    );
                }
                plans.push(Plan::OneHot { col, levels });
            }
        }
    }

    let d: usize = plans
        .iter()
        .map(|p| match p {
            Plan::Numeric(_) => 1,
            Plan::OneHot { levels, .. } => levels.len(),
        })
        .sum();

    let mut matrix = Array2::<f64>::zeros((n, d));
    let mut names = Vec::with_capacity(d);
    let mut blocks = Vec::new();
    let mut offset = 0;
    for plan in &plans {
        match plan {
            Plan::Numeric(col) => {
                names.push(raw.columns[*col].name.clone());
                for (r, row) in raw.rows.iter().enumerate() {
                    if let Value::Numeric(v) = row[*col] {
                        matrix[[r, offset]] = v;
                    }
                }
                offset += 1;
            }
            Plan::OneHot { col, levels } => {
                let name = &raw.columns[*col].name;
                names.extend(levels.iter().map(|l| format!("{name}={l}")));
                for (r, row) in raw.rows.iter().enumerate() {
                    if let Value::Categorical(s) = &row[*col] {
                        let level = levels.iter().position(|l| l == s).expect("level collected");
                        matrix[[r, offset + level]] = 1.0;
                    }
                }
                blocks.push(CategoricalBlock {
                    column: name.clone(),
                    start: offset,
                    levels: levels.clone(),
                });
                offset += levels.len();
            }
        }
    }

    let target = raw
        .rows
        .iter()
        .map(|row| match row[target_idx] {
            Value::Numeric(v) => v,
            Value::Categorical(_) => unreachable!("target validated numeric"),
        })
        .collect();

    EncodedFeatures {
        matrix,
        names,
        target,
        blocks,
    }
}

/// Normalized feature matrix with ground-truth targets.
///
/// Rows are samples. The targets stay in their original units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Wraps features as given, without normalizing them. Checks shapes,
    /// finiteness and `N >= d + 1`.
    pub fn new(x: Array2<f64>, y: Array1<f64>, feature_names: Vec<String>) -> Result<Self> {
        let (n, d) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: feature_names.len(),
            });
        }
        if d == 0 {
            return Err(Error::invalid("dataset has no features"));
        }
        if n < d + 1 {
            return Err(Error::invalid(format!(
                "dataset needs at least d + 1 = {} samples, found {n}",
                d + 1
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Self {
            x,
            y,
            feature_names,
        })
    }

    /// Same as [`Dataset::new`] with generated feature names `x0, x1, ...`.
    pub fn from_arrays(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(x, y, names)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Copy of the dataset with replaced targets. Used to check that passive
    /// strategies never look at labels.
    pub fn with_targets(&self, y: Array1<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.feature_names.clone())
    }
}

/// Standardizes each column in place with the sample standard deviation
/// (divisor `N - 1`). Constant columns become zero.
pub fn zscore_columns(matrix: &mut Array2<f64>) {
    let n = matrix.nrows();
    if n < 2 {
        return;
    }
    for mut col in matrix.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if sd <= f64::EPSILON * mean.abs().max(1.0) {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mean) / sd);
        }
    }
}

pub fn zscore_normalize(features: EncodedFeatures) -> Result<Dataset> {
    let EncodedFeatures {
        mut matrix,
        names,
        target,
        ..
    } = features;
    if matrix.nrows() < 2 {
        return Err(Error::invalid("normalization needs at least 2 rows"));
    }
    zscore_columns(&mut matrix);
    Dataset::new(matrix, target, names)
}

/// `load_csv` → `one_hot_encode` → `zscore_normalize`.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let raw = load_csv(path, schema)?;
    zscore_normalize(one_hot_encode(&raw))
}
