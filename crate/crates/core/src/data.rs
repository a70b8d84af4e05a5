//! Synthetic toy datasets, CSV ingestion and k-fold splits.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Targets {
    Real(Vec<f64>),
    Class { labels: Vec<usize>, classes: Vec<String> },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match self {
            Targets::Class { labels, .. } => Some(labels),
            Targets::Real(_) => None,
        }
    }

    pub fn real(&self) -> Option<&[f64]> {
        match self {
            Targets::Real(v) => Some(v),
            Targets::Class { .. } => None,
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self {
            Targets::Class { classes, .. } => Some(classes.len()),
            Targets::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Targets,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }
}

/// f(x) = ¼(x − ½)³ + ½x² − x + ⅕.
pub fn regression_target(x: f64) -> f64 {
    let u = x - 0.5;
    0.25 * u * u * u + 0.5 * x * x - x + 0.2
}

pub const REGRESSION_CLUSTER_SIZE: usize = 100;
pub const REGRESSION_CLUSTER_STD: f64 = 0.07;
pub const REGRESSION_NOISE_STD: f64 = 0.02;

/// 100 inputs around −1, then 100 around +1, with noisy targets.
pub fn gen_regression_1d(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, REGRESSION_NOISE_STD).expect("valid std");
    let n = 2 * REGRESSION_CLUSTER_SIZE;
    let mut x = Array2::zeros((n, 1));
    let mut y = Vec::with_capacity(n);
    for (c, center) in [-1.0, 1.0].into_iter().enumerate() {
        let cluster = Normal::new(center, REGRESSION_CLUSTER_STD).expect("valid std");
        for i in 0..REGRESSION_CLUSTER_SIZE {
            let xi = cluster.sample(&mut rng);
            x[[c * REGRESSION_CLUSTER_SIZE + i, 0]] = xi;
            y.push(regression_target(xi) + noise.sample(&mut rng));
        }
    }
    Dataset {
        x,
        y: Targets::Real(y),
        feature_names: vec!["x".into()],
    }
}

pub const BANANA_DEFAULT_COUNTS: (usize, usize) = (183, 217);
const BANANA_JITTER: f64 = 0.3;

/// Two interleaved crescents. The noise-free arcs span [−3, 3] × [−1.5, 1.5]
/// and the jitter is truncated at ±1, so every point lies in [−4, 4]².
/// Class 0 rows come first.
pub fn gen_banana_like(seed: u64, n_class0: usize, n_class1: usize) -> Result<Dataset> {
    if n_class0 < 10 || n_class1 < 10 {
        return Err(Error::domain(format!(
            "need at least 10 points per class, got ({n_class0}, {n_class1})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rand_distr::Uniform::new(0.0, PI).expect("valid range");
    let jitter = Normal::new(0.0, BANANA_JITTER).expect("valid std");
    let draw = |rng: &mut ChaCha8Rng| loop {
        let e: f64 = jitter.sample(rng);
        if e.abs() <= 1.0 {
            return e;
        }
    };
    let n = n_class0 + n_class1;
    let mut x = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = usize::from(i >= n_class0);
        let t = angle.sample(&mut rng);
        let (u, v) = if class == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        x[[i, 0]] = 2.0 * (u - 0.5) + draw(&mut rng);
        x[[i, 1]] = 2.0 * (v - 0.25) + draw(&mut rng);
        labels.push(class);
    }
    Ok(Dataset {
        x,
        y: Targets::Class {
            labels,
            classes: vec!["0".into(), "1".into()],
        },
        feature_names: vec!["x1".into(), "x2".into()],
    })
}

/// Disjoint, exhaustive test folds after a seeded shuffle. The first
/// n mod k folds hold one extra index.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || k > n {
        return Err(Error::domain(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let test = idx[start..start + size].to_vec();
        let train = idx[..start].iter().chain(&idx[start + size..]).copied().collect();
        folds.push((train, test));
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Label,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Column roles for a CSV file. Every header column must be listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Every column continuous except `label`.
    pub fn all_continuous(header: &[&str], label: &str) -> Self {
        Schema {
            columns: header
                .iter()
                .map(|h| ColumnSpec {
                    name: h.to_string(),
                    kind: if *h == label { ColumnKind::Label } else { ColumnKind::Continuous },
                })
                .collect(),
        }
    }

    fn label_count(&self) -> usize {
        self.columns.iter().filter(|c| c.kind == ColumnKind::Label).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Column {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
}

/// Parsed CSV contents before encoding and scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Column>,
    labels: Vec<usize>,
    classes: Vec<String>,
    dropped_rows: usize,
}

impl Table {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Class names, sorted; label i refers to `classes()[i]`.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Rows removed because a cell was empty, "?" or "NA".
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "na" | "NaN" | "nan")
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Csv(e),
        })
}

/// Column names from the header row.
pub fn read_header(path: &Path) -> Result<Vec<String>> {
    Ok(open_csv(path)?.headers()?.iter().map(str::to_string).collect())
}

/// Reads a comma-separated file with a header row.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Table> {
    if schema.label_count() != 1 {
        return Err(Error::Load {
            row: 0,
            column: String::new(),
            message: format!("schema needs exactly one label column, has {}", schema.label_count()),
        });
    }
    let mut rdr = open_csv(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut kinds = Vec::with_capacity(header.len());
    for h in &header {
        let spec = schema.columns.iter().find(|c| &c.name == h).ok_or_else(|| Error::Load {
            row: 1,
            column: h.clone(),
            message: "column missing from schema".into(),
        })?;
        kinds.push(spec.kind);
    }
    for c in &schema.columns {
        if !header.contains(&c.name) {
            return Err(Error::Load {
                row: 1,
                column: c.name.clone(),
                message: "schema column missing from file".into(),
            });
        }
    }
    let mut cont: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    let mut cat: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut raw_labels = Vec::new();
    let mut dropped = 0;
    for (i, rec) in rdr.records().enumerate() {
        // Header is row 1.
        let row = i + 2;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Load {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        if rec.iter().zip(&kinds).any(|(c, k)| *k != ColumnKind::Ignore && is_missing(c)) {
            dropped += 1;
            continue;
        }
        for (j, cell) in rec.iter().enumerate() {
            match kinds[j] {
                ColumnKind::Continuous => {
                    let v: f64 = cell.parse().map_err(|_| Error::Load {
                        row,
                        column: header[j].clone(),
                        message: format!("cannot parse {cell:?} as a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Load {
                            row,
                            column: header[j].clone(),
                            message: format!("non-finite value {cell:?}"),
                        });
                    }
                    cont[j].push(v);
                }
                ColumnKind::Categorical => cat[j].push(cell.to_string()),
                ColumnKind::Label => raw_labels.push(cell.to_string()),
                ColumnKind::Ignore => {}
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::Load {
            row: 0,
            column: String::new(),
            message: "no complete rows".into(),
        });
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    let classes: Vec<String> = raw_labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = raw_labels
        .iter()
        .map(|l| classes.binary_search(l).expect("level collected above"))
        .collect();
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (j, k) in kinds.iter().enumerate() {
        match k {
            ColumnKind::Continuous => {
                names.push(header[j].clone());
                columns.push(Column::Continuous(std::mem::take(&mut cont[j])));
            }
            ColumnKind::Categorical => {
                names.push(header[j].clone());
                columns.push(Column::Categorical(std::mem::take(&mut cat[j])));
            }
            _ => {}
        }
    }
    Ok(Table {
        names,
        columns,
        labels,
        classes,
        dropped_rows: dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    Scaled { name: String, mean: f64, std: f64 },
    OneHot { name: String, levels: Vec<String> },
}

impl Encoder {
    fn width(&self) -> usize {
        match self {
            Encoder::Scaled { .. } => 1,
            Encoder::OneHot { levels, .. } => levels.len(),
        }
    }
}

/// Standard scaling and one-hot levels, fitted on one split of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub encoders: Vec<Encoder>,
}

impl Preprocessor {
    /// Population mean and standard deviation per continuous column, and the
    /// sorted set of levels per categorical column, over `rows` only. A
    /// constant column keeps a unit scale.
    pub fn fit(table: &Table, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("cannot fit preprocessing on an empty split"));
        }
        let n = rows.len() as f64;
        let encoders = table
            .names
            .iter()
            .zip(&table.columns)
            .map(|(name, col)| match col {
                Column::Continuous(v) => {
                    let mean = rows.iter().map(|&r| v[r]).sum::<f64>() / n;
                    let var = rows.iter().map(|&r| (v[r] - mean).powi(2)).sum::<f64>() / n;
                    let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                    Encoder::Scaled { name: name.clone(), mean, std }
                }
                Column::Categorical(v) => Encoder::OneHot {
                    name: name.clone(),
                    levels: rows.iter().map(|&r| v[r].clone()).collect::<BTreeSet<_>>().into_iter().collect(),
                },
            })
            .collect();
        Ok(Preprocessor { encoders })
    }

    pub fn output_dim(&self) -> usize {
        self.encoders.iter().map(Encoder::width).sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.encoders
            .iter()
            .flat_map(|e| match e {
                Encoder::Scaled { name, .. } => vec![name.clone()],
                Encoder::OneHot { name, levels } => levels.iter().map(|l| format!("{name}={l}")).collect(),
            })
            .collect()
    }

    /// Encodes `rows` of the table. Unseen categorical levels become all-zero
    /// blocks; their count is returned alongside the dataset.
    pub fn transform(&self, table: &Table, rows: &[usize]) -> Result<(Dataset, usize)> {
        if self.encoders.len() != table.columns.len() {
            return Err(Error::Dimension {
                expected: self.encoders.len(),
                got: table.columns.len(),
            });
        }
        let mut x = Array2::zeros((rows.len(), self.output_dim()));
        let mut unknown = 0;
        let mut offset = 0;
        for (enc, col) in self.encoders.iter().zip(&table.columns) {
            match (enc, col) {
                (Encoder::Scaled { mean, std, .. }, Column::Continuous(v)) => {
                    for (i, &r) in rows.iter().enumerate() {
                        x[[i, offset]] = (v[r] - mean) / std;
                    }
                }
                (Encoder::OneHot { levels, .. }, Column::Categorical(v)) => {
                    for (i, &r) in rows.iter().enumerate() {
                        match levels.binary_search(&v[r]) {
                            Ok(k) => x[[i, offset + k]] = 1.0,
                            Err(_) => unknown += 1,
                        }
                    }
                }
                _ => return Err(Error::domain("preprocessor does not match table columns")),
            }
            offset += enc.width();
        }
        if unknown > 0 {
            log::warn!("{unknown} categorical values were not seen during fitting");
        }
        let labels = rows.iter().map(|&r| table.labels[r]).collect();
        Ok((
            Dataset {
                x,
                y: Targets::Class {
                    labels,
                    classes: table.classes.clone(),
                },
                feature_names: self.feature_names(),
            },
            unknown,
        ))
    }

    /// Undoes the scaling of continuous features in place; one-hot columns are
    /// left as they are.
    pub fn inverse_scale(&self, x: &mut Array2<f64>) -> Result<()> {
        if x.ncols() != self.output_dim() {
            return Err(Error::Dimension {
                expected: self.output_dim(),
                got: x.ncols(),
            });
        }
        let mut offset = 0;
        for enc in &self.encoders {
            if let Encoder::Scaled { mean, std, .. } = enc {
                x.column_mut(offset).mapv_inplace(|v| v * std + mean);
            }
            offset += enc.width();
        }
        Ok(())
    }
}
