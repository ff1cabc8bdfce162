//! Reading point clouds and edge lists, writing labels, matrices and tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! written here and parsed back is bit-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::clustering::Clustering;
use crate::error::{Error, Result};

/// `m x n` matrix of finite reals, one point per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix(Array2<f64>);

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (m, n) = values.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidData(format!("shape {m}x{n} is empty")));
        }
        if let Some(((j, k), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value {v} at row {j}, column {k}"
            )));
        }
        Ok(DataMatrix(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(j) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidData(format!("row {j} has inconsistent length")));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), n), flat)
            .map_err(|e| Error::InvalidData(e.to_string()))?;
        Self::new(values)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn row(&self, j: usize) -> ndarray::ArrayView1<'_, f64> {
        self.0.row(j)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// Undirected weighted edges over `node_count` nodes; pairs stored as `(j, l)` with `j < l`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub node_count: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Reads a delimited numeric file into a [`DataMatrix`].
pub fn load_points(path: impl AsRef<Path>, delimiter: char, has_header: bool) -> Result<DataMatrix> {
    let rows = read_numeric_rows(path.as_ref(), delimiter, has_header)?;
    DataMatrix::from_rows(&rows)
}

/// Like [`load_points`], but the last column holds integer class labels.
pub fn load_points_with_labels(
    path: impl AsRef<Path>,
    delimiter: char,
    has_header: bool,
) -> Result<(DataMatrix, Clustering)> {
    let path = path.as_ref();
    let rows = read_numeric_rows(path, delimiter, has_header)?;
    let n = rows[0].len();
    if n < 2 {
        return Err(Error::InvalidData(format!(
            "{}: need at least one feature column besides the label",
            path.display()
        )));
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut features = Vec::with_capacity(rows.len());
    for (j, mut row) in rows.into_iter().enumerate() {
        let label = row.pop().expect("non-empty row");
        if label < 0.0 || label.fract() != 0.0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: j + 1,
                col: n,
                message: format!("label {label} is not a non-negative integer"),
            });
        }
        labels.push(label as usize);
        features.push(row);
    }
    Ok((DataMatrix::from_rows(&features)?, Clustering::from_ids(labels)))
}

fn read_numeric_rows(path: &Path, delimiter: char, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lines = BufReader::new(file).lines();
    if has_header {
        lines.next().transpose().map_err(|e| Error::io(path, e))?;
    }
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row_no = rows.len() + 1;
        let row = line
            .split(delimiter)
            .enumerate()
            .map(|(k, field)| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    row: row_no,
                    col: k + 1,
                    message: format!("{:?}: {e}", field.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Ragged {
                    path: path.to_path_buf(),
                    row: row_no,
                    found: row.len(),
                    expected: first.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::NoRows {
            path: path.to_path_buf(),
        });
    }
    Ok(rows)
}

/// Reads `j l [w]` lines. Duplicate undirected pairs are summed; `#` lines are comments.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut max_node = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: line_no,
                col: fields.len().min(4),
                message: "expected `j l [w]`".into(),
            });
        }
        let parse_err = |col: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            row: line_no,
            col,
            message: msg,
        };
        let j: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(1, format!("{:?}: {e}", fields[0])))?;
        let l: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(2, format!("{:?}: {e}", fields[1])))?;
        let w: f64 = match fields.get(2) {
            Some(f) => f.parse().map_err(|e| parse_err(3, format!("{f:?}: {e}")))?,
            None => 1.0,
        };
        if !w.is_finite() {
            return Err(parse_err(3, format!("non-finite weight {w}")));
        }
        if j == l {
            return Err(Error::SelfLoop {
                path: path.to_path_buf(),
                line: line_no,
                node: j,
            });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight {
                path: path.to_path_buf(),
                line: line_no,
                weight: w,
            });
        }
        max_node = max_node.max(Some(j.max(l)));
        *weights.entry((j.min(l), j.max(l))).or_insert(0.0) += w;
    }
    let Some(max_node) = max_node else {
        return Err(Error::NoRows {
            path: path.to_path_buf(),
        });
    };
    Ok(EdgeList {
        node_count: max_node + 1,
        edges: weights.into_iter().map(|((j, l), w)| (j, l, w)).collect(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `point,label` rows; noise is written as `-1`.
pub fn write_clustering(path: impl AsRef<Path>, clustering: &Clustering) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let mut body = String::from("point,label\n");
    for (j, label) in clustering.labels().iter().enumerate() {
        match label {
            Some(l) => body.push_str(&format!("{j},{l}\n")),
            None => body.push_str(&format!("{j},-1\n")),
        }
    }
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a file produced by [`write_clustering`].
pub fn load_clustering(path: impl AsRef<Path>) -> Result<Clustering> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let label = line
            .split(',')
            .nth(1)
            .and_then(|f| f.trim().parse::<i64>().ok())
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                col: 2,
                message: format!("bad label line {line:?}"),
            })?;
        labels.push(usize::try_from(label).ok());
    }
    Ok(Clustering::new(labels))
}

/// Writes a matrix as CSV, optionally appending a label column.
pub fn write_points(
    path: impl AsRef<Path>,
    data: &DataMatrix,
    labels: Option<&Clustering>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let mut body = String::new();
    for (j, row) in data.values().rows().into_iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        if let Some(labels) = labels {
            fields.push(match labels.labels()[j] {
                Some(l) => l.to_string(),
                None => "-1".into(),
            });
        }
        body.push_str(&fields.join(","));
        body.push('\n');
    }
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
