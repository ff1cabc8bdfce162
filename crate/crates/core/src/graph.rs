//! Neighborhood graphs over point clouds.
//!
//! Neighborhoods use the strict ball `||x_j - x_l|| < radius` and exclude the
//! point itself. Distances are computed per pair without the Gram-matrix
//! shortcut, so the boundary test is not perturbed by cancellation.

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataio::{DataMatrix, EdgeList};
use crate::error::{Error, Result};

/// Relative nudge applied to the selected radius so that the defining
/// neighbor passes the strict `<` test.
pub const RADIUS_NUDGE: f64 = 1.0 / (1u64 << 40) as f64;

/// Symmetric matrix in compressed sparse row form, column indices sorted per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetricMatrix {
    /// Builds from undirected entries: each `(j, l, w)` with `j != l` sets both
    /// `(j, l)` and `(l, j)`; `j == l` sets the diagonal once. Repeats are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (j, l, w) in entries {
            if j >= dim || l >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({j}, {l}) outside {dim}x{dim}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite weight at ({j}, {l})")));
            }
            rows[j].push((l, w));
            if j != l {
                rows[l].push((j, w));
            }
        }
        Ok(Self::from_rows(dim, rows))
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(l, _)| l);
            let mut iter = row.into_iter().peekable();
            while let Some((l, mut w)) = iter.next() {
                while let Some(&(l2, w2)) = iter.peek() {
                    if l2 != l {
                        break;
                    }
                    w += w2;
                    iter.next();
                }
                indices.push(l);
                values.push(w);
            }
            indptr.push(indices.len());
        }
        SparseSymmetricMatrix {
            dim,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_edge_list(edges: &EdgeList) -> Result<Self> {
        Self::from_entries(edges.node_count, edges.edges.iter().copied())
    }

    /// Converts a dense matrix, rejecting asymmetric input.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let (m, n) = dense.dim();
        if m != n {
            return Err(Error::DimensionMismatch { expected: m, found: n });
        }
        let mut rows = vec![Vec::new(); m];
        for j in 0..m {
            for l in 0..m {
                let w = dense[[j, l]];
                if w != dense[[l, j]] {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({j}, {l})")));
                }
                if !w.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite weight at ({j}, {l})")));
                }
                if w != 0.0 {
                    rows[j].push((l, w));
                }
            }
        }
        Ok(Self::from_rows(m, rows))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_rows(dim, vec![Vec::new(); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries (both triangles).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, weight)` pairs of row `j`.
    pub fn row(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[j]..self.indptr[j + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        let range = self.indptr[j]..self.indptr[j + 1];
        match self.indices[range.clone()].binary_search(&l) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored `(j, l, w)` entries of both triangles.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |j| self.row(j).map(move |(l, w)| (j, l, w)))
    }

    /// Row sums `W 1`.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.row(j).map(|(_, w)| w).sum()).collect()
    }

    /// `y = W x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.row(j).map(|(l, w)| w * x[l]).sum();
        }
    }

    /// `x^T W x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        self.entries().map(|(j, l, w)| x[j] * w * x[l]).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for (j, l, w) in self.entries() {
            out[[j, l]] = w;
        }
        out
    }

    /// Difference Laplacian `diag(W 1) - W`.
    pub fn laplacian(&self) -> Self {
        let degrees = self.degrees();
        let rows = (0..self.dim)
            .map(|j| {
                let mut row: Vec<(usize, f64)> = self.row(j).map(|(l, w)| (l, -w)).collect();
                row.push((j, degrees[j]));
                row
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    /// `I - self`, e.g. the normalized Laplacian from a normalized adjacency.
    pub fn identity_minus(&self) -> Self {
        let rows = (0..self.dim)
            .map(|j| {
                let mut row: Vec<(usize, f64)> = self.row(j).map(|(l, w)| (l, -w)).collect();
                row.push((j, 1.0));
                row
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }
}

/// How neighborhoods are formed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NeighborhoodSpec {
    Epsilon { radius: f64 },
    Knn { k: usize },
}

impl NeighborhoodSpec {
    pub fn validate(&self, points: usize) -> Result<()> {
        match *self {
            NeighborhoodSpec::Epsilon { radius } if !(radius.is_finite() && radius > 0.0) => Err(
                Error::InvalidArgument(format!("radius must be finite and positive, got {radius}")),
            ),
            NeighborhoodSpec::Knn { k } if k == 0 || k >= points => Err(Error::InvalidArgument(
                format!("k must satisfy 1 <= k < m, got k={k}, m={points}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn build(&self, data: &DataMatrix) -> Result<SparseSymmetricMatrix> {
        self.validate(data.rows())?;
        match *self {
            NeighborhoodSpec::Epsilon { radius } => epsilon_graph(data, radius),
            NeighborhoodSpec::Knn { k } => knn_graph(data, k),
        }
    }
}

fn distance(data: &DataMatrix, j: usize, l: usize) -> f64 {
    data.row(j)
        .iter()
        .zip(data.row(l).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Dense `m x m` Euclidean distance matrix.
pub fn pairwise_distances(data: &DataMatrix) -> Array2<f64> {
    let m = data.rows();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| (0..m).map(|l| if j == l { 0.0 } else { distance(data, j, l) }).collect())
        .collect();
    let mut out = Array2::zeros((m, m));
    for (j, row) in rows.into_iter().enumerate() {
        for (l, d) in row.into_iter().enumerate() {
            out[[j, l]] = d;
        }
    }
    // distance() is symmetric in its arguments bit-for-bit, but be explicit.
    for j in 0..m {
        for l in 0..j {
            out[[j, l]] = out[[l, j]];
        }
    }
    out
}

/// Unweighted ε-neighborhood graph: `W_jl = 1` iff `0 < ||x_j - x_l|| < radius`.
pub fn epsilon_graph(data: &DataMatrix, radius: f64) -> Result<SparseSymmetricMatrix> {
    NeighborhoodSpec::Epsilon { radius }.validate(data.rows())?;
    let m = data.rows();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (0..m)
                .filter(|&l| l != j)
                .filter(|&l| {
                    let d = distance(data, j.min(l), j.max(l));
                    d > 0.0 && d < radius
                })
                .map(|l| (l, 1.0))
                .collect()
        })
        .collect();
    Ok(SparseSymmetricMatrix::from_rows(m, rows))
}

/// Indices of the `k` nearest other points of `j`; ties go to the lower index.
fn nearest(data: &DataMatrix, j: usize, k: usize) -> Vec<(f64, usize)> {
    let mut others: Vec<(f64, usize)> = (0..data.rows())
        .filter(|&l| l != j)
        .map(|l| (distance(data, j.min(l), j.max(l)), l))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < others.len() {
        others.select_nth_unstable_by(k - 1, by_distance);
        others.truncate(k);
    }
    others.sort_by(by_distance);
    others
}

/// Symmetrized kNN graph `(A + A^T) / 2` with weights in `{0, 1/2, 1}`.
pub fn knn_graph(data: &DataMatrix, k: usize) -> Result<SparseSymmetricMatrix> {
    NeighborhoodSpec::Knn { k }.validate(data.rows())?;
    let m = data.rows();
    let directed: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|j| nearest(data, j, k).into_iter().map(|(_, l)| l).collect())
        .collect();
    let entries = directed
        .iter()
        .enumerate()
        .flat_map(|(j, ls)| ls.iter().map(move |&l| (j, l, 0.5)));
    SparseSymmetricMatrix::from_entries(m, entries)
}

/// `diag(W 1)^{-1/2} W diag(W 1)^{-1/2}`; zero-degree rows stay zero.
pub fn symmetric_normalize(w: &SparseSymmetricMatrix) -> Result<SparseSymmetricMatrix> {
    if let Some((j, l, weight)) = w.entries().find(|&(_, _, v)| v < 0.0) {
        return Err(Error::NegativeMatrixWeight { row: j, col: l, weight });
    }
    let degrees = w.degrees();
    // dividing by the root of the product keeps 1/sqrt(d*d) exact for equal degrees
    let rows = (0..w.dim())
        .map(|j| {
            w.row(j)
                .map(|(l, v)| (l, v / (degrees[j] * degrees[l]).sqrt()))
                .collect()
        })
        .collect();
    Ok(SparseSymmetricMatrix::from_rows(w.dim(), rows))
}

/// Smallest radius at which a `coverage` fraction of points have at least
/// `neighbor_count` strict neighbors.
///
/// Each point's distance to its `neighbor_count`-th nearest neighbor is a
/// candidate; the `ceil(coverage * m)`-th smallest candidate is returned,
/// scaled by `1 + 2^-40` so that the strict ball contains it.
pub fn choose_epsilon(data: &DataMatrix, neighbor_count: usize, coverage: f64) -> Result<f64> {
    let m = data.rows();
    if m <= neighbor_count {
        return Err(Error::TooFewPoints {
            points: m,
            neighbor_count,
        });
    }
    if neighbor_count == 0 {
        return Err(Error::InvalidArgument("neighbor_count must be at least 1".into()));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidArgument(format!("coverage must lie in (0, 1], got {coverage}")));
    }
    let mut kth: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| nearest(data, j, neighbor_count)[neighbor_count - 1].0)
        .collect();
    kth.sort_by(f64::total_cmp);
    let needed = ((coverage * m as f64).ceil() as usize).clamp(1, m);
    let base = kth[needed - 1];
    if base == 0.0 {
        // Coincident points; any positive radius admits them but zero-distance
        // pairs are not edges, so take the smallest positive candidate instead.
        let positive = kth.iter().copied().find(|&d| d > 0.0).unwrap_or(f64::MIN_POSITIVE);
        return Ok(positive * (1.0 + RADIUS_NUDGE));
    }
    Ok(base * (1.0 + RADIUS_NUDGE))
}
