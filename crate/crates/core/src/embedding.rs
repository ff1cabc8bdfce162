//! Projected eigenvector embedding.
//!
//! Replacing every entry of an eigenvector by its magnitude yields a
//! nonnegative vector whose density (Rayleigh quotient) is at least `|lambda|`
//! on a nonnegative `W`; those vectors act as fuzzy cluster indicators.

use ndarray::Array2;

use crate::eigen::EigenPairs;
use crate::error::{Error, Result};
use crate::graph::SparseSymmetricMatrix;
use crate::metrics::rayleigh_quotient;

/// Eigenvalues below this magnitude produce an all-zero column.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// `m x d` nonnegative embedding, `U_jk = |V_jk| * |lambda_k|^(1/2)`.
#[derive(Clone, Debug)]
pub struct Embedding(Array2<f64>);

impl Embedding {
    pub fn points(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

pub fn project_embedding(pairs: &EigenPairs) -> Embedding {
    let mut u = pairs.vectors.mapv(f64::abs);
    for (k, mut column) in u.columns_mut().into_iter().enumerate() {
        let lambda = pairs.values[k].abs();
        let scale = if lambda < ZERO_EIGENVALUE { 0.0 } else { lambda.sqrt() };
        column.mapv_inplace(|x| x * scale);
    }
    Embedding(u)
}

/// For each eigenpair of `w`, the pair `(|lambda|, delta(|v|, W))`.
pub fn projected_density_check(w: &SparseSymmetricMatrix, pairs: &EigenPairs) -> Result<Vec<(f64, f64)>> {
    if pairs.vectors.nrows() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: pairs.vectors.nrows(),
        });
    }
    (0..pairs.len())
        .map(|k| {
            let u: Vec<f64> = pairs.vectors.column(k).iter().map(|x| x.abs()).collect();
            Ok((pairs.values[k].abs(), rayleigh_quotient(&u, w)?))
        })
        .collect()
}
