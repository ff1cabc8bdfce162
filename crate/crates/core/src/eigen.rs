//! Truncated symmetric eigendecomposition ordered by absolute eigenvalue.
//!
//! Small matrices go through a dense Householder tridiagonalization followed
//! by implicit QL. Larger ones run Lanczos with full reorthogonalization at
//! each end of the spectrum. Converged Ritz pairs are locked and the run is
//! restarted from a fresh vector orthogonal to them until a restart finds
//! nothing new above the cutoff; this picks up additional copies of repeated
//! eigenvalues that a single Krylov sequence cannot see.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SparseSymmetricMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;

/// Symmetric linear operator `x -> W x`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn to_dense(&self) -> Array2<f64>;
}

impl SymmetricOperator for SparseSymmetricMatrix {
    fn dim(&self) -> usize {
        SparseSymmetricMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }

    fn to_dense(&self) -> Array2<f64> {
        SparseSymmetricMatrix::to_dense(self)
    }
}

impl SymmetricOperator for Array2<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.row(j).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn to_dense(&self) -> Array2<f64> {
        self.clone()
    }
}

#[derive(Clone, Debug)]
pub struct EigenConfig {
    /// Relative residual tolerance, scaled by `max(1, |lambda_1|)`.
    pub tol: f64,
    /// Matrices of at most this dimension are decomposed densely.
    pub dense_threshold: usize,
    /// Matrix-vector products allowed per spectrum end, as a multiple of `m`.
    pub matvec_factor: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: DEFAULT_TOL,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            matvec_factor: 10,
            seed: 0x5eed_1a2c,
        }
    }
}

/// Eigenvalues with unit eigenvectors stored as the columns of an `m x d` matrix.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).to_vec()
    }

    /// `||W v_k - lambda_k v_k||` for every pair.
    pub fn residuals(&self, w: &impl SymmetricOperator) -> Vec<f64> {
        let m = w.dim();
        let mut wv = vec![0.0; m];
        (0..self.len())
            .map(|k| {
                let v = self.vector(k);
                w.apply(&v, &mut wv);
                wv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - self.values[k] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    fn from_pairs(m: usize, pairs: Vec<(f64, Vec<f64>)>) -> Self {
        let mut vectors = Array2::zeros((m, pairs.len()));
        let mut values = Vec::with_capacity(pairs.len());
        for (k, (value, mut v)) in pairs.into_iter().enumerate() {
            orient(&mut v);
            for (j, x) in v.into_iter().enumerate() {
                vectors[[j, k]] = x;
            }
            values.push(value);
        }
        EigenPairs { values, vectors }
    }
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn by_magnitude(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> std::cmp::Ordering {
    b.0.abs().total_cmp(&a.0.abs()).then(b.0.total_cmp(&a.0))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Implicit QL on a symmetric tridiagonal matrix.
///
/// `diag` holds the diagonal, `off[i]` the entry `(i, i+1)`; both have length
/// `n` (`off[n-1]` is ignored). `z` is a row-major buffer of `n`-wide rows that
/// receives the same column rotations as the eigenvector matrix; pass identity
/// rows for full eigenvectors or a single unit row to track one component.
/// On return `diag` holds the (unsorted) eigenvalues.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let rows = z.len() / n;
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut shift = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 && off[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 60 {
                    return Err(Error::NoConvergence {
                        matvecs: 0,
                        residual: off[l].abs(),
                    });
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                shift += h;

                p = diag[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    for k in 0..rows {
                        let row = &mut z[k * n..(k + 1) * n];
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift;
        off[l] = 0.0;
    }
    Ok(())
}

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
/// Returns `(diag, off, q)` with `q` row-major such that `A = Q T Q^T`.
fn householder_tridiagonalize(a: &Array2<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut v: Vec<f64> = a.iter().copied().collect();
    let idx = |r: usize, c: usize| r * n + c;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut h = 0.0;
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for x in d[..i].iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for x in e[..i].iter_mut() {
                *x = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    if n > 0 {
        v[idx(n - 1, n - 1)] = 1.0;
    }
    // e[i] is the (i-1, i) entry; shift to (i, i+1).
    let mut off = vec![0.0; n];
    off[..n.saturating_sub(1)].copy_from_slice(&e[1..]);
    (d, off, v)
}

/// Every eigenpair of a dense symmetric matrix, ordered by descending `|lambda|`.
pub fn full_dense_eigs(w: &Array2<f64>, limit: usize) -> Result<EigenPairs> {
    let (m, n) = w.dim();
    if m != n {
        return Err(Error::DimensionMismatch { expected: m, found: n });
    }
    if m > limit {
        return Err(Error::DenseThresholdExceeded { dim: m, limit });
    }
    let mut pairs = dense_pairs(w)?;
    pairs.sort_by(by_magnitude);
    Ok(EigenPairs::from_pairs(m, pairs))
}

fn dense_pairs(w: &Array2<f64>) -> Result<Vec<(f64, Vec<f64>)>> {
    let m = w.nrows();
    let (mut diag, mut off, mut q) = householder_tridiagonalize(w);
    tridiagonal_ql(&mut diag, &mut off, &mut q)?;
    Ok((0..m)
        .map(|k| (diag[k], (0..m).map(|j| q[j * m + k]).collect()))
        .collect())
}

/// The `d` eigenpairs of largest `|lambda|`, using [`EigenConfig::default`].
pub fn truncated_eigs(w: &impl SymmetricOperator, d: usize, tol: f64) -> Result<EigenPairs> {
    truncated_eigs_with(
        w,
        d,
        &EigenConfig {
            tol,
            ..EigenConfig::default()
        },
    )
}

pub fn truncated_eigs_with(w: &impl SymmetricOperator, d: usize, config: &EigenConfig) -> Result<EigenPairs> {
    let m = w.dim();
    if d == 0 || d > m {
        return Err(Error::InvalidArgument(format!("need 1 <= d <= m, got d={d}, m={m}")));
    }
    if m <= config.dense_threshold {
        let mut pairs = dense_pairs(&w.to_dense())?;
        pairs.sort_by(by_magnitude);
        pairs.truncate(d);
        return Ok(EigenPairs::from_pairs(m, pairs));
    }
    let mut lanczos = Lanczos::new(w, config);
    let top = lanczos.extreme(1.0, d, f64::NEG_INFINITY, &[])?;
    let floor = top.iter().map(|p| p.0.abs()).fold(f64::INFINITY, f64::min);
    let floor = if top.len() < d { 0.0 } else { floor };
    let exclude: Vec<Vec<f64>> = top.iter().map(|p| p.1.clone()).collect();
    let bottom = lanczos.extreme(-1.0, d, floor, &exclude)?;
    let mut pairs: Vec<(f64, Vec<f64>)> = top.into_iter().chain(bottom).collect();
    pairs.sort_by(by_magnitude);
    pairs.truncate(d);
    let result = EigenPairs::from_pairs(m, pairs);
    lanczos.verify(&result)?;
    Ok(result)
}

/// The `count` algebraically largest eigenpairs, in descending order.
pub fn largest_algebraic(w: &impl SymmetricOperator, count: usize, config: &EigenConfig) -> Result<EigenPairs> {
    let m = w.dim();
    if count == 0 || count > m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= count <= m, got count={count}, m={m}"
        )));
    }
    let mut pairs = if m <= config.dense_threshold {
        dense_pairs(&w.to_dense())?
    } else {
        Lanczos::new(w, config).extreme(1.0, count, f64::NEG_INFINITY, &[])?
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.truncate(count);
    Ok(EigenPairs::from_pairs(m, pairs))
}

struct Lanczos<'a, W: SymmetricOperator> {
    op: &'a W,
    config: &'a EigenConfig,
    rng: ChaCha8Rng,
    scale: f64,
}

impl<'a, W: SymmetricOperator> Lanczos<'a, W> {
    fn new(op: &'a W, config: &'a EigenConfig) -> Self {
        Lanczos {
            op,
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            scale: 1.0,
        }
    }

    fn threshold(&self) -> f64 {
        self.config.tol * self.scale
    }

    fn verify(&self, pairs: &EigenPairs) -> Result<()> {
        let worst = pairs.residuals(self.op).into_iter().fold(0.0, f64::max);
        // Ritz estimates track the true residual closely under full
        // reorthogonalization; allow a little rounding on top.
        if worst > 10.0 * self.threshold() {
            return Err(Error::NoConvergence {
                matvecs: 0,
                residual: worst,
            });
        }
        Ok(())
    }

    /// Unit vector orthogonal to every vector in `against`, or `None` if the
    /// complement is numerically empty.
    fn fresh_vector(&mut self, against: &[&[f64]]) -> Option<Vec<f64>> {
        let m = self.op.dim();
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..m).map(|_| self.rng.random::<f64>() - 0.5).collect();
            let before = norm(&v);
            orthogonalize(&mut v, against);
            let after = norm(&v);
            if after > 1e-8 * before {
                v.iter_mut().for_each(|x| *x /= after);
                return Some(v);
            }
        }
        None
    }

    /// Largest eigenpairs of `sign * W`, returned in that scaled space and
    /// sorted descending: up to `want` pairs above `floor`. Vectors in
    /// `exclude` are treated as already deflated.
    fn extreme(&mut self, sign: f64, want: usize, floor: f64, exclude: &[Vec<f64>]) -> Result<Vec<(f64, Vec<f64>)>> {
        let m = self.op.dim();
        let budget = self.config.matvec_factor * m;
        let mut matvecs = 0;
        let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
        loop {
            let cutoff = if locked.len() >= want {
                locked[want - 1].0
            } else {
                floor
            };
            let deflated: Vec<&[f64]> = exclude
                .iter()
                .map(Vec::as_slice)
                .chain(locked.iter().map(|p| p.1.as_slice()))
                .collect();
            if deflated.len() >= m {
                break;
            }
            let found = self.run(sign, want, cutoff, &deflated, budget, &mut matvecs)?;
            let slack = self.threshold();
            let improved = found.iter().any(|p| p.0 > cutoff + slack);
            locked.extend(found);
            locked.sort_by(|a, b| b.0.total_cmp(&a.0));
            locked.retain(|p| p.0 > floor);
            locked.truncate(want);
            if !improved {
                break;
            }
        }
        Ok(locked.into_iter().map(|(v, x)| (sign * v, x)).collect())
    }

    /// One Lanczos sequence in the complement of `deflated`. Returns the
    /// converged leading Ritz pairs (in `sign * W` space).
    fn run(
        &mut self,
        sign: f64,
        want: usize,
        cutoff: f64,
        deflated: &[&[f64]],
        budget: usize,
        matvecs: &mut usize,
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        let m = self.op.dim();
        let avail = m - deflated.len();
        let Some(q0) = self.fresh_vector(deflated) else {
            return Ok(Vec::new());
        };
        let mut basis: Vec<Vec<f64>> = vec![q0];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; m];
        let mut last_check = 0;
        loop {
            let k = basis.len() - 1;
            self.op.apply(&basis[k], &mut w);
            *matvecs += 1;
            if sign < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            let alpha = dot(&basis[k], &w);
            axpy(-alpha, &basis[k], &mut w);
            if k > 0 {
                axpy(-betas[k - 1], &basis[k - 1], &mut w);
            }
            {
                let mut against: Vec<&[f64]> = deflated.to_vec();
                against.extend(basis.iter().map(Vec::as_slice));
                orthogonalize(&mut w, &against);
            }
            alphas.push(alpha);
            let beta = norm(&w);
            self.scale = self.scale.max(alpha.abs()).max(beta);
            let size = basis.len();
            let full = size >= avail;
            let breakdown = beta <= 1e-12 * self.scale;

            let due = size >= want.min(avail) && size - last_check >= 5;
            if full || due || (breakdown && size >= want.min(avail)) {
                last_check = size;
                let estimate = ritz_estimates(&alphas, &betas, beta)?;
                let mut order: Vec<usize> = (0..size).collect();
                order.sort_by(|&a, &b| estimate[b].0.total_cmp(&estimate[a].0));
                let threshold = self.threshold();
                let converged = order.iter().take_while(|&&i| estimate[i].1 <= threshold).count();
                let done = full
                    || (converged >= 1
                        && (converged >= want || estimate[order[converged - 1]].0 <= cutoff));
                if done {
                    let take = if full { size.min(want) } else { converged };
                    return self.ritz_pairs(&alphas, &betas, &basis, take);
                }
            }
            if *matvecs >= budget {
                let estimate = ritz_estimates(&alphas, &betas, beta)?;
                let mut sorted: Vec<(f64, f64)> = estimate.clone();
                sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
                let residual = sorted
                    .iter()
                    .take(want)
                    .map(|e| e.1)
                    .fold(0.0, f64::max);
                return Err(Error::NoConvergence {
                    matvecs: *matvecs,
                    residual,
                });
            }
            if breakdown {
                let mut against: Vec<&[f64]> = deflated.to_vec();
                against.extend(basis.iter().map(Vec::as_slice));
                match self.fresh_vector(&against) {
                    Some(q) => {
                        betas.push(0.0);
                        basis.push(q);
                    }
                    None => {
                        let size = basis.len();
                        return self.ritz_pairs(&alphas, &betas, &basis, size.min(want));
                    }
                }
            } else {
                betas.push(beta);
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }
    }

    /// Leading `take` Ritz pairs of the current basis.
    fn ritz_pairs(
        &self,
        alphas: &[f64],
        betas: &[f64],
        basis: &[Vec<f64>],
        take: usize,
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        let size = alphas.len();
        let m = self.op.dim();
        let mut diag = alphas.to_vec();
        let mut off = betas[..size - 1].to_vec();
        off.push(0.0);
        let mut z = vec![0.0; size * size];
        for i in 0..size {
            z[i * size + i] = 1.0;
        }
        tridiagonal_ql(&mut diag, &mut off, &mut z)?;
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]));
        Ok(order
            .into_iter()
            .take(take)
            .map(|c| {
                let mut v = vec![0.0; m];
                for (i, q) in basis.iter().enumerate().take(size) {
                    axpy(z[i * size + c], q, &mut v);
                }
                let n = norm(&v);
                v.iter_mut().for_each(|x| *x /= n);
                (diag[c], v)
            })
            .collect())
    }
}

/// Ritz values with residual estimates `beta * |last component|`.
fn ritz_estimates(alphas: &[f64], betas: &[f64], beta: f64) -> Result<Vec<(f64, f64)>> {
    let size = alphas.len();
    let mut diag = alphas.to_vec();
    let mut off = betas[..size - 1].to_vec();
    off.push(0.0);
    let mut last = vec![0.0; size];
    last[size - 1] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut last)?;
    Ok(diag
        .into_iter()
        .zip(last)
        .map(|(theta, s)| (theta, (beta * s).abs()))
        .collect())
}

/// Classical Gram-Schmidt applied twice.
fn orthogonalize(v: &mut [f64], against: &[&[f64]]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn lanczos_only() -> EigenConfig {
        EigenConfig {
            dense_threshold: 0,
            ..EigenConfig::default()
        }
    }

    fn random_symmetric(m: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::zeros((m, m));
        for j in 0..m {
            for l in 0..=j {
                let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
                a[[j, l]] = x;
                a[[l, j]] = x;
            }
        }
        a
    }

    fn two_triangles() -> SparseSymmetricMatrix {
        SparseSymmetricMatrix::from_entries(
            6,
            [(0, 1, 1.), (0, 2, 1.), (1, 2, 1.), (3, 4, 1.), (3, 5, 1.), (4, 5, 1.)],
        )
        .unwrap()
    }

    /// Projector onto the span of the given columns.
    fn projector(pairs: &EigenPairs, cols: &[usize]) -> Array2<f64> {
        let m = pairs.vectors.nrows();
        let mut p = Array2::zeros((m, m));
        for &k in cols {
            let v = pairs.vector(k);
            for j in 0..m {
                for l in 0..m {
                    p[[j, l]] += v[j] * v[l];
                }
            }
        }
        p
    }

    #[test]
    fn two_cycle_spectrum() {
        let w = SparseSymmetricMatrix::from_entries(2, [(0, 1, 1.0)]).unwrap();
        for config in [EigenConfig::default(), lanczos_only()] {
            let pairs = truncated_eigs_with(&w, 2, &config).unwrap();
            let mut values = pairs.values.clone();
            values.sort_by(f64::total_cmp);
            assert!((values[0] + 1.0).abs() < 1e-14 && (values[1] - 1.0).abs() < 1e-14);
            assert!(pairs.residuals(&w).iter().all(|&r| r < 1e-14));
        }
    }

    #[test]
    fn two_triangles_top_eigenspace() {
        let w = two_triangles();
        for config in [EigenConfig::default(), lanczos_only()] {
            let pairs = truncated_eigs_with(&w, 2, &config).unwrap();
            assert!((pairs.values[0] - 2.0).abs() < 1e-10);
            assert!((pairs.values[1] - 2.0).abs() < 1e-10);
            // span equals that of the two block indicators
            let p = projector(&pairs, &[0, 1]);
            for j in 0..6 {
                for l in 0..6 {
                    let expect = if j / 3 == l / 3 { 1.0 / 3.0 } else { 0.0 };
                    assert!((p[[j, l]] - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_spectrum() {
        let pairs = full_dense_eigs(&Array2::eye(3), 10).unwrap();
        assert_eq!(pairs.values, vec![1.0, 1.0, 1.0]);
        let vtv = pairs.vectors.t().dot(&pairs.vectors);
        for j in 0..3 {
            for l in 0..3 {
                assert!((vtv[[j, l]] - if j == l { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_ordered_by_magnitude() {
        let pairs = full_dense_eigs(&array![[3.0, 0.0, 0.0], [0.0, -5.0, 0.0], [0.0, 0.0, 1.0]], 10).unwrap();
        assert_eq!(pairs.values, vec![-5.0, 3.0, 1.0]);
        assert_eq!(pairs.vector(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn dense_threshold_enforced() {
        assert!(matches!(
            full_dense_eigs(&Array2::eye(4), 3),
            Err(Error::DenseThresholdExceeded { dim: 4, limit: 3 })
        ));
    }

    #[test]
    fn dense_residuals_small() {
        for seed in 0..50 {
            let a = random_symmetric(10, seed);
            let pairs = full_dense_eigs(&a, 100).unwrap();
            assert!(pairs.residuals(&a).iter().all(|&r| r <= 1e-9), "seed {seed}");
        }
    }

    #[test]
    fn lanczos_matches_dense_on_random() {
        let a = random_symmetric(20, 3);
        let dense = full_dense_eigs(&a, 100).unwrap();
        let lanczos = truncated_eigs_with(&a, 5, &lanczos_only()).unwrap();
        for k in 0..5 {
            assert!((dense.values[k] - lanczos.values[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn full_reconstruction() {
        let a = random_symmetric(12, 11);
        let tol = 1e-10;
        let pairs = truncated_eigs_with(&a, 12, &EigenConfig { tol, ..lanczos_only() }).unwrap();
        let lambda = Array2::from_diag(&ndarray::Array1::from(pairs.values.clone()));
        let back = pairs.vectors.dot(&lambda).dot(&pairs.vectors.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() <= 12.0 * tol);
        }
    }

    #[test]
    fn rejects_bad_d() {
        let w = two_triangles();
        assert!(truncated_eigs(&w, 0, 1e-10).is_err());
        assert!(truncated_eigs(&w, 7, 1e-10).is_err());
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.3, -0.9, 0.1];
        orient(&mut v);
        assert_eq!(v, vec![-0.3, 0.9, -0.1]);
        let mut tie = vec![-0.5, 0.5];
        orient(&mut tie);
        assert_eq!(tie, vec![0.5, -0.5]);
    }

    #[test]
    fn repeated_eigenvalues_found_by_lanczos() {
        // ten disjoint triangles: eigenvalue 2 with multiplicity 10
        let edges = (0..10).flat_map(|b| {
            let o = 3 * b;
            [(o, o + 1, 1.0), (o, o + 2, 1.0), (o + 1, o + 2, 1.0)]
        });
        let w = SparseSymmetricMatrix::from_entries(30, edges).unwrap();
        let pairs = truncated_eigs_with(&w, 10, &lanczos_only()).unwrap();
        assert!(pairs.values.iter().all(|v| (v - 2.0).abs() < 1e-9), "{:?}", pairs.values);
    }

    #[test]
    fn largest_algebraic_prefers_positive() {
        let a = array![[3.0, 0.0, 0.0], [0.0, -5.0, 0.0], [0.0, 0.0, 1.0]];
        for config in [EigenConfig::default(), lanczos_only()] {
            let pairs = largest_algebraic(&a, 2, &config).unwrap();
            assert!((pairs.values[0] - 3.0).abs() < 1e-12);
            assert!((pairs.values[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translated_laplacian_top_is_component_constant() {
        // path 0-1-2 and edge 3-4
        let w = SparseSymmetricMatrix::from_entries(5, [(0, 1, 1.), (1, 2, 1.), (3, 4, 1.)]).unwrap();
        let lap = w.laplacian().to_dense();
        let all = full_dense_eigs(&lap, 10).unwrap();
        let shift = all.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let translated = Array2::eye(5) * shift - &lap;
        let top = largest_algebraic(&translated, 2, &EigenConfig::default()).unwrap();
        assert!((top.values[0] - shift).abs() < 1e-10);
        assert!((top.values[1] - shift).abs() < 1e-10);
        let p = projector(&top, &[0, 1]);
        for j in 0..5 {
            for l in 0..5 {
                let same = (j < 3) == (l < 3);
                let size = if j < 3 { 3.0 } else { 2.0 };
                let expect = if same { 1.0 / size } else { 0.0 };
                assert!((p[[j, l]] - expect).abs() < 1e-10);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn orthonormal_and_rayleigh(seed in 0u64..1000, m in 3usize..25, dense in any::<bool>()) {
                let a = random_symmetric(m, seed);
                let d = m.div_ceil(2);
                let config = if dense { EigenConfig::default() } else { lanczos_only() };
                let pairs = truncated_eigs_with(&a, d, &config).unwrap();
                for i in 0..d {
                    let vi = pairs.vector(i);
                    prop_assert!((norm(&vi) - 1.0).abs() <= 1e-10);
                    let mut av = vec![0.0; m];
                    a.apply(&vi, &mut av);
                    prop_assert!((dot(&vi, &av) - pairs.values[i]).abs() <= 1e-8);
                    for j in 0..i {
                        prop_assert!(dot(&vi, &pairs.vector(j)).abs() <= 1e-8);
                    }
                    if i > 0 {
                        prop_assert!(pairs.values[i - 1].abs() >= pairs.values[i].abs());
                    }
                }
            }
        }
    }
}
