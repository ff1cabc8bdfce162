//! Clustering objectives and external evaluation against ground truth.

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::SparseSymmetricMatrix;

/// `y^T W y / ||y||^2`.
pub fn rayleigh_quotient(y: &[f64], w: &SparseSymmetricMatrix) -> Result<f64> {
    if y.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: y.len(),
        });
    }
    let norm_sq: f64 = y.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroIndicator);
    }
    Ok(w.quadratic_form(y) / norm_sq)
}

/// Average degree inside the subgraph induced by the indicator `y`.
pub fn density(y: &[f64], w: &SparseSymmetricMatrix) -> Result<f64> {
    rayleigh_quotient(y, w)
}

fn check_len(clustering: &Clustering, w: &SparseSymmetricMatrix) -> Result<()> {
    if clustering.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: clustering.len(),
        });
    }
    Ok(())
}

/// Per-cluster `(Y_s^T W Y_s, Y_s^T W 1, |Y_s|)`; noise rows belong to no cluster.
fn cluster_sums(clustering: &Clustering, w: &SparseSymmetricMatrix) -> Vec<(f64, f64, usize)> {
    let mut sums = vec![(0.0, 0.0, 0); clustering.n_clusters()];
    let labels = clustering.labels();
    for (j, label) in labels.iter().enumerate() {
        let Some(s) = *label else { continue };
        sums[s].2 += 1;
        for (l, weight) in w.row(j) {
            sums[s].1 += weight;
            if labels[l] == Some(s) {
                sums[s].0 += weight;
            }
        }
    }
    sums
}

/// Sum of cluster densities, `tr(Y^T W Y (Y^T Y)^{-1})`.
pub fn average_density_objective(clustering: &Clustering, w: &SparseSymmetricMatrix) -> Result<f64> {
    check_len(clustering, w)?;
    cluster_sums(clustering, w)
        .into_iter()
        .enumerate()
        .map(|(s, (inner, _, size))| {
            if size == 0 {
                Err(Error::EmptyCluster(s))
            } else {
                Ok(inner / size as f64)
            }
        })
        .sum()
}

/// `sum_s Y_s^T W (1 - Y_s)`; each crossing edge counts from both endpoints.
pub fn cut_value(clustering: &Clustering, w: &SparseSymmetricMatrix) -> Result<f64> {
    check_len(clustering, w)?;
    Ok(cluster_sums(clustering, w)
        .into_iter()
        .map(|(inner, total, _)| total - inner)
        .sum())
}

/// `sum_s cut_s / |Y_s|`.
pub fn ratio_cut(clustering: &Clustering, w: &SparseSymmetricMatrix) -> Result<f64> {
    check_len(clustering, w)?;
    cluster_sums(clustering, w)
        .into_iter()
        .enumerate()
        .map(|(s, (inner, total, size))| {
            if size == 0 {
                Err(Error::EmptyCluster(s))
            } else {
                Ok((total - inner) / size as f64)
            }
        })
        .sum()
}

/// Optimal assignment of rows to columns.
///
/// Rectangular inputs are padded with zero entries; the result maps each row
/// to a real column or to `None` when it was matched to padding.
pub fn hungarian(scores: &[Vec<f64>], maximize: bool) -> Vec<Option<usize>> {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -> f64 {
        let v = if i < rows && j < cols { scores[i][j] } else { 0.0 };
        if maximize {
            -v
        } else {
            v
        }
    };
    // Shortest augmenting path with potentials, 1-based with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_to[j] {
                    min_to[j] = cur;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![None; rows];
    for j in 1..=n {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    assignment
}

/// Co-occurrence counts between predicted clusters (rows) and true classes (columns).
/// Predicted noise is left out of the table.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn new(pred: &Clustering, truth: &Clustering) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: pred.len(),
            });
        }
        let mut counts = vec![vec![0; truth.n_clusters()]; pred.n_clusters()];
        for (p, t) in pred.labels().iter().zip(truth.labels()) {
            if let (Some(p), Some(t)) = (p, t) {
                counts[*p][*t] += 1;
            }
        }
        Ok(ContingencyTable { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    /// Predicted cluster -> matched true class.
    pub mapping: Vec<Option<usize>>,
    /// Sum of matched F scores divided by `max(r, r*)`.
    pub total_f: f64,
}

/// Hungarian-matched F-measure.
///
/// Precision uses the predicted cluster size, recall the full class size, so
/// points predicted as noise lower the recall of their class without ever
/// being matched.
pub fn f_measure(pred: &Clustering, truth: &Clustering) -> Result<MatchResult> {
    if truth.noise_count() > 0 {
        return Err(Error::InvalidArgument("ground truth must not contain noise".into()));
    }
    let table = ContingencyTable::new(pred, truth)?;
    let pred_sizes = pred.sizes();
    let truth_sizes = truth.sizes();
    let scores: Vec<Vec<f64>> = table
        .counts
        .iter()
        .enumerate()
        .map(|(s, row)| {
            row.iter()
                .enumerate()
                .map(|(t, &n)| {
                    if n == 0 {
                        0.0
                    } else {
                        // 2 pre rec / (pre + rec) with pre = n/|Y_s|, rec = n/|Y*_t|
                        2.0 * n as f64 / (pred_sizes[s] + truth_sizes[t]) as f64
                    }
                })
                .collect()
        })
        .collect();
    let mapping = hungarian(&scores, true);
    let denom = pred.n_clusters().max(truth.n_clusters());
    let matched: f64 = mapping
        .iter()
        .enumerate()
        .filter_map(|(s, t)| t.map(|t| scores[s][t]))
        .sum();
    let total_f = if denom == 0 { 1.0 } else { matched / denom as f64 };
    Ok(MatchResult { mapping, total_f })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NmiNormalization {
    #[default]
    Arithmetic,
    Geometric,
    Max,
    Min,
}

pub fn nmi(pred: &Clustering, truth: &Clustering) -> Result<f64> {
    nmi_with(pred, truth, NmiNormalization::Arithmetic)
}

/// Normalized mutual information with natural-log entropies. Predicted noise
/// counts as one additional label.
pub fn nmi_with(pred: &Clustering, truth: &Clustering, norm: NmiNormalization) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let n = pred.len();
    if n == 0 {
        return Ok(1.0);
    }
    let key = |c: &Clustering, l: Option<usize>| l.unwrap_or(c.n_clusters());
    let rows = pred.n_clusters() + 1;
    let cols = truth.n_clusters() + 1;
    let mut joint = vec![vec![0usize; cols]; rows];
    for (p, t) in pred.labels().iter().zip(truth.labels()) {
        joint[key(pred, *p)][key(truth, *t)] += 1;
    }
    let a: Vec<usize> = joint.iter().map(|r| r.iter().sum()).collect();
    let b: Vec<usize> = (0..cols).map(|t| joint.iter().map(|r| r[t]).sum()).collect();
    let nf = n as f64;
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / nf;
                -p * p.ln()
            })
            .sum()
    };
    let (hp, ht) = (entropy(&a), entropy(&b));
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (nf * c / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNormalization::Arithmetic => 0.5 * (hp + ht),
        NmiNormalization::Geometric => (hp * ht).sqrt(),
        NmiNormalization::Max => hp.max(ht),
        NmiNormalization::Min => hp.min(ht),
    };
    Ok((mi.max(0.0) / denom).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn triangles() -> SparseSymmetricMatrix {
        SparseSymmetricMatrix::from_entries(
            6,
            [(0, 1, 1.), (0, 2, 1.), (1, 2, 1.), (3, 4, 1.), (3, 5, 1.), (4, 5, 1.)],
        )
        .unwrap()
    }

    fn edge() -> SparseSymmetricMatrix {
        SparseSymmetricMatrix::from_entries(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn triangle_density() {
        let w = SparseSymmetricMatrix::from_entries(3, [(0, 1, 1.), (0, 2, 1.), (1, 2, 1.)]).unwrap();
        assert_eq!(density(&[1.0, 1.0, 1.0], &w).unwrap(), 2.0);
    }

    #[test]
    fn singleton_density_zero() {
        assert_eq!(density(&[1.0, 0.0], &edge()).unwrap(), 0.0);
    }

    #[test]
    fn eigenvector_density_is_eigenvalue() {
        let h = 1.0 / 2f64.sqrt();
        assert!((rayleigh_quotient(&[h, -h], &edge()).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_indicator_rejected() {
        assert!(matches!(density(&[0.0, 0.0], &edge()), Err(Error::ZeroIndicator)));
    }

    #[test]
    fn objective_on_triangles() {
        let w = triangles();
        let split = Clustering::from_ids([0, 0, 0, 1, 1, 1]);
        assert_eq!(average_density_objective(&split, &w).unwrap(), 4.0);
        let whole = Clustering::from_ids([0; 6]);
        assert_eq!(average_density_objective(&whole, &w).unwrap(), 2.0);
        let singletons = Clustering::from_ids(0..6);
        assert_eq!(average_density_objective(&singletons, &w).unwrap(), 0.0);
    }

    #[test]
    fn objective_rejects_empty_cluster() {
        let y = Clustering::with_clusters(vec![Some(0), Some(0)], 2).unwrap();
        assert!(matches!(
            average_density_objective(&y, &edge()),
            Err(Error::EmptyCluster(1))
        ));
    }

    #[test]
    fn cut_values() {
        let w = triangles();
        assert_eq!(cut_value(&Clustering::from_ids([0; 6]), &w).unwrap(), 0.0);
        assert_eq!(cut_value(&Clustering::from_ids([0, 0, 0, 1, 1, 1]), &w).unwrap(), 0.0);
        assert_eq!(cut_value(&Clustering::from_ids([0, 1]), &edge()).unwrap(), 2.0);
    }

    #[test]
    fn ratio_cut_values() {
        assert_eq!(ratio_cut(&Clustering::from_ids([0, 0]), &edge()).unwrap(), 0.0);
        assert_eq!(ratio_cut(&Clustering::from_ids([0, 1]), &edge()).unwrap(), 2.0);
    }

    #[test]
    fn hungarian_identity() {
        let scores = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(hungarian(&scores, true), vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn hungarian_two_by_two() {
        let scores = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(hungarian(&scores, true), vec![Some(0), Some(1)]);
        assert_eq!(hungarian(&scores, false), vec![Some(1), Some(0)]);
    }

    #[test]
    fn hungarian_more_rows_than_columns() {
        let scores = vec![vec![1.0], vec![5.0], vec![3.0]];
        assert_eq!(hungarian(&scores, true), vec![None, Some(0), None]);
    }

    #[test]
    fn f_measure_perfect() {
        let y = Clustering::from_ids([2, 2, 0, 1, 1, 0]);
        let res = f_measure(&y, &y).unwrap();
        assert!((res.total_f - 1.0).abs() < 1e-15);
        assert_eq!(res.mapping, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn f_measure_single_cluster_vs_two_classes() {
        let pred = Clustering::from_ids([0; 6]);
        let truth = Clustering::from_ids([0, 0, 0, 1, 1, 1]);
        let res = f_measure(&pred, &truth).unwrap();
        assert!((res.total_f - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f_measure_noise_lowers_recall() {
        let truth = Clustering::from_ids([0, 0, 1, 1]);
        let pred = Clustering::new(vec![Some(0), None, Some(1), Some(1)]);
        let res = f_measure(&pred, &truth).unwrap();
        // cluster 0: pre 1, rec 1/2 -> 2/3; cluster 1: 1
        assert!((res.total_f - (2.0 / 3.0 + 1.0) / 2.0).abs() < 1e-15);

        let all_noise = Clustering::new(vec![None; 4]);
        assert_eq!(f_measure(&all_noise, &truth).unwrap().total_f, 0.0);
    }

    #[test]
    fn f_measure_errors() {
        let a = Clustering::from_ids([0, 1]);
        let b = Clustering::from_ids([0, 1, 1]);
        assert!(matches!(f_measure(&a, &b), Err(Error::DimensionMismatch { .. })));
        let noisy = Clustering::new(vec![Some(0), None]);
        assert!(f_measure(&a, &noisy).is_err());
    }

    #[test]
    fn nmi_identical() {
        let y = Clustering::from_ids([0, 0, 1, 1, 2]);
        assert!((nmi(&y, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_independent_grid() {
        // rows and columns of a 4x4 grid are independent labelings
        let rows = Clustering::from_ids((0..16).map(|j| j / 4));
        let cols = Clustering::from_ids((0..16).map(|j| j % 4));
        assert!(nmi(&rows, &cols).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nmi_degenerate_entropies() {
        let one = Clustering::from_ids([0; 5]);
        let two = Clustering::from_ids([0, 0, 1, 1, 1]);
        assert_eq!(nmi(&one, &one).unwrap(), 1.0);
        assert_eq!(nmi(&one, &two).unwrap(), 0.0);
        assert_eq!(nmi(&two, &one).unwrap(), 0.0);
    }

    #[test]
    fn nmi_normalizations_agree_when_entropies_equal() {
        let a = Clustering::from_ids([0, 0, 1, 1, 2, 2]);
        let b = Clustering::from_ids([1, 0, 0, 2, 2, 1]);
        let base = nmi(&a, &b).unwrap();
        for norm in [NmiNormalization::Geometric, NmiNormalization::Max, NmiNormalization::Min] {
            assert!((nmi_with(&a, &b, norm).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn contingency_excludes_noise() {
        let pred = Clustering::new(vec![Some(0), None, Some(1)]);
        let truth = Clustering::from_ids([0, 0, 1]);
        let t = ContingencyTable::new(&pred, &truth).unwrap();
        assert_eq!(t.counts, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(t.total(), 2);
    }

    /// Dense trace form `tr(Y^T W Y (Y^T Y)^{-1})`.
    fn trace_form(y: &Clustering, w: &Array2<f64>) -> f64 {
        let m = y.len();
        let r = y.n_clusters();
        let mut ind = Array2::<f64>::zeros((m, r));
        for (j, l) in y.labels().iter().enumerate() {
            if let Some(s) = l {
                ind[[j, *s]] = 1.0;
            }
        }
        let ywy = ind.t().dot(w).dot(&ind);
        let yty = ind.t().dot(&ind);
        (0..r).map(|s| ywy[[s, s]] / yty[[s, s]]).sum()
    }

    /// Brute-force scores of every injective row -> column mapping.
    fn best_injection(scores: &[Vec<f64>]) -> f64 {
        fn go(scores: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == scores.len() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for c in 0..used.len() {
                if !used[c] {
                    used[c] = true;
                    best = best.max(scores[row][c] + go(scores, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        go(scores, 0, &mut vec![false; scores[0].len()])
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn graph_and_labels() -> impl Strategy<Value = (SparseSymmetricMatrix, Clustering)> {
            (2usize..20, 1usize..5).prop_flat_map(|(m, r)| {
                (
                    prop::collection::vec(prop::option::of(0.0f64..2.0), m * (m - 1) / 2),
                    prop::collection::vec(0..r.min(m), m),
                )
                    .prop_map(move |(weights, labels)| {
                        let mut edges = Vec::new();
                        let mut k = 0;
                        for j in 0..m {
                            for l in j + 1..m {
                                if let Some(w) = weights[k] {
                                    edges.push((j, l, w));
                                }
                                k += 1;
                            }
                        }
                        (
                            SparseSymmetricMatrix::from_entries(m, edges).unwrap(),
                            Clustering::from_ids(labels),
                        )
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn objective_equals_trace_form((w, y) in graph_and_labels()) {
                prop_assume!(!y.is_degenerate());
                let direct = average_density_objective(&y, &w).unwrap();
                let per_cluster: f64 = (0..y.n_clusters())
                    .map(|s| density(&y.indicator(s), &w).unwrap())
                    .sum();
                prop_assert!((direct - trace_form(&y, &w.to_dense())).abs() <= 1e-10);
                prop_assert!((direct - per_cluster).abs() <= 1e-10);
            }

            #[test]
            fn ratio_cut_laplacian_identity((w, y) in graph_and_labels()) {
                prop_assume!(!y.is_degenerate());
                let lap = w.laplacian();
                let via_laplacian: f64 = (0..y.n_clusters())
                    .map(|s| {
                        let ind = y.indicator(s);
                        lap.quadratic_form(&ind) / ind.iter().sum::<f64>()
                    })
                    .sum();
                prop_assert!((ratio_cut(&y, &w).unwrap() - via_laplacian).abs() <= 1e-8);
            }

            #[test]
            fn normalized_shift_identity((w, y) in graph_and_labels()) {
                prop_assume!(!y.is_degenerate());
                let normalized = crate::graph::symmetric_normalize(&w).unwrap();
                let lsym = normalized.identity_minus();
                let r = y.n_clusters() as f64;
                let laplacian_trace: f64 = (0..y.n_clusters())
                    .map(|s| {
                        let ind = y.indicator(s);
                        lsym.quadratic_form(&ind) / ind.iter().sum::<f64>()
                    })
                    .sum();
                let objective = average_density_objective(&y, &normalized).unwrap();
                prop_assert!((objective - (r - laplacian_trace)).abs() <= 1e-8);
            }

            #[test]
            fn perfect_match_scores_one(labels in prop::collection::vec(0usize..6, 1..40)) {
                let y = Clustering::from_ids(labels);
                let expect = if y.is_degenerate() {
                    // empty ids count in max(r, r*) but can never be matched
                    let used = y.sizes().iter().filter(|&&s| s > 0).count();
                    used as f64 / y.n_clusters() as f64
                } else {
                    1.0
                };
                prop_assert!((f_measure(&y, &y).unwrap().total_f - expect).abs() <= 1e-12);
            }

            #[test]
            fn nmi_bounded_and_relabel_invariant(
                a in prop::collection::vec(0usize..4, 2..40),
                seed in prop::collection::vec(0usize..4, 40),
                perm in Just([2usize, 0, 3, 1]),
            ) {
                let b: Vec<usize> = seed[..a.len()].to_vec();
                let ya = Clustering::from_ids(a.iter().copied());
                let yb = Clustering::from_ids(b.iter().copied());
                let v = nmi(&ya, &yb).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
                let relabeled = Clustering::from_ids(a.iter().map(|&l| perm[l]));
                prop_assert!((nmi(&relabeled, &yb).unwrap() - v).abs() <= 1e-12);
                prop_assert!((nmi(&yb, &relabeled).unwrap() - nmi(&yb, &ya).unwrap()).abs() <= 1e-12);
            }

            #[test]
            fn hungarian_matches_brute_force(
                rows in 1usize..6,
                cols in 1usize..8,
                values in prop::collection::vec(-5.0f64..5.0, 48),
            ) {
                let (rows, cols) = (rows.min(cols), cols.max(rows));
                let scores: Vec<Vec<f64>> = (0..rows)
                    .map(|i| values[i * cols..(i + 1) * cols].to_vec())
                    .collect();
                let mapping = hungarian(&scores, true);
                let got: f64 = mapping.iter().enumerate().map(|(i, c)| scores[i][c.unwrap()]).sum();
                prop_assert!((got - best_injection(&scores)).abs() <= 1e-9);
                let mut seen = std::collections::HashSet::new();
                prop_assert!(mapping.iter().all(|c| seen.insert(c.unwrap())));
            }
        }
    }
}
