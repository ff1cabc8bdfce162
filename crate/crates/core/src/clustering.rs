/// A hard partition of `m` points into `n_clusters` groups, with `None` marking noise.
///
/// Equivalent to a binary partition matrix with exactly one 1 per non-noise row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<Option<usize>>,
    n_clusters: usize,
}

impl Clustering {
    /// Builds a clustering whose cluster count is one past the largest id.
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        let n_clusters = labels.iter().flatten().map(|&l| l + 1).max().unwrap_or(0);
        Clustering { labels, n_clusters }
    }

    /// Builds a clustering with an explicit cluster count; empty ids are allowed
    /// and reported by [`Clustering::is_degenerate`].
    pub fn with_clusters(labels: Vec<Option<usize>>, n_clusters: usize) -> Option<Self> {
        if labels.iter().flatten().any(|&l| l >= n_clusters) {
            return None;
        }
        Some(Clustering { labels, n_clusters })
    }

    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        Self::new(ids.into_iter().map(Some).collect())
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in self.labels.iter().flatten() {
            sizes[l] += 1;
        }
        sizes
    }

    /// True when some id in `[0, n_clusters)` has no members.
    pub fn is_degenerate(&self) -> bool {
        self.sizes().contains(&0)
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == Some(cluster))
            .map(|(j, _)| j)
    }

    /// 0/1 indicator column of one cluster.
    pub fn indicator(&self, cluster: usize) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&l| if l == Some(cluster) { 1.0 } else { 0.0 })
            .collect()
    }
}
