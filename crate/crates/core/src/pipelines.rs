//! End-to-end clustering algorithms.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use rayon::prelude::*;

use crate::clustering::Clustering;
use crate::dataio::DataMatrix;
use crate::eigen::{largest_algebraic, truncated_eigs_with, EigenConfig};
use crate::embedding::project_embedding;
use crate::error::{Error, Result};
use crate::graph::{choose_epsilon, epsilon_graph, knn_graph, symmetric_normalize, SparseSymmetricMatrix};
use crate::kmeans::{kmeans, DEFAULT_RESTARTS};

pub const DEFAULT_EMBEDDING_DIM: usize = 50;
pub const DEFAULT_KNN: usize = 10;
pub const DEFAULT_MIN_PTS: usize = 10;
/// Neighbor count and coverage used when the radius is chosen automatically.
pub const AUTO_EPSILON_NEIGHBORS: usize = 10;
pub const AUTO_EPSILON_COVERAGE: f64 = 0.9;

/// Points, or an adjacency matrix given directly.
#[derive(Clone, Copy, Debug)]
pub enum Input<'a> {
    Points(&'a DataMatrix),
    Graph(&'a SparseSymmetricMatrix),
}

impl Input<'_> {
    pub fn len(&self) -> usize {
        match self {
            Input::Points(d) => d.rows(),
            Input::Graph(w) => w.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonChoice {
    /// Smallest radius giving 90% of points at least ten neighbors.
    Auto,
    Fixed(f64),
}

impl EpsilonChoice {
    pub fn resolve(&self, data: &DataMatrix) -> Result<f64> {
        match *self {
            EpsilonChoice::Auto => choose_epsilon(data, AUTO_EPSILON_NEIGHBORS, AUTO_EPSILON_COVERAGE),
            EpsilonChoice::Fixed(radius) => Ok(radius),
        }
    }
}

impl FromStr for EpsilonChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(EpsilonChoice::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(EpsilonChoice::Fixed(v)),
            _ => Err(Error::InvalidArgument(format!(
                "epsilon must be `auto` or a positive number, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for EpsilonChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonChoice::Auto => write!(f, "auto"),
            EpsilonChoice::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectaclVariant {
    /// Unweighted ε-neighborhood graph.
    Unnormalized { epsilon: EpsilonChoice },
    /// Symmetrically normalized kNN graph.
    Normalized { k: usize },
}

#[derive(Clone, Debug)]
pub struct SpectaclConfig {
    pub variant: SpectaclVariant,
    /// Number of projected eigenvectors.
    pub d: usize,
    /// Number of clusters.
    pub r: usize,
    pub seed: u64,
    pub restarts: usize,
    pub eigen: EigenConfig,
}

impl SpectaclConfig {
    pub fn unnormalized(r: usize) -> Self {
        SpectaclConfig {
            variant: SpectaclVariant::Unnormalized {
                epsilon: EpsilonChoice::Auto,
            },
            d: DEFAULT_EMBEDDING_DIM,
            r,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            eigen: EigenConfig::default(),
        }
    }

    pub fn normalized(r: usize) -> Self {
        SpectaclConfig {
            variant: SpectaclVariant::Normalized { k: DEFAULT_KNN },
            ..Self::unnormalized(r)
        }
    }
}

/// A pipeline result together with the pieces needed to report on it.
#[derive(Clone, Debug)]
pub struct Run {
    pub clustering: Clustering,
    /// The adjacency the algorithm worked on.
    pub adjacency: SparseSymmetricMatrix,
    /// Radius used, when an ε-neighborhood was built.
    pub epsilon: Option<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Adjacency, truncated eigendecomposition, projected embedding, k-means.
pub fn spectacl(input: Input<'_>, config: &SpectaclConfig) -> Result<Run> {
    let m = input.len();
    if config.r > m {
        return Err(Error::TooManyClusters {
            clusters: config.r,
            points: m,
        });
    }
    if config.d == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
    }
    if config.d < config.r {
        warn!("embedding dimension d={} is below the cluster count r={}", config.d, config.r);
    }
    let (adjacency, epsilon) = match (input, config.variant) {
        (Input::Points(data), SpectaclVariant::Unnormalized { epsilon }) => {
            let radius = epsilon.resolve(data)?;
            if epsilon == EpsilonChoice::Auto {
                debug!("auto epsilon = {radius}");
            }
            (epsilon_graph(data, radius)?, Some(radius))
        }
        (Input::Points(data), SpectaclVariant::Normalized { k }) => {
            (symmetric_normalize(&knn_graph(data, k)?)?, None)
        }
        (Input::Graph(w), SpectaclVariant::Unnormalized { .. }) => (w.clone(), None),
        (Input::Graph(w), SpectaclVariant::Normalized { .. }) => (symmetric_normalize(w)?, None),
    };
    let d = if config.d > m {
        warn!("embedding dimension d={} exceeds m={m}; using d=m", config.d);
        m
    } else {
        config.d
    };
    let pairs = truncated_eigs_with(&adjacency, d, &config.eigen)?;
    let embedding = project_embedding(&pairs);
    let result = kmeans(embedding.points(), config.r, config.restarts, config.seed)?;
    Ok(Run {
        clustering: result.clustering,
        adjacency,
        epsilon,
        eigenvalues: pairs.values,
    })
}

#[derive(Clone, Debug)]
pub struct SpectralConfig {
    pub r: usize,
    /// Neighbors in the kNN graph.
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub eigen: EigenConfig,
}

impl SpectralConfig {
    pub fn new(r: usize) -> Self {
        SpectralConfig {
            r,
            k: DEFAULT_KNN,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            eigen: EigenConfig::default(),
        }
    }
}

/// Symmetrically normalized spectral clustering.
///
/// The `r + 1` smallest eigenvectors of `L_sym = I - W~` are the largest of
/// `W~`; the first is dropped and k-means runs on the remaining `r` columns.
pub fn spectral_clustering(input: Input<'_>, config: &SpectralConfig) -> Result<Run> {
    let m = input.len();
    if config.r < 2 {
        return Err(Error::InvalidArgument("spectral clustering needs r >= 2".into()));
    }
    if config.r + 1 > m {
        return Err(Error::TooManyClusters {
            clusters: config.r,
            points: m,
        });
    }
    let adjacency = match input {
        Input::Points(data) => symmetric_normalize(&knn_graph(data, config.k)?)?,
        Input::Graph(w) => symmetric_normalize(w)?,
    };
    let pairs = largest_algebraic(&adjacency, config.r + 1, &config.eigen)?;
    let features = pairs.vectors.slice(ndarray::s![.., 1..]).to_owned();
    let result = kmeans(&features, config.r, config.restarts, config.seed)?;
    Ok(Run {
        clustering: result.clustering,
        adjacency,
        epsilon: None,
        eigenvalues: pairs.values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbscanConfig {
    pub epsilon: EpsilonChoice,
    pub min_pts: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        DbscanConfig {
            epsilon: EpsilonChoice::Auto,
            min_pts: DEFAULT_MIN_PTS,
        }
    }
}

/// DBSCAN with the strict ball and the point itself not counted.
///
/// A point is core when it has at least `min_pts` other points strictly
/// within ε. Core points reachable from each other form a cluster; a border
/// point joins the cluster of its lowest-index core neighbor; the rest is noise.
pub fn dbscan(data: &DataMatrix, config: &DbscanConfig) -> Result<(Clustering, f64)> {
    let radius = config.epsilon.resolve(data)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {radius}")));
    }
    let m = data.rows();
    let values = data.values();
    let neighbors: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (0..m)
                .filter(|&l| {
                    if l == j {
                        return false;
                    }
                    let (a, b) = (j.min(l), j.max(l));
                    let d: f64 = values
                        .row(a)
                        .iter()
                        .zip(values.row(b).iter())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    d < radius
                })
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|n| n.len() >= config.min_pts).collect();
    let mut labels: Vec<Option<usize>> = vec![None; m];
    let mut next = 0;
    for start in 0..m {
        if !core[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        let mut stack = vec![start];
        while let Some(j) = stack.pop() {
            for &l in &neighbors[j] {
                if core[l] && labels[l].is_none() {
                    labels[l] = Some(next);
                    stack.push(l);
                }
            }
        }
        next += 1;
    }
    for j in 0..m {
        if core[j] {
            continue;
        }
        labels[j] = neighbors[j]
            .iter()
            .copied()
            .filter(|&l| core[l])
            .min()
            .and_then(|l| labels[l]);
    }
    Ok((Clustering::new(labels), radius))
}
