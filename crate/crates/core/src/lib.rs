//! Spectral averagely-dense clustering (SpectACl) with spectral clustering
//! and DBSCAN baselines, synthetic data generators and evaluation metrics.

pub mod cli;
pub mod clustering;
pub mod datagen;
pub mod dataio;
pub mod eigen;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod kmeans;
pub mod metrics;
pub mod pipelines;
pub mod svg;

pub use clustering::Clustering;
pub use dataio::{DataMatrix, EdgeList};
pub use eigen::{EigenConfig, EigenPairs};
pub use error::{Error, Result};
pub use graph::SparseSymmetricMatrix;
pub use pipelines::{
    dbscan, spectacl, spectral_clustering, DbscanConfig, EpsilonChoice, Input, Run, SpectaclConfig,
    SpectaclVariant, SpectralConfig,
};
