//! Seeded two-moons, concentric-circles and Gaussian-blob point clouds.
//!
//! Moons and circles place points at evenly spaced angles along their arcs;
//! Gaussian noise with standard deviation `noise` is then added to every
//! coordinate. Noise is drawn from a separate stream of the generator so the
//! noise-free skeleton for a given seed does not depend on `noise`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::clustering::Clustering;
use crate::dataio::DataMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 1500;
pub const DEFAULT_CIRCLE_FACTOR: f64 = 0.5;
pub const DEFAULT_BLOB_CENTERS: usize = 3;
/// Spread of each blob before the noise parameter is applied.
pub const BLOB_STD: f64 = 0.3;
/// Blob centers are drawn uniformly from `[0, BLOB_BOX]^2`.
pub const BLOB_BOX: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Moons,
    /// Inner radius is `factor` times the outer (unit) radius.
    Circles { factor: f64 },
    Blobs { centers: usize },
}

impl Shape {
    pub fn clusters(&self) -> usize {
        match self {
            Shape::Moons | Shape::Circles { .. } => 2,
            Shape::Blobs { centers } => *centers,
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moons" => Ok(Shape::Moons),
            "circles" => Ok(Shape::Circles {
                factor: DEFAULT_CIRCLE_FACTOR,
            }),
            "blobs" => Ok(Shape::Blobs {
                centers: DEFAULT_BLOB_CENTERS,
            }),
            other => Err(Error::InvalidArgument(format!("unknown shape {other:?}"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Moons => write!(f, "moons"),
            Shape::Circles { .. } => write!(f, "circles"),
            Shape::Blobs { .. } => write!(f, "blobs"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub shape: Shape,
    pub m: usize,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(shape: Shape, noise: f64, seed: u64) -> Self {
        SyntheticSpec {
            shape,
            m: DEFAULT_POINTS,
            noise,
            seed,
        }
    }
}

/// Points and balanced ground-truth labels, ordered by class.
pub fn generate(spec: &SyntheticSpec) -> Result<(DataMatrix, Clustering)> {
    if spec.m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {}", spec.m)));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise must be nonnegative, got {}", spec.noise)));
    }
    let (mut points, labels) = skeleton(spec)?;
    if spec.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let normal = Normal::new(0.0, spec.noise).expect("valid std");
        points.mapv_inplace(|x| x + normal.sample(&mut rng));
    }
    Ok((DataMatrix::new(points)?, Clustering::from_ids(labels)))
}

/// Noise-free positions: the arcs for moons and circles, blob samples for blobs.
pub fn skeleton(spec: &SyntheticSpec) -> Result<(Array2<f64>, Vec<usize>)> {
    let m = spec.m;
    let outer = m / 2;
    let inner = m - outer;
    let mut points = Array2::zeros((m, 2));
    let mut labels = Vec::with_capacity(m);
    match spec.shape {
        Shape::Moons => {
            for (j, t) in arc(outer, PI, true).enumerate() {
                points[[j, 0]] = t.cos();
                points[[j, 1]] = t.sin();
                labels.push(0);
            }
            for (j, t) in arc(inner, PI, true).enumerate() {
                points[[outer + j, 0]] = 1.0 - t.cos();
                points[[outer + j, 1]] = 0.5 - t.sin();
                labels.push(1);
            }
        }
        Shape::Circles { factor } => {
            if !(factor > 0.0 && factor < 1.0) {
                return Err(Error::InvalidArgument(format!("circle factor must lie in (0, 1), got {factor}")));
            }
            for (j, t) in arc(outer, 2.0 * PI, false).enumerate() {
                points[[j, 0]] = t.cos();
                points[[j, 1]] = t.sin();
                labels.push(0);
            }
            for (j, t) in arc(inner, 2.0 * PI, false).enumerate() {
                points[[outer + j, 0]] = factor * t.cos();
                points[[outer + j, 1]] = factor * t.sin();
                labels.push(1);
            }
        }
        Shape::Blobs { centers } => {
            if centers == 0 || centers > m {
                return Err(Error::InvalidArgument(format!("cannot place {centers} blobs on {m} points")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let centres: Vec<[f64; 2]> = (0..centers)
                .map(|_| [rng.random::<f64>() * BLOB_BOX, rng.random::<f64>() * BLOB_BOX])
                .collect();
            let normal = Normal::new(0.0, BLOB_STD).expect("valid std");
            let mut j = 0;
            for (c, centre) in centres.iter().enumerate() {
                let size = m / centers + usize::from(c < m % centers);
                for _ in 0..size {
                    points[[j, 0]] = centre[0] + normal.sample(&mut rng);
                    points[[j, 1]] = centre[1] + normal.sample(&mut rng);
                    labels.push(c);
                    j += 1;
                }
            }
        }
    }
    Ok((points, labels))
}

/// `count` evenly spaced angles over `[0, span]` (inclusive) or `[0, span)`.
fn arc(count: usize, span: f64, inclusive: bool) -> impl Iterator<Item = f64> {
    let steps = if inclusive { count.saturating_sub(1).max(1) } else { count.max(1) };
    (0..count).map(move |i| span * i as f64 / steps as f64)
}
