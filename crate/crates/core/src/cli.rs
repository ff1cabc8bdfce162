//! Command-line harness: single runs and parameter sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;

use crate::clustering::Clustering;
use crate::datagen::{generate, Shape, SyntheticSpec, DEFAULT_POINTS};
use crate::dataio::{load_edge_list, load_points, load_points_with_labels, write_clustering, DataMatrix};
use crate::error::{Error, Result};
use crate::graph::{epsilon_graph, SparseSymmetricMatrix};
use crate::metrics::{average_density_objective, f_measure, nmi};
use crate::pipelines::{
    dbscan, spectacl, spectral_clustering, DbscanConfig, EpsilonChoice, Input, SpectaclConfig, SpectaclVariant,
    SpectralConfig, DEFAULT_EMBEDDING_DIM, DEFAULT_KNN, DEFAULT_MIN_PTS,
};
use crate::svg;

#[derive(Parser, Debug)]
#[command(name = "spectacl", version, about = "Density-based spectral clustering and baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cluster one dataset and report metrics.
    Cluster(ClusterArgs),
    /// Sweep one parameter over synthetic data and tabulate F-measure and NMI.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Spectacl,
    SpectaclNorm,
    Sc,
    Dbscan,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Spectacl => "spectacl",
            Algorithm::SpectaclNorm => "spectacl_normalized",
            Algorithm::Sc => "sc",
            Algorithm::Dbscan => "dbscan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Moons,
    Circles,
    Blobs,
}

impl ShapeArg {
    fn shape(self) -> Shape {
        match self {
            ShapeArg::Moons => Shape::Moons,
            ShapeArg::Circles => "circles".parse().expect("known shape"),
            ShapeArg::Blobs => "blobs".parse().expect("known shape"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Noise,
    Epsilon,
    K,
    D,
}

/// Algorithm parameters shared by both subcommands.
#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Number of clusters.
    #[arg(short = 'r')]
    pub r: Option<usize>,
    /// Projected eigenvectors.
    #[arg(short = 'd', default_value_t = DEFAULT_EMBEDDING_DIM)]
    pub d: usize,
    /// Neighborhood radius, or `auto` for the coverage heuristic.
    #[arg(long, default_value = "auto", value_parser = parse_epsilon)]
    pub eps: EpsilonChoice,
    #[arg(long, default_value_t = DEFAULT_KNN)]
    pub knn: usize,
    #[arg(long = "min-pts", default_value_t = DEFAULT_MIN_PTS)]
    pub min_pts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub params: Params,
    /// Noise level for generated data.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Points for generated data.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    /// The last column of `--in` holds ground-truth labels.
    #[arg(long)]
    pub labels: bool,
    /// `--in` starts with a header line.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Labels CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG scatter plot colored by cluster.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Generate a synthetic shape.
    #[arg(long = "gen", value_enum)]
    pub generate: Option<ShapeArg>,
    /// Delimited point file.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Weighted edge list.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long = "gen", value_enum)]
    pub shape: ShapeArg,
    #[arg(long, value_enum)]
    pub sweep: Axis,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Algorithms to compare; all four by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub algo: Vec<Algorithm>,
    #[command(flatten)]
    pub params: Params,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Sweep CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG line chart with mean ± std bands.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn parse_epsilon(s: &str) -> std::result::Result<EpsilonChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Cluster(args) => run_cluster(&args),
        Command::Sweep(args) => run_sweep(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(clap::Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(kind: ErrorKind, message: impl std::fmt::Display) -> Failure {
    Failure::Usage(Cli::command().error(kind, message))
}

enum Loaded {
    Points(DataMatrix, Option<Clustering>),
    Graph(SparseSymmetricMatrix),
}

fn load(args: &ClusterArgs) -> Result<Loaded> {
    if let Some(shape) = args.source.generate {
        let spec = SyntheticSpec {
            shape: shape.shape(),
            m: args.points,
            noise: args.noise,
            seed: args.params.seed,
        };
        let (data, truth) = generate(&spec)?;
        return Ok(Loaded::Points(data, Some(truth)));
    }
    if let Some(path) = &args.source.input {
        return Ok(if args.labels {
            let (data, truth) = load_points_with_labels(path, args.delimiter, args.header)?;
            Loaded::Points(data, Some(truth))
        } else {
            Loaded::Points(load_points(path, args.delimiter, args.header)?, None)
        });
    }
    let path = args.source.graph.as_ref().expect("clap enforces one source");
    Ok(Loaded::Graph(SparseSymmetricMatrix::from_edge_list(&load_edge_list(path)?)?))
}

/// Outcome of one pipeline call.
pub struct Outcome {
    pub clustering: Clustering,
    pub adjacency: Option<SparseSymmetricMatrix>,
    pub epsilon: Option<f64>,
    pub runtime_ms: f64,
}

/// Runs `algo` on `input` with `params`; `r` must already be resolved.
pub fn execute(algo: Algorithm, input: Input<'_>, params: &Params, r: usize) -> Result<Outcome> {
    let start = Instant::now();
    let (clustering, adjacency, epsilon) = match algo {
        Algorithm::Spectacl | Algorithm::SpectaclNorm => {
            let variant = if algo == Algorithm::Spectacl {
                SpectaclVariant::Unnormalized { epsilon: params.eps }
            } else {
                SpectaclVariant::Normalized { k: params.knn }
            };
            let config = SpectaclConfig {
                variant,
                d: params.d,
                seed: params.seed,
                restarts: params.restarts,
                ..SpectaclConfig::unnormalized(r)
            };
            let run = spectacl(input, &config)?;
            (run.clustering, Some(run.adjacency), run.epsilon)
        }
        Algorithm::Sc => {
            let config = SpectralConfig {
                k: params.knn,
                seed: params.seed,
                restarts: params.restarts,
                ..SpectralConfig::new(r)
            };
            let run = spectral_clustering(input, &config)?;
            (run.clustering, Some(run.adjacency), None)
        }
        Algorithm::Dbscan => {
            let Input::Points(data) = input else {
                return Err(Error::InvalidArgument("dbscan needs point coordinates, not a graph".into()));
            };
            let config = DbscanConfig {
                epsilon: params.eps,
                min_pts: params.min_pts,
            };
            let (clustering, radius) = dbscan(data, &config)?;
            (clustering, None, Some(radius))
        }
    };
    Ok(Outcome {
        clustering,
        adjacency,
        epsilon,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn run_cluster(args: &ClusterArgs) -> std::result::Result<(), Failure> {
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(usage(ErrorKind::ValueValidation, "--noise must be a nonnegative number"));
    }
    let loaded = load(args)?;
    let (input, truth, coords) = match &loaded {
        Loaded::Points(data, truth) => (Input::Points(data), truth.as_ref(), Some(data)),
        Loaded::Graph(w) => (Input::Graph(w), None, None),
    };
    if args.algo == Algorithm::Dbscan && coords.is_none() {
        return Err(usage(ErrorKind::ArgumentConflict, "dbscan does not accept --graph input"));
    }
    if args.plot.is_some() && coords.is_none() {
        return Err(usage(ErrorKind::ArgumentConflict, "--plot needs point coordinates"));
    }
    let r = match (args.params.r, args.algo) {
        (Some(r), _) => r,
        (None, Algorithm::Dbscan) => 0,
        (None, _) => {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                format!("-r is required for --algo {}", args.algo.name()),
            ))
        }
    };
    if r == 0 && args.algo != Algorithm::Dbscan {
        return Err(usage(ErrorKind::ValueValidation, "-r must be positive"));
    }
    let outcome = execute(args.algo, input, &args.params, r)?;
    if let Some(radius) = outcome.epsilon {
        info!("epsilon = {radius}");
    }
    // DBSCAN has no adjacency of its own; score it on the ε-graph it used.
    let adjacency = match (&outcome.adjacency, coords, outcome.epsilon) {
        (Some(w), _, _) => w.clone(),
        (None, Some(data), Some(radius)) => epsilon_graph(data, radius)?,
        _ => unreachable!("every algorithm yields an adjacency or a radius"),
    };
    let mut line = format!(
        "algorithm={} points={} clusters={} noise={} objective={:?}",
        args.algo.name(),
        outcome.clustering.len(),
        outcome.clustering.n_clusters(),
        outcome.clustering.noise_count(),
        average_density_objective(&outcome.clustering, &adjacency)?,
    );
    if let Some(radius) = outcome.epsilon {
        write!(line, " epsilon={radius:?}").unwrap();
    }
    if let Some(truth) = truth {
        write!(
            line,
            " f_measure={:?} nmi={:?}",
            f_measure(&outcome.clustering, truth)?.total_f,
            nmi(&outcome.clustering, truth)?
        )
        .unwrap();
    }
    write!(line, " runtime_ms={:.1}", outcome.runtime_ms).unwrap();
    println!("{line}");
    if let Some(path) = &args.out {
        write_clustering(path, &outcome.clustering)?;
    }
    if let (Some(path), Some(data)) = (&args.plot, coords) {
        let title = format!("{} ({} clusters)", args.algo.name(), outcome.clustering.n_clusters());
        write_text(path, &svg::scatter(data, &outcome.clustering, &title))?;
    }
    Ok(())
}

/// One evaluated grid cell.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub repeat: usize,
    pub f_measure: f64,
    pub nmi: f64,
    pub runtime_ms: f64,
}

/// Mean and sample standard deviation of one (axis value, algorithm) group.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub f_mean: f64,
    pub f_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub runtime_mean: f64,
    pub runtime_std: f64,
}

/// Dataset seed for one grid cell; stable across platforms and releases.
pub fn cell_seed(base: u64, axis_index: usize, repeat: usize) -> u64 {
    let mut z = base;
    for part in [axis_index as u64, repeat as u64] {
        z = splitmix(z ^ splitmix(part.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_axis_value(axis: Axis, v: f64) -> std::result::Result<(), String> {
    let ok = match axis {
        Axis::Noise => v.is_finite() && v >= 0.0,
        Axis::Epsilon => v.is_finite() && v > 0.0,
        Axis::K | Axis::D => v >= 1.0 && v.fract() == 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("invalid value {v} for axis {axis:?}"))
    }
}

/// Evaluates every (axis value, repeat, algorithm) cell. Results come back in
/// (axis index, algorithm, repeat) order; the first failing cell in that order
/// ends the list and its error is returned alongside.
pub fn sweep_rows(args: &SweepArgs) -> (Vec<SweepRow>, Option<Error>) {
    let algorithms = selected_algorithms(args);
    let shape = args.shape.shape();
    let r = args.params.r.unwrap_or(shape.clusters());
    let cells: Vec<(usize, usize)> = (0..args.values.len())
        .flat_map(|i| (0..args.repeats).map(move |rep| (i, rep)))
        .collect();
    let mut results: Vec<Vec<Option<Result<SweepRow>>>> = cells
        .par_iter()
        .map(|&(i, repeat)| {
            let value = args.values[i];
            let seed = cell_seed(args.params.seed, i, repeat);
            let mut params = args.params.clone();
            params.seed = seed;
            let mut noise = args.noise;
            match args.sweep {
                Axis::Noise => noise = value,
                Axis::Epsilon => params.eps = EpsilonChoice::Fixed(value),
                Axis::K => params.knn = value as usize,
                Axis::D => params.d = value as usize,
            }
            let spec = SyntheticSpec {
                shape,
                m: args.points,
                noise,
                seed,
            };
            let (data, truth) = match generate(&spec) {
                Ok(generated) => generated,
                // later algorithms of this cell are never reached in output order
                Err(e) => {
                    let mut failed = vec![Some(Err(e))];
                    failed.resize_with(algorithms.len(), || Some(Err(Error::InvalidData("skipped".into()))));
                    return failed;
                }
            };
            algorithms
                .iter()
                .map(|&algo| {
                    let outcome = execute(algo, Input::Points(&data), &params, r)?;
                    Ok(SweepRow {
                        axis_value: value,
                        algorithm: algo,
                        repeat,
                        f_measure: f_measure(&outcome.clustering, &truth)?.total_f,
                        nmi: nmi(&outcome.clustering, &truth)?,
                        runtime_ms: outcome.runtime_ms,
                    })
                })
                .map(Some)
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len() * algorithms.len());
    for i in 0..args.values.len() {
        for a in 0..algorithms.len() {
            for repeat in 0..args.repeats {
                match results[i * args.repeats + repeat][a].take().expect("each cell read once") {
                    Ok(row) => rows.push(row),
                    Err(e) => return (rows, Some(e)),
                }
            }
        }
    }
    (rows, None)
}

fn selected_algorithms(args: &SweepArgs) -> Vec<Algorithm> {
    if args.algo.is_empty() {
        vec![Algorithm::Spectacl, Algorithm::SpectaclNorm, Algorithm::Sc, Algorithm::Dbscan]
    } else {
        let mut seen = Vec::new();
        for &a in &args.algo {
            if !seen.contains(&a) {
                seen.push(a);
            }
        }
        seen
    }
}

/// Groups consecutive rows by (axis value, algorithm).
pub fn aggregate(rows: &[SweepRow]) -> Vec<Aggregate> {
    rows.chunk_by(|a, b| a.axis_value == b.axis_value && a.algorithm == b.algorithm)
        .map(|group| {
            let (f_mean, f_std) = mean_std(group.iter().map(|r| r.f_measure));
            let (nmi_mean, nmi_std) = mean_std(group.iter().map(|r| r.nmi));
            let (runtime_mean, runtime_std) = mean_std(group.iter().map(|r| r.runtime_ms));
            Aggregate {
                axis_value: group[0].axis_value,
                algorithm: group[0].algorithm,
                f_mean,
                f_std,
                nmi_mean,
                nmi_std,
                runtime_mean,
                runtime_std,
            }
        })
        .collect()
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const SWEEP_HEADER: &str = "axis_value,algorithm,repeat,f_measure,nmi,runtime_ms";

/// Sweep table: one line per cell, then `mean` and `std` lines per group.
pub fn sweep_csv(rows: &[SweepRow], error: Option<&Error>) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{:?},{},{},{:?},{:?},{:.3}",
            r.axis_value,
            r.algorithm.name(),
            r.repeat,
            r.f_measure,
            r.nmi,
            r.runtime_ms
        )
        .unwrap();
    }
    for a in aggregate(rows) {
        let name = a.algorithm.name();
        writeln!(
            out,
            "{:?},{name},mean,{:?},{:?},{:.3}",
            a.axis_value, a.f_mean, a.nmi_mean, a.runtime_mean
        )
        .unwrap();
        writeln!(
            out,
            "{:?},{name},std,{:?},{:?},{:.3}",
            a.axis_value, a.f_std, a.nmi_std, a.runtime_std
        )
        .unwrap();
    }
    if let Some(e) = error {
        writeln!(out, "# incomplete: {e}").unwrap();
    }
    out
}

pub fn run_sweep(args: &SweepArgs) -> std::result::Result<(), Failure> {
    if args.repeats == 0 {
        return Err(usage(ErrorKind::ValueValidation, "--repeats must be at least 1"));
    }
    for &v in &args.values {
        check_axis_value(args.sweep, v).map_err(|m| usage(ErrorKind::ValueValidation, m))?;
    }
    let (rows, error) = sweep_rows(args);
    let table = sweep_csv(&rows, error.as_ref());
    match &args.out {
        Some(path) => write_text(path, &table)?,
        None => print!("{table}"),
    }
    if let Some(e) = error {
        return Err(e.into());
    }
    if let Some(path) = &args.plot {
        let axis = format!("{:?}", args.sweep).to_lowercase();
        write_text(path, &svg::line_chart(&aggregate(&rows), &axis, "F-measure"))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_differ() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10 {
            for rep in 0..10 {
                assert!(seen.insert(cell_seed(3, i, rep)));
            }
        }
        assert_eq!(cell_seed(3, 1, 2), cell_seed(3, 1, 2));
        assert_ne!(cell_seed(3, 1, 2), cell_seed(4, 1, 2));
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std([1.0, 2.0, 3.0].into_iter());
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
        assert_eq!(mean_std([5.0].into_iter()), (5.0, 0.0));
    }

    #[test]
    fn axis_values_validated() {
        assert!(check_axis_value(Axis::D, 2.5).is_err());
        assert!(check_axis_value(Axis::K, 0.0).is_err());
        assert!(check_axis_value(Axis::Epsilon, 0.0).is_err());
        assert!(check_axis_value(Axis::Noise, 0.0).is_ok());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
