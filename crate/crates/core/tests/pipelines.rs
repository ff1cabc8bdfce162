use proptest::prelude::*;

use spectacl::datagen::{generate, Shape, SyntheticSpec};
use spectacl::metrics::{average_density_objective, f_measure};
use spectacl::{dbscan, spectacl, Clustering, DataMatrix, DbscanConfig, EpsilonChoice, Input, SparseSymmetricMatrix, SpectaclConfig};

fn random_graph(m: usize, edges: &[(usize, usize)]) -> SparseSymmetricMatrix {
    let unique: std::collections::BTreeSet<(usize, usize)> =
        edges.iter().filter(|(j, l)| j != l).map(|&(j, l)| (j.min(l), j.max(l))).collect();
    SparseSymmetricMatrix::from_entries(m, unique.into_iter().map(|(j, l)| (j, l, 1.0))).unwrap()
}

fn best_two_cluster(w: &SparseSymmetricMatrix) -> f64 {
    let m = w.dim();
    (1..(1u32 << (m - 1)))
        .map(|mask| average_density_objective(&Clustering::from_ids((0..m).map(|j| ((mask >> j) & 1) as usize)), w).unwrap())
        .fold(f64::MIN, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectacl_output_is_a_full_partition_below_the_optimum(
        m in 3usize..10,
        edges in prop::collection::vec((0usize..10, 0usize..10), 0..30),
        seed in 0u64..1000,
    ) {
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(j, l)| j < m && l < m).collect();
        let w = random_graph(m, &edges);
        let config = SpectaclConfig { d: m, seed, ..SpectaclConfig::unnormalized(2) };
        let run = spectacl(Input::Graph(&w), &config).unwrap();
        prop_assert_eq!(run.clustering.len(), m);
        prop_assert_eq!(run.clustering.noise_count(), 0);
        prop_assert!(run.clustering.sizes().iter().all(|&s| s > 0));
        let got = average_density_objective(&run.clustering, &w).unwrap();
        prop_assert!(got <= best_two_cluster(&w) + 1e-9);
    }

    #[test]
    fn dbscan_clusters_partition_core_points(seed in 0u64..500, min_pts in 1usize..8, eps in 0.05f64..0.5) {
        let (data, _) = generate(&SyntheticSpec { shape: Shape::Moons, m: 80, noise: 0.1, seed }).unwrap();
        let (y, radius) = dbscan(&data, &DbscanConfig { epsilon: EpsilonChoice::Fixed(eps), min_pts }).unwrap();
        prop_assert_eq!(radius, eps);
        let x = data.values();
        let dist = |a: usize, b: usize| (&x.row(a) - &x.row(b)).mapv(|v| v * v).sum().sqrt();
        let neighbors = |j: usize| (0..80).filter(move |&l| l != j && dist(j, l) < eps);
        for j in 0..80 {
            let core = neighbors(j).count() >= min_pts;
            if core {
                // core points share a cluster with all their core neighbors
                prop_assert!(y.labels()[j].is_some());
                for l in neighbors(j).filter(|&l| neighbors(l).count() >= min_pts) {
                    prop_assert_eq!(y.labels()[j], y.labels()[l]);
                }
            } else {
                // non-core points are noise exactly when no core point is within reach
                let reach = neighbors(j).any(|l| neighbors(l).count() >= min_pts);
                prop_assert_eq!(y.labels()[j].is_some(), reach);
            }
        }
    }
}

#[test]
fn spectacl_is_deterministic_and_order_robust() {
    let (data, truth) = generate(&SyntheticSpec { shape: Shape::Circles { factor: 0.5 }, m: 600, noise: 0.05, seed: 3 }).unwrap();
    let config = SpectaclConfig { seed: 4, ..SpectaclConfig::unnormalized(2) };
    let a = spectacl(Input::Points(&data), &config).unwrap();
    let b = spectacl(Input::Points(&data), &config).unwrap();
    assert_eq!(a.clustering, b.clustering);
    // reversing the rows permutes the graph but should not change the quality
    let rows: Vec<Vec<f64>> = (0..600).rev().map(|j| data.row(j).to_vec()).collect();
    let reversed = DataMatrix::from_rows(&rows).unwrap();
    let truth_rev = Clustering::from_ids((0..600).rev().map(|j| truth.labels()[j].unwrap()));
    let c = spectacl(Input::Points(&reversed), &config).unwrap();
    let fa = f_measure(&a.clustering, &truth).unwrap().total_f;
    let fc = f_measure(&c.clustering, &truth_rev).unwrap().total_f;
    assert!((fa - fc).abs() < 0.02, "{fa} vs {fc}");
    assert_eq!(a.epsilon, c.epsilon);
}
