mod common;

use approx::assert_abs_diff_eq;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sna_core::centrality::{CentralityBundle, EigenvectorOptions};
use sna_core::community::{
    filter_communities, induced_graph, louvain, modularity, normalized_mutual_information, InducedOptions,
    LouvainOptions, Partition,
};
use sna_core::synth::planted_partition;
use sna_core::{build_graph, Graph};

fn labels_of(p: &Partition) -> Vec<usize> {
    p.labels().iter().map(|&l| l as usize).collect()
}

fn random_graphs(count: u64, n: std::ops::RangeInclusive<usize>) -> impl Iterator<Item = (u64, Graph)> {
    (0..count).filter_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(n.clone());
        let edges = random_edges(size, rng.gen_range(0.1..0.6), &mut rng);
        build_graph(edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))
            .ok()
            .map(|g| (seed, g))
    })
}

#[test]
fn modularity_matches_definition() {
    for (seed, g) in random_graphs(60, 3..=12) {
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let k = rng.gen_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let p = Partition::from_labels(&labels);
        assert_abs_diff_eq!(
            modularity(&g, &p),
            modularity_by_definition(&g, &labels),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(modularity(&g, &Partition::all_in_one(n)), 0.0, epsilon = 1e-12);
        let found = louvain(&g, &LouvainOptions::new(seed)).partition;
        assert_abs_diff_eq!(
            modularity(&g, &found),
            modularity_by_definition(&g, &labels_of(&found)),
            epsilon = 1e-12
        );
    }
}

#[test]
fn louvain_beats_trivial_partitions() {
    for (seed, g) in random_graphs(80, 2..=30) {
        let r = louvain(&g, &LouvainOptions::new(seed));
        let q = r.modularity();
        let n = g.node_count();
        assert!(q >= -1e-12, "seed {seed}: {q}");
        assert!(q >= modularity(&g, &Partition::singletons(n)) - 1e-12);
        assert!((-0.5..=1.0).contains(&q));
        for w in r.level_modularity.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "seed {seed}: {:?}", r.level_modularity);
        }
        assert_eq!(r.partition.sizes().iter().sum::<usize>(), n);
        assert!(r.partition.sizes().windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn louvain_near_exhaustive_optimum_on_small_graphs() {
    for (seed, g) in random_graphs(40, 4..=10) {
        let best = best_modularity_exhaustive(&g);
        let q = louvain(&g, &LouvainOptions::new(seed)).modularity();
        assert!(q >= best - 0.05, "seed {seed}: louvain {q}, optimum {best}");
        assert!(q <= best + 1e-12);
    }
}

#[test]
fn louvain_is_deterministic_across_threads() {
    let pp = planted_partition(6, 40, 0.2, 0.01, 3);
    let g = graph_of(&pp.edges);
    let opts = LouvainOptions::new(17);
    let a = louvain(&g, &opts);
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| louvain(&g, &opts));
    assert_eq!(a.partition, b.partition);
    assert_eq!(a.level_modularity, b.level_modularity);
}

#[test]
fn planted_blocks_are_recovered() {
    let mut good = 0;
    for seed in 0..30 {
        let pp = planted_partition(4, 25, 0.3, 0.01, seed);
        let g = graph_of(&pp.edges);
        let found = louvain(&g, &LouvainOptions::new(seed));
        let nmi = normalized_mutual_information(&labels_of(&found.partition), &pp.truth_for(&g));
        if nmi >= 0.95 {
            good += 1;
        }
    }
    assert!(good >= 28, "{good} of 30");
}

#[test]
fn nmi_identities() {
    let a = [0, 0, 1, 1, 2, 2];
    let relabeled = [5, 5, 3, 3, 9, 9];
    assert_abs_diff_eq!(normalized_mutual_information(&a, &relabeled), 1.0, epsilon = 1e-12);
    let independent = [0, 1, 0, 1];
    let b = [0, 0, 1, 1];
    assert_abs_diff_eq!(normalized_mutual_information(&b, &independent), 0.0, epsilon = 1e-12);
}

#[test]
fn induced_graph_conserves_edges() {
    for seed in 0..25 {
        let pp = planted_partition(5, 12, 0.4, 0.05, seed);
        let g = graph_of(&pp.edges);
        let bundle = CentralityBundle::compute(&g, &EigenvectorOptions::default()).unwrap();
        let p = louvain(&g, &LouvainOptions::new(seed)).partition;
        for min_size in [1, 5, 11] {
            let Ok(retained) = filter_communities(&p, min_size) else {
                continue;
            };
            for other_bucket in [false, true] {
                let ig = induced_graph(&g, &p, &retained, &bundle, InducedOptions { other_bucket });
                assert_eq!(ig.accounted_edges(), g.edge_count(), "seed {seed} min {min_size}");
                assert!(ig.edges.iter().all(|e| e.source < e.target));
                if other_bucket {
                    assert_eq!(ig.dropped_edges, 0);
                }
            }
        }
    }
}
