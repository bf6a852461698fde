//! Two-phase Louvain modularity optimization.
//!
//! Phase one moves single nodes between neighboring communities while any
//! move raises modularity by more than `MIN_GAIN`; phase two collapses each
//! community into one weighted node. The two phases repeat until a local
//! moving pass leaves every node in place.
//!
//! Node visit order is a seeded shuffle, candidate communities are scanned in
//! ascending id order and only a strictly larger gain displaces the current
//! best, so the lowest id wins ties. Everything runs on one thread; the
//! result depends only on the graph and the seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{modularity_with_resolution, Partition};
use crate::graph::Graph;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainOptions {
    pub seed: u64,
    pub resolution: f64,
}

impl LouvainOptions {
    pub fn new(seed: u64) -> Self {
        LouvainOptions { seed, resolution: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainResult {
    pub partition: Partition,
    /// Modularity of the all-singletons start, then after each aggregation
    /// level.
    pub level_modularity: Vec<f64>,
}

impl LouvainResult {
    pub fn modularity(&self) -> f64 {
        *self.level_modularity.last().unwrap()
    }
}

/// Weighted graph for one aggregation level. `loops[i]` is the diagonal
/// adjacency entry (twice the internal edge weight).
struct Level {
    adj: Vec<Vec<(u32, f64)>>,
    loops: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(u32, f64)>> = g
            .nodes()
            .map(|v| g.neighbors(v).iter().map(|w| (w.index() as u32, 1.0)).collect())
            .collect();
        let strength = adj.iter().map(|a| a.len() as f64).collect();
        Level {
            loops: vec![0.0; adj.len()],
            adj,
            strength,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapses communities (dense ids `0..count`) into single nodes.
    fn aggregate(&self, comm: &[u32], count: usize) -> Level {
        let mut loops = vec![0.0; count];
        let mut strength = vec![0.0; count];
        let mut triples: Vec<(u32, u32, f64)> = Vec::new();
        for i in 0..self.len() {
            let ci = comm[i];
            loops[ci as usize] += self.loops[i];
            strength[ci as usize] += self.strength[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j as usize];
                if ci == cj {
                    loops[ci as usize] += w;
                } else {
                    triples.push((ci, cj, w));
                }
            }
        }
        triples.sort_by_key(|a| (a.0, a.1));
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); count];
        for (a, b, w) in triples {
            let row = &mut adj[a as usize];
            match row.last_mut() {
                Some((last, acc)) if *last == b => *acc += w,
                _ => row.push((b, w)),
            }
        }
        Level { adj, loops, strength }
    }
}

/// One local-moving phase. Returns dense community ids and whether any node
/// moved.
fn local_moving(level: &Level, m: f64, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<u32>, bool) {
    let n = level.len();
    let mut comm: Vec<u32> = (0..n as u32).collect();
    let mut tot = level.strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let ci = comm[i];
            let ki = level.strength[i];
            for &(j, w) in &level.adj[i] {
                let cj = comm[j as usize];
                if link[cj as usize] == 0.0 {
                    touched.push(cj);
                }
                link[cj as usize] += w;
            }
            tot[ci as usize] -= ki;

            // gain(c) = k_i,c / m − γ·Σtot_c·k_i / (2m²)
            let gain = |c: u32, link: &[f64]| link[c as usize] / m - resolution * tot[c as usize] * ki / (2.0 * m * m);
            let stay = gain(ci, &link);
            let mut best = ci;
            let mut best_gain = stay;
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, &link);
                if g > best_gain {
                    best = c;
                    best_gain = g;
                }
            }
            if best != ci && best_gain - stay > MIN_GAIN {
                comm[i] = best;
                moved = true;
            } else {
                best = ci;
            }
            tot[best as usize] += ki;

            for &c in &touched {
                link[c as usize] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any_move = true;
    }

    // dense renumbering in order of first appearance
    let mut rename = vec![u32::MAX; n];
    let mut next = 0;
    for c in comm.iter_mut() {
        if rename[*c as usize] == u32::MAX {
            rename[*c as usize] = next;
            next += 1;
        }
        *c = rename[*c as usize];
    }
    (comm, any_move)
}

pub fn louvain(g: &Graph, opts: &LouvainOptions) -> LouvainResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m = g.edge_count() as f64;
    let mut node_comm: Vec<u32> = (0..g.node_count() as u32).collect();
    let mut level_modularity = vec![modularity_with_resolution(
        g,
        &Partition::singletons(g.node_count()),
        opts.resolution,
    )];
    let mut level = Level::from_graph(g);

    loop {
        let (comm, moved) = local_moving(&level, m, opts.resolution, &mut rng);
        if !moved {
            break;
        }
        for c in node_comm.iter_mut() {
            *c = comm[*c as usize];
        }
        let count = comm.iter().max().map_or(0, |&c| c as usize + 1);
        let q = modularity_with_resolution(g, &Partition::from_labels(&node_comm), opts.resolution);
        debug_assert!(
            q + 1e-12 >= *level_modularity.last().unwrap(),
            "modularity decreased across a level"
        );
        level_modularity.push(q);
        level = level.aggregate(&comm, count);
    }

    LouvainResult {
        partition: Partition::from_labels(&node_comm),
        level_modularity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity;
    use crate::community::tests::two_cliques;
    use crate::graph::build_graph;

    #[test]
    fn separates_two_bridged_cliques() {
        let g = two_cliques(1);
        for seed in 0..20 {
            let r = louvain(&g, &LouvainOptions::new(seed));
            assert_eq!(r.partition.sizes(), &[5, 5], "seed {seed}");
            let p = &r.partition;
            for i in 0..5 {
                assert_eq!(p.labels()[i], p.labels()[0]);
                assert_eq!(p.labels()[i + 5], p.labels()[5]);
            }
            assert!((r.modularity() - modularity(&g, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge() {
        let g = build_graph([("a", "b")]).unwrap();
        let r = louvain(&g, &LouvainOptions::new(1));
        // merging the pair gives Q = 0, splitting gives -0.5
        assert_eq!(r.partition.count(), 1);
        assert_eq!(r.modularity(), 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = two_cliques(3);
        let a = louvain(&g, &LouvainOptions::new(42));
        let b = louvain(&g, &LouvainOptions::new(42));
        assert_eq!(a, b);
    }

    #[test]
    fn level_modularity_never_decreases() {
        let g = two_cliques(2);
        let r = louvain(&g, &LouvainOptions::new(3));
        for w in r.level_modularity.windows(2) {
            assert!(w[1] + 1e-12 >= w[0]);
        }
    }
}
