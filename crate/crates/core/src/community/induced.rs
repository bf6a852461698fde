//! Community-level ("induced") network.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{label_communities, Partition};
use crate::centrality::CentralityBundle;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedOptions {
    /// Fold every non-retained community into one "other" node instead of
    /// dropping the edges that touch them.
    pub other_bucket: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedNode {
    /// `None` for the "other" bucket.
    pub community: Option<usize>,
    pub label: String,
    pub size: usize,
    pub mean_betweenness: f64,
    pub intra_edges: usize,
}

/// `source < target`, both indices into [`InducedGraph::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedEdge {
    pub source: usize,
    pub target: usize,
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedGraph {
    pub nodes: Vec<InducedNode>,
    pub edges: Vec<InducedEdge>,
    /// Original edges with an endpoint outside the retained communities
    /// (always 0 with the "other" bucket).
    pub dropped_edges: usize,
}

impl InducedGraph {
    pub fn edge_weight_total(&self) -> usize {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn intra_total(&self) -> usize {
        self.nodes.iter().map(|n| n.intra_edges).sum()
    }

    /// Inter weights + intra counts + dropped edges; equals the original
    /// edge count.
    pub fn accounted_edges(&self) -> usize {
        self.edge_weight_total() + self.intra_total() + self.dropped_edges
    }
}

pub fn induced_graph(
    g: &Graph,
    p: &Partition,
    retained: &[usize],
    bundle: &CentralityBundle,
    opts: InducedOptions,
) -> InducedGraph {
    let labels = label_communities(g, p, bundle);
    let groups = p.groups();

    // community -> induced node slot
    let mut slot: Vec<Option<usize>> = vec![None; p.count()];
    let mut nodes: Vec<InducedNode> = retained
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            slot[c] = Some(i);
            let members = &groups[c];
            InducedNode {
                community: Some(c),
                label: labels[c].clone(),
                size: members.len(),
                mean_betweenness: members.iter().map(|v| bundle.betweenness[v.index()]).sum::<f64>()
                    / members.len() as f64,
                intra_edges: 0,
            }
        })
        .collect();

    let other = if opts.other_bucket && retained.len() < p.count() {
        let rest: Vec<_> = (0..p.count()).filter(|&c| slot[c].is_none()).collect();
        let size: usize = rest.iter().map(|&c| groups[c].len()).sum();
        let b_sum: f64 = rest
            .iter()
            .flat_map(|&c| groups[c].iter())
            .map(|v| bundle.betweenness[v.index()])
            .sum();
        nodes.push(InducedNode {
            community: None,
            label: "other".into(),
            size,
            mean_betweenness: b_sum / size as f64,
            intra_edges: 0,
        });
        Some(nodes.len() - 1)
    } else {
        None
    };

    let mut weights: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut dropped = 0;
    for (u, v) in g.edges() {
        let su = slot[p.community_of(u)].or(other);
        let sv = slot[p.community_of(v)].or(other);
        match (su, sv) {
            (Some(a), Some(b)) if a == b => nodes[a].intra_edges += 1,
            (Some(a), Some(b)) => *weights.entry((a.min(b), a.max(b))).or_insert(0) += 1,
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        log::info!("induced graph: {dropped} edges touch non-retained communities and were dropped");
    }

    let edges = weights
        .into_iter()
        .map(|((source, target), weight)| InducedEdge { source, target, weight })
        .collect();
    InducedGraph {
        nodes,
        edges,
        dropped_edges: dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::EigenvectorOptions;
    use crate::community::tests::two_cliques;
    use crate::graph::build_graph;

    fn clique_partition() -> Partition {
        Partition::from_labels(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    }

    #[test]
    fn cross_edges_become_one_weight() {
        let g = two_cliques(3);
        let b = CentralityBundle::compute(&g, &EigenvectorOptions::default()).unwrap();
        let ig = induced_graph(&g, &clique_partition(), &[0, 1], &b, InducedOptions::default());
        assert_eq!(
            ig.edges,
            vec![InducedEdge {
                source: 0,
                target: 1,
                weight: 3
            }]
        );
        assert_eq!(ig.intra_total(), 20);
        assert_eq!(ig.accounted_edges(), g.edge_count());
    }

    #[test]
    fn no_cross_edges_no_induced_edges() {
        let g = two_cliques(0);
        let b = CentralityBundle::compute(&g, &EigenvectorOptions::default()).unwrap();
        let ig = induced_graph(&g, &clique_partition(), &[0, 1], &b, InducedOptions::default());
        assert!(ig.edges.is_empty());
        assert_eq!(ig.nodes.len(), 2);
    }

    #[test]
    fn dropped_versus_other_bucket() {
        // clique pair plus a pendant triangle hanging off a0
        let mut e: Vec<(String, String)> = two_cliques(1).edge_names();
        e.push(("a0".into(), "t0".into()));
        e.push(("t0".into(), "t1".into()));
        e.push(("t1".into(), "a1".into()));
        let g = build_graph(e).unwrap();
        let labels: Vec<u32> = g
            .names()
            .iter()
            .map(|n| match n.chars().next().unwrap() {
                'a' => 0,
                'b' => 1,
                _ => 2,
            })
            .collect();
        let p = Partition::from_labels(&labels);
        let b = CentralityBundle::compute(&g, &EigenvectorOptions::default()).unwrap();

        let dropped = induced_graph(&g, &p, &[0, 1], &b, InducedOptions::default());
        assert_eq!(dropped.dropped_edges, 3);
        assert_eq!(dropped.accounted_edges(), g.edge_count());

        let bucket = induced_graph(&g, &p, &[0, 1], &b, InducedOptions { other_bucket: true });
        assert_eq!(bucket.dropped_edges, 0);
        assert_eq!(bucket.nodes.len(), 3);
        assert_eq!(bucket.nodes[2].community, None);
        assert_eq!(bucket.nodes[2].size, 2);
        assert_eq!(bucket.nodes[2].intra_edges, 1);
        assert_eq!(bucket.accounted_edges(), g.edge_count());
    }
}
