//! Partitions, modularity, and per-community summaries.

mod induced;
mod louvain;

pub use induced::{induced_graph, InducedEdge, InducedGraph, InducedNode, InducedOptions};
pub use louvain::{louvain, LouvainOptions, LouvainResult};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::centrality::{rank_nodes, CentralityBundle, RankedPerson};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Node → community assignment. Community ids are dense from 0 and ordered
/// by size, largest first; equal sizes keep first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Renumbers arbitrary labels into the canonical size-descending ids.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut first_seen: HashMap<L, usize> = HashMap::new();
        let mut raw = Vec::with_capacity(labels.len());
        let mut sizes: Vec<usize> = Vec::new();
        for &l in labels {
            let next = first_seen.len();
            let id = *first_seen.entry(l).or_insert(next);
            if id == sizes.len() {
                sizes.push(0);
            }
            sizes[id] += 1;
            raw.push(id);
        }
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut rename = vec![0u32; sizes.len()];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new as u32;
        }
        Partition {
            labels: raw.into_iter().map(|r| rename[r]).collect(),
            sizes: order.iter().map(|&o| sizes[o]).collect(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n as u32).collect(),
            sizes: vec![1; n],
        }
    }

    pub fn all_in_one(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            sizes: if n == 0 { vec![] } else { vec![n] },
        }
    }

    /// Number of nodes covered.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of communities.
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn community_of(&self, v: NodeId) -> usize {
        self.labels[v.index()] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, community: usize) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l as usize == community)
            .map(|(i, _)| NodeId::new(i))
            .collect()
    }

    /// Members of every community, each list in ascending node order.
    pub fn groups(&self) -> Vec<Vec<NodeId>> {
        let mut groups: Vec<Vec<NodeId>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l as usize].push(NodeId::new(i));
        }
        groups
    }
}

/// Intra-community edge count per community.
pub fn internal_edge_counts(g: &Graph, p: &Partition) -> Vec<usize> {
    let mut counts = vec![0; p.count()];
    for (u, v) in g.edges() {
        let c = p.community_of(u);
        if c == p.community_of(v) {
            counts[c] += 1;
        }
    }
    counts
}

/// Newman modularity `Σ_c [e_c/m − (d_c/2m)²]`.
pub fn modularity(g: &Graph, p: &Partition) -> f64 {
    modularity_with_resolution(g, p, 1.0)
}

/// Modularity with the expected-edge term scaled by `resolution`.
pub fn modularity_with_resolution(g: &Graph, p: &Partition, resolution: f64) -> f64 {
    assert_eq!(p.len(), g.node_count(), "partition does not cover the graph");
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let intra = internal_edge_counts(g, p);
    let mut degree_sum = vec![0usize; p.count()];
    for v in g.nodes() {
        degree_sum[p.community_of(v)] += g.neighbors(v).len();
    }
    intra
        .iter()
        .zip(&degree_sum)
        .map(|(&e, &d)| {
            let frac = d as f64 / (2.0 * m);
            e as f64 / m - resolution * frac * frac
        })
        .sum()
}

/// Ids of communities with at least `min_size` members, largest first.
pub fn filter_communities(p: &Partition, min_size: usize) -> Result<Vec<usize>> {
    let mut kept: Vec<usize> = (0..p.count()).filter(|&c| p.sizes()[c] >= min_size).collect();
    if kept.is_empty() {
        return Err(Error::NothingRetained { min_size });
    }
    kept.sort_by(|&a, &b| p.sizes()[b].cmp(&p.sizes()[a]).then(a.cmp(&b)));
    Ok(kept)
}

/// Each community's label: its member with the highest betweenness, ties
/// resolved by name.
pub fn label_communities(g: &Graph, p: &Partition, bundle: &CentralityBundle) -> Vec<String> {
    p.groups()
        .into_iter()
        .map(|mut members| {
            rank_nodes(g, &mut members, |v| bundle.betweenness[v.index()]);
            g.name(members[0]).to_owned()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub community: usize,
    pub label: String,
    pub size: usize,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
    pub clustering: f64,
    /// Internal edges over `C(size, 2)`; 0 for singletons.
    pub density: f64,
    pub internal_edges: usize,
}

/// Mean centralities per retained community, highest mean betweenness first.
pub fn community_summary(
    g: &Graph,
    p: &Partition,
    bundle: &CentralityBundle,
    retained: &[usize],
) -> Vec<CommunitySummary> {
    let labels = label_communities(g, p, bundle);
    let intra = internal_edge_counts(g, p);
    let groups = p.groups();
    let mut rows: Vec<CommunitySummary> = retained
        .iter()
        .map(|&c| {
            let members = &groups[c];
            let s = members.len();
            let mean = |xs: &[f64]| members.iter().map(|v| xs[v.index()]).sum::<f64>() / s as f64;
            let pairs = s * s.saturating_sub(1) / 2;
            CommunitySummary {
                community: c,
                label: labels[c].clone(),
                size: s,
                betweenness: mean(&bundle.betweenness),
                closeness: mean(&bundle.closeness),
                eigenvector: mean(&bundle.eigenvector),
                clustering: mean(&bundle.clustering),
                density: if pairs == 0 {
                    0.0
                } else {
                    intra[c] as f64 / pairs as f64
                },
                internal_edges: intra[c],
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.betweenness
            .total_cmp(&a.betweenness)
            .then(b.size.cmp(&a.size))
            .then(a.community.cmp(&b.community))
    });
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityMembers {
    pub community: usize,
    pub members: Vec<RankedPerson>,
}

/// Top `k` members by betweenness for each retained community.
pub fn top_members(
    g: &Graph,
    p: &Partition,
    bundle: &CentralityBundle,
    retained: &[usize],
    k: usize,
) -> Result<Vec<CommunityMembers>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let groups = p.groups();
    Ok(retained
        .iter()
        .map(|&c| {
            let mut members = groups[c].clone();
            rank_nodes(g, &mut members, |v| bundle.betweenness[v.index()]);
            CommunityMembers {
                community: c,
                members: members
                    .into_iter()
                    .take(k)
                    .map(|v| RankedPerson {
                        node: v,
                        name: g.name(v).to_owned(),
                        score: bundle.betweenness[v.index()],
                    })
                    .collect(),
            }
        })
        .collect())
}

/// Normalized mutual information `2 I(A;B) / (H(A) + H(B))` between two
/// labelings of the same items. Two single-cluster labelings score 1.
pub fn normalized_mutual_information<A, B>(a: &[A], b: &[B]) -> f64
where
    A: Copy + Eq + std::hash::Hash,
    B: Copy + Eq + std::hash::Hash,
{
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len() as f64;
    let pa = Partition::from_labels(a);
    let pb = Partition::from_labels(b);
    let mut joint: HashMap<(u32, u32), usize> = HashMap::new();
    for (&x, &y) in pa.labels().iter().zip(pb.labels()) {
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let entropy = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .map(|&s| {
                let q = s as f64 / n;
                -q * q.ln()
            })
            .sum()
    };
    let (ha, hb) = (entropy(pa.sizes()), entropy(pb.sizes()));
    if ha + hb == 0.0 {
        return 1.0;
    }
    let mut keys: Vec<_> = joint.into_iter().collect();
    keys.sort_unstable();
    let mi: f64 = keys
        .into_iter()
        .map(|((x, y), c)| {
            let pxy = c as f64 / n;
            let px = pa.sizes()[x as usize] as f64 / n;
            let py = pb.sizes()[y as usize] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    (2.0 * mi / (ha + hb)).clamp(0.0, 1.0)
}
