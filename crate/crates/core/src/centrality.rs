//! Degree, closeness, betweenness and eigenvector centrality, the local
//! clustering coefficient, and rankings over them.
//!
//! All-source sweeps run in parallel over source nodes. Per-source results
//! are combined in ascending source order over fixed-size chunks, so every
//! output is bit-identical regardless of the rayon pool size.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, UNREACHED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Betweenness,
    Closeness,
    Eigenvector,
    Degree,
}

impl Measure {
    /// Column order of the top-persons table.
    pub const ALL: [Measure; 4] = [
        Measure::Betweenness,
        Measure::Closeness,
        Measure::Eigenvector,
        Measure::Degree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Betweenness => "betweenness",
            Measure::Closeness => "closeness",
            Measure::Eigenvector => "eigenvector",
            Measure::Degree => "degree",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown centrality measure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvectorOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight kept on the propagated vector each step; the remainder is
    /// mixed toward the uniform vector. `None` is undamped.
    pub mixing: Option<f64>,
}

impl Default for EigenvectorOptions {
    fn default() -> Self {
        EigenvectorOptions {
            tol: 1e-10,
            max_iter: 10_000,
            mixing: None,
        }
    }
}

/// Per-node centralities, indexed by `NodeId::index()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityBundle {
    pub degree: Vec<usize>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub eigenvector: Vec<f64>,
    pub clustering: Vec<f64>,
}

impl CentralityBundle {
    pub fn compute(g: &Graph, eigen: &EigenvectorOptions) -> Result<Self> {
        Ok(CentralityBundle {
            degree: degree_centrality(g),
            closeness: closeness_centrality(g),
            betweenness: betweenness_centrality(g),
            eigenvector: eigenvector_centrality(g, eigen)?,
            clustering: clustering_coefficient(g),
        })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn score(&self, measure: Measure, v: NodeId) -> f64 {
        let i = v.index();
        match measure {
            Measure::Degree => self.degree[i] as f64,
            Measure::Closeness => self.closeness[i],
            Measure::Betweenness => self.betweenness[i],
            Measure::Eigenvector => self.eigenvector[i],
        }
    }

    pub fn scores(&self, measure: Measure) -> Vec<f64> {
        match measure {
            Measure::Degree => self.degree.iter().map(|&d| d as f64).collect(),
            Measure::Closeness => self.closeness.clone(),
            Measure::Betweenness => self.betweenness.clone(),
            Measure::Eigenvector => self.eigenvector.clone(),
        }
    }
}

pub fn degree_centrality(g: &Graph) -> Vec<usize> {
    g.nodes().map(|v| g.neighbors(v).len()).collect()
}

/// `(c - 1) / Σ d(v, u)` over the `c` nodes of v's component, i.e. the
/// reciprocal of the mean hop distance. Isolated nodes get 0.
pub fn closeness_centrality(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(dist, queue), v| {
                g.bfs_into(NodeId::new(v), dist, queue);
                let total: u64 = queue.iter().map(|w| u64::from(dist[w.index()])).sum();
                if total == 0 {
                    0.0
                } else {
                    (queue.len() - 1) as f64 / total as f64
                }
            },
        )
        .collect()
}

/// Sources per reduction chunk, independent of the thread count.
fn source_chunk_len(n: usize) -> usize {
    n.div_ceil(256).max(32)
}

struct BrandesScratch {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<NodeId>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        BrandesScratch {
            dist: vec![UNREACHED; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
        }
    }

    /// Adds the dependencies of `s` on every other node into `acc`.
    fn accumulate(&mut self, g: &Graph, s: NodeId, acc: &mut [f64]) {
        let BrandesScratch {
            dist,
            sigma,
            delta,
            order,
        } = self;
        order.clear();
        dist[s.index()] = 0;
        sigma[s.index()] = 1.0;
        order.push(s);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let dv = dist[v.index()];
            for &w in g.neighbors(v) {
                let wi = w.index();
                if dist[wi] == UNREACHED {
                    dist[wi] = dv + 1;
                    order.push(w);
                }
                if dist[wi] == dv + 1 {
                    sigma[wi] += sigma[v.index()];
                }
            }
        }
        // Reverse BFS order: every successor is final before its predecessors.
        for &v in order.iter().rev() {
            let vi = v.index();
            let dv = dist[vi];
            let mut dep = 0.0;
            for &w in g.neighbors(v) {
                let wi = w.index();
                if dist[wi] == dv + 1 {
                    dep += (1.0 + delta[wi]) / sigma[wi];
                }
            }
            delta[vi] = sigma[vi] * dep;
            if v != s {
                acc[vi] += delta[vi];
            }
        }
        for &v in order.iter() {
            let vi = v.index();
            dist[vi] = UNREACHED;
            sigma[vi] = 0.0;
            delta[vi] = 0.0;
        }
    }
}

/// Unnormalized Brandes pair dependencies summed over all sources. Each
/// unordered pair is counted from both endpoints.
pub(crate) fn betweenness_raw(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let sources: Vec<NodeId> = g.nodes().collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(source_chunk_len(n))
        .map(|chunk| {
            let mut scratch = BrandesScratch::new(n);
            let mut acc = vec![0.0; n];
            for &s in chunk {
                scratch.accumulate(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Endpoint-exclusive shortest-path betweenness, normalized by the
/// (n-1)(n-2)/2 pairs that exclude the node, so values lie in [0, 1].
pub fn betweenness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut raw = betweenness_raw(g);
    if n <= 2 {
        raw.iter_mut().for_each(|x| *x = 0.0);
        return raw;
    }
    // raw counts each pair twice; halve and divide by the pair count.
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    raw.iter_mut().for_each(|x| *x *= scale);
    raw
}

/// Power iteration for the dominant adjacency eigenvector of the largest
/// component, L2-normalized, non-negative; nodes elsewhere score 0.
///
/// Iterates with `A + I`, which has the same eigenvectors as `A` but a
/// strictly dominant top eigenvalue even on bipartite components.
pub fn eigenvector_centrality(g: &Graph, opts: &EigenvectorOptions) -> Result<Vec<f64>> {
    let n = g.node_count();
    let comps = g.connected_components();
    if comps.count() > 1 {
        log::warn!(
            "graph is disconnected; eigenvector centrality covers the largest component \
             ({} of {} nodes), others score 0",
            comps.sizes[0],
            n
        );
    }
    let members = comps.members(0);
    let uniform = 1.0 / (members.len() as f64).sqrt();
    let mut in_lcc = vec![false; n];
    let mut x = vec![0.0; n];
    for &v in &members {
        in_lcc[v.index()] = true;
        x[v.index()] = uniform;
    }

    let mut last_delta = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut y: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|v| {
                if !in_lcc[v] {
                    return 0.0;
                }
                x[v] + g.neighbors(NodeId::new(v)).iter().map(|w| x[w.index()]).sum::<f64>()
            })
            .collect();
        normalize_l2(&mut y);
        if let Some(m) = opts.mixing {
            for &v in &members {
                let i = v.index();
                y[i] = m * y[i] + (1.0 - m) * uniform;
            }
            normalize_l2(&mut y);
        }
        last_delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if last_delta < opts.tol {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_delta,
    })
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Size of the intersection of two sorted slices.
fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Local clustering coefficient `2T(v) / (d(d-1))`; 0 when d < 2.
pub fn clustering_coefficient(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let v = NodeId::new(i);
            let nbrs = g.neighbors(v);
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            // every triangle is seen from both of its other corners
            let twice_t: usize = nbrs
                .iter()
                .map(|&a| sorted_intersection_len(nbrs, g.neighbors(a)))
                .sum();
            twice_t as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPerson {
    pub node: NodeId,
    pub name: String,
    pub score: f64,
}

/// Descending by score; ties go to the lexicographically smaller name.
pub(crate) fn rank_nodes(g: &Graph, nodes: &mut [NodeId], score: impl Fn(NodeId) -> f64) {
    nodes.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then_with(|| g.name(a).cmp(g.name(b))));
}

/// The `k` highest-scoring persons (all of them if `k > n`).
pub fn top_k(g: &Graph, bundle: &CentralityBundle, measure: Measure, k: usize) -> Vec<RankedPerson> {
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    rank_nodes(g, &mut nodes, |v| bundle.score(measure, v));
    nodes
        .into_iter()
        .take(k)
        .map(|v| RankedPerson {
            node: v,
            name: g.name(v).to_owned(),
            score: bundle.score(measure, v),
        })
        .collect()
}

/// Side-by-side top-k rankings, one column per measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopTable {
    pub columns: Vec<(Measure, Vec<RankedPerson>)>,
    /// Number of columns each listed person appears in; persons with more
    /// than one are the cross-column repeats.
    pub multiplicity: BTreeMap<String, usize>,
}

impl TopTable {
    pub fn repeated(&self, name: &str) -> bool {
        self.multiplicity.get(name).is_some_and(|&c| c > 1)
    }
}

pub fn top_table(g: &Graph, bundle: &CentralityBundle, measures: &[Measure], k: usize) -> TopTable {
    let columns: Vec<_> = measures.iter().map(|&m| (m, top_k(g, bundle, m, k))).collect();
    let mut multiplicity = BTreeMap::new();
    for (_, col) in &columns {
        for p in col {
            *multiplicity.entry(p.name.clone()).or_insert(0) += 1;
        }
    }
    TopTable { columns, multiplicity }
}
