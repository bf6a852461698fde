//! Immutable sparse undirected graph over interned person names.
//!
//! Adjacency is stored in compressed sparse row form: one offsets array and
//! one flat array of strictly sorted neighbor lists. Node ids are dense and
//! assigned in first-seen order, so they are deterministic for a fixed input
//! order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::normalize_name;

/// Marker for "not reached" in BFS distance buffers.
pub(crate) const UNREACHED: u32 = u32::MAX;

/// Dense node index, contiguous from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What `build_graph` threw away while constructing a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub input_pairs: usize,
    pub self_pairs_dropped: usize,
    pub duplicate_pairs_collapsed: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    names: Vec<String>,
    lookup: HashMap<String, NodeId>,
}

/// Builds a graph from name pairs. See [`build_graph_with_stats`].
pub fn build_graph<I, S>(edges: I) -> Result<Graph>
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
{
    build_graph_with_stats(edges).map(|(g, _)| g)
}

/// Builds a simple undirected graph from name pairs.
///
/// Names are normalized, then interned in first-seen order. Self-pairs are
/// dropped (and do not intern their name) and repeated pairs collapse into a
/// single edge. Fails if a name is empty or no edge survives.
pub fn build_graph_with_stats<I, S>(edges: I) -> Result<(Graph, BuildStats)>
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
{
    let mut stats = BuildStats::default();
    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, NodeId> = HashMap::new();
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();

    let mut intern = |name: String, names: &mut Vec<String>| -> NodeId {
        *lookup.entry(name).or_insert_with_key(|k| {
            names.push(k.clone());
            NodeId::new(names.len() - 1)
        })
    };

    for (a, b) in edges {
        stats.input_pairs += 1;
        let a = normalize_name(a.as_ref());
        let b = normalize_name(b.as_ref());
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyName);
        }
        if a == b {
            stats.self_pairs_dropped += 1;
            continue;
        }
        let u = intern(a, &mut names);
        let v = intern(b, &mut names);
        pairs.push(if u < v { (u, v) } else { (v, u) });
    }

    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }
    pairs.sort_unstable();
    let before = pairs.len();
    pairs.dedup();
    stats.duplicate_pairs_collapsed = before - pairs.len();

    Ok((Graph::from_sorted_pairs(names, lookup, &pairs), stats))
}

impl Graph {
    /// `pairs` must be deduplicated with `u < v`.
    fn from_sorted_pairs(names: Vec<String>, lookup: HashMap<String, NodeId>, pairs: &[(NodeId, NodeId)]) -> Self {
        let n = names.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u.index()] += 1;
            degree[v.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![NodeId(0); offsets[n]];
        for &(u, v) in pairs {
            targets[cursor[u.index()]] = v;
            cursor[u.index()] += 1;
            targets[cursor[v.index()]] = u;
            cursor[v.index()] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Graph {
            offsets,
            targets,
            names,
            lookup,
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId::new)
    }

    /// Sorted neighbor list. Panics on an out-of-range id.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let i = v.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        if !self.contains(v) {
            return Err(Error::InvalidNode(v.index()));
        }
        Ok(self.neighbors(v).len())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.contains(v) && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Canonical person name. Panics on an out-of-range id.
    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.lookup.get(name).copied()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Edge list by canonical name, in [`Graph::edges`] order.
    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges()
            .map(|(u, v)| (self.name(u).to_owned(), self.name(v).to_owned()))
            .collect()
    }

    /// 2m / (n(n-1)).
    pub fn density(&self) -> Result<f64> {
        density_of(self.node_count(), self.edge_count())
    }

    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for v in self.nodes() {
            *hist.entry(self.neighbors(v).len()).or_insert(0) += 1;
        }
        hist
    }

    pub fn connected_components(&self) -> ComponentLabeling {
        let n = self.node_count();
        let mut raw = vec![u32::MAX; n];
        let mut sizes: Vec<usize> = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if raw[start] != u32::MAX {
                continue;
            }
            let label = sizes.len() as u32;
            raw[start] = label;
            stack.push(NodeId::new(start));
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in self.neighbors(v) {
                    if raw[w.index()] == u32::MAX {
                        raw[w.index()] = label;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        // Largest first; discovery order breaks ties.
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut rename = vec![0u32; sizes.len()];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new as u32;
        }
        ComponentLabeling {
            labels: raw.into_iter().map(|l| rename[l as usize]).collect(),
            sizes: order.iter().map(|&old| sizes[old]).collect(),
        }
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn shortest_path_lengths(&self, source: NodeId) -> Result<Vec<Option<usize>>> {
        if !self.contains(source) {
            return Err(Error::InvalidNode(source.index()));
        }
        let mut dist = Vec::new();
        let mut queue = Vec::new();
        self.bfs_into(source, &mut dist, &mut queue);
        Ok(dist
            .into_iter()
            .map(|d| (d != UNREACHED).then_some(d as usize))
            .collect())
    }

    /// BFS from `source` into reusable buffers. On return `queue` holds the
    /// reached nodes in visit order and `dist` is `UNREACHED` elsewhere.
    pub(crate) fn bfs_into(&self, source: NodeId, dist: &mut Vec<u32>, queue: &mut Vec<NodeId>) {
        dist.clear();
        dist.resize(self.node_count(), UNREACHED);
        queue.clear();
        dist[source.index()] = 0;
        queue.push(source);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            let next = dist[v.index()] + 1;
            for &w in self.neighbors(v) {
                if dist[w.index()] == UNREACHED {
                    dist[w.index()] = next;
                    queue.push(w);
                }
            }
        }
    }

    /// Largest eccentricity within the largest connected component.
    ///
    /// Logs a warning when the graph is disconnected, since the value then
    /// describes only that component.
    pub fn diameter(&self) -> usize {
        let comps = self.connected_components();
        if comps.count() > 1 {
            log::warn!(
                "graph has {} components; diameter computed on the largest ({} of {} nodes)",
                comps.count(),
                comps.sizes[0],
                self.node_count()
            );
        }
        let members = comps.members(0);
        members
            .par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(dist, queue), &s| {
                    self.bfs_into(s, dist, queue);
                    queue.last().map_or(0, |&far| dist[far.index()] as usize)
                },
            )
            .max()
            .unwrap_or(0)
    }
}

/// 2m / (n(n-1)), from counts alone.
pub fn density_of(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(Error::TooFewNodes(nodes));
    }
    let n = nodes as f64;
    Ok(2.0 * edges as f64 / (n * (n - 1.0)))
}

/// Connected-component labels, dense from 0 with the largest component at 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentLabeling {
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_connected(&self) -> bool {
        self.sizes.len() == 1
    }

    pub fn component_of(&self, v: NodeId) -> u32 {
        self.labels[v.index()]
    }

    pub fn members(&self, component: u32) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == component)
            .map(|(i, _)| NodeId::new(i))
            .collect()
    }
}
