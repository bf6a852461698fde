//! Brute-force reference implementations shared by the integration tests.
//! Each one recomputes a quantity from its definition, with no code shared
//! with the library beyond reading the graph.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use sna_core::{build_graph, Graph, NodeId};

pub fn name(i: usize) -> String {
    format!("v{i}")
}

/// G(n, p) edge list over names `v0..v{n-1}`.
pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(String, String)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((name(i), name(j)));
            }
        }
    }
    edges
}

/// Random spanning tree plus G(n, p) extras, in shuffled order.
pub fn random_connected_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(String, String)> {
    let mut set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        set.insert((u, v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                set.insert((i, j));
            }
        }
    }
    let mut edges: Vec<(String, String)> = set.into_iter().map(|(a, b)| (name(a), name(b))).collect();
    edges.shuffle(rng);
    edges
}

pub fn graph_of(edges: &[(String, String)]) -> Graph {
    build_graph(edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u.index()][v.index()] = true;
        a[v.index()][u.index()] = true;
    }
    a
}

/// All-pairs hop distances; `None` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let a = dense_adjacency(g);
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if a[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Closeness `(reachable - 1) / Σ d` from the distance matrix.
pub fn closeness_from_distances(d: &[Vec<Option<usize>>]) -> Vec<f64> {
    d.iter()
        .map(|row| {
            let reach: Vec<usize> = row.iter().flatten().copied().collect();
            let total: usize = reach.iter().sum();
            if total == 0 {
                0.0
            } else {
                (reach.len() - 1) as f64 / total as f64
            }
        })
        .collect()
}

/// Lists every shortest s-t path explicitly.
fn shortest_paths(a: &[Vec<bool>], d: &[Vec<Option<usize>>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![s];
    fn walk(a: &[Vec<bool>], d: &[Vec<Option<usize>>], t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for w in 0..a.len() {
            if a[v][w] && d[w][t] == Some(d[v][t].unwrap() - 1) {
                path.push(w);
                walk(a, d, t, path, out);
                path.pop();
            }
        }
    }
    if d[s][t].is_some() {
        walk(a, d, t, &mut path, &mut out);
    }
    out
}

/// Pair-normalized betweenness by enumerating all shortest paths.
pub fn betweenness_by_enumeration(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let a = dense_adjacency(g);
    let d = floyd_warshall(g);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(&a, &d, s, t);
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count();
                b[v] += through as f64 / total;
            }
        }
    }
    if n > 2 {
        let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
        b.iter_mut().for_each(|x| *x /= pairs);
    }
    b
}

/// Σ over connected pairs of the mean number of interior nodes on their
/// shortest paths.
pub fn mean_interior_length_sum(g: &Graph) -> f64 {
    let d = floyd_warshall(g);
    let n = g.node_count();
    let mut total = 0.0;
    for s in 0..n {
        for t in s + 1..n {
            if let Some(len) = d[s][t] {
                total += (len - 1) as f64;
            }
        }
    }
    total
}

/// Unit-norm non-negative dominant eigenvector of the adjacency matrix.
pub fn dense_eigenvector(g: &Graph) -> (f64, Vec<f64>) {
    let n = g.node_count();
    let a = dense_adjacency(g);
    let m = DMatrix::from_fn(n, n, |i, j| if a[i][j] { 1.0 } else { 0.0 });
    let eig = SymmetricEigen::new(m);
    let (best, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a: &(usize, &f64), b: &(usize, &f64)| a.1.total_cmp(b.1))
        .unwrap();
    let col = eig.eigenvectors.column(best);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let norm = col.norm();
    (lambda, col.iter().map(|x| sign * x / norm).collect())
}

/// Component label per node from the boolean transitive closure.
pub fn closure_components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut r = dense_adjacency(g);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).map(|i| (0..n).find(|&j| r[i][j]).unwrap()).collect()
}

/// `(1/2m) Σ_ij [A_ij - k_i k_j / 2m] δ(c_i, c_j)` summed over all ordered
/// pairs.
pub fn modularity_by_definition(g: &Graph, labels: &[usize]) -> f64 {
    let n = g.node_count();
    let a = dense_adjacency(g);
    let two_m = 2.0 * g.edge_count() as f64;
    let k: Vec<f64> = (0..n).map(|v| g.neighbors(NodeId::new(v)).len() as f64).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                let aij = if a[i][j] { 1.0 } else { 0.0 };
                q += aij - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Calls `f` with every set partition of `0..n` as a restricted growth
/// string.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if i == labels.len() {
            f(labels);
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, f);
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut labels = vec![0; n];
    rec(1, 0, &mut labels, &mut f);
}

pub fn best_modularity_exhaustive(g: &Graph) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_partition(g.node_count(), |labels| {
        best = best.max(modularity_by_definition(g, labels));
    });
    best
}

/// Pairs of a person list by nested loops, as a set of sorted pairs.
pub fn clique_pairs(persons: &[String]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for i in 0..persons.len() {
        for j in 0..persons.len() {
            if i != j && persons[i] != persons[j] {
                let (a, b) = if persons[i] < persons[j] { (i, j) } else { (j, i) };
                out.insert((persons[a].clone(), persons[b].clone()));
            }
        }
    }
    out
}

/// Draws from `P(d) ∝ d^(-exponent)` on `dmin..=dmax` by inverting the
/// discrete CDF.
pub struct DiscretePowerLaw {
    dmin: usize,
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    pub fn new(exponent: f64, dmin: usize, dmax: usize) -> Self {
        let weights: Vec<f64> = (dmin..=dmax).map(|d| (d as f64).powf(-exponent)).collect();
        let z: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / z;
                acc
            })
            .collect();
        DiscretePowerLaw { dmin, cdf }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        self.dmin + i
    }
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Within-cluster sum of squares of a labeling, using cluster means.
pub fn wcss_of_labels(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let mut groups: HashMap<usize, Vec<&Vec<f64>>> = HashMap::new();
    for (p, &l) in points.iter().zip(labels) {
        groups.entry(l).or_default().push(p);
    }
    groups
        .values()
        .map(|members| {
            let dim = members[0].len();
            let mean: Vec<f64> = (0..dim)
                .map(|k| members.iter().map(|p| p[k]).sum::<f64>() / members.len() as f64)
                .collect();
            members.iter().map(|p| sq(p, &mean)).sum::<f64>()
        })
        .sum()
}

/// Minimal WCSS over every split of the points into two non-empty groups.
pub fn best_two_means(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    // point 0 always in group 0; enumerate the rest
    for mask in 1u64..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize })
            .collect();
        best = best.min(wcss_of_labels(points, &labels));
    }
    best
}

/// True when the two labelings induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}
