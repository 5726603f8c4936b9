//! Shared helpers for the integration and acceptance suites.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use rand::Rng;

use icnsim::topology::{Graph, NodeId};

/// Brute-force betweenness oracle: enumerates every shortest path of every
/// unordered node pair explicitly and accumulates, per interior node, the
/// fraction of the pair's paths passing through it. Independent of the
/// library's accumulation algorithm.
pub fn brute_force_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut values = vec![0.0f64; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let paths = all_shortest_paths(g, s, t);
            if paths.is_empty() {
                continue;
            }
            let sigma = paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    values[v] += 1.0 / sigma;
                }
            }
        }
    }
    values
}

/// Every shortest path from `s` to `t`, via depth-first expansion of the
/// BFS distance field.
fn all_shortest_paths(g: &Graph, s: usize, t: usize) -> Vec<Vec<usize>> {
    let dist = g.bfs_distances(NodeId(s));
    if dist[t].is_none() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut stack = vec![vec![t]];
    while let Some(path) = stack.pop() {
        let head = *path.last().unwrap();
        if head == s {
            let mut p = path.clone();
            p.reverse();
            out.push(p);
            continue;
        }
        let d = dist[head].unwrap();
        for w in g.neighbors(NodeId(head)) {
            if dist[w.0] == Some(d - 1) {
                let mut next = path.clone();
                next.push(w.0);
                stack.push(next);
            }
        }
    }
    out
}

/// Random connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(n: usize, extra_edges: usize, rng: &mut impl Rng) -> Graph {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Balanced binary tree over nodes `0..n`: node `i` connects to `2i + 1`
/// and `2i + 2` where those exist.
pub fn balanced_binary_tree(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for child in [2 * i + 1, 2 * i + 2] {
            if child < n {
                edges.push((i, child));
            }
        }
    }
    edges
}
