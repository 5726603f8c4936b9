//! Network graphs, centrality, and client/server role assignment.
//!
//! Graphs are undirected and unweighted; one edge is one hop. Node ids are
//! dense (`0..n`), which lets the rest of the crate index per-node state with
//! plain vectors. All tie-breaks are by lowest node id so that every
//! operation is deterministic.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{derive_seed, DOMAIN_ROLES};

/// A node in the router graph. Ids are dense: `0..n`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Undirected, unweighted router graph.
///
/// Construction rejects self-loops and deduplicates edges. A disconnected
/// graph is allowed to exist (the condition is carried as a structured
/// warning via [`Graph::components`]); operations that need paths across
/// components fail instead.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    /// One `(lowest node, size)` entry per connected component.
    components: Vec<(NodeId, usize)>,
    /// Per-node gravity weight override from the extended topology format.
    gravity_override: Vec<Option<f64>>,
}

impl Graph {
    /// Builds a graph over nodes `0..n` from an edge list. Duplicate edges
    /// (in either orientation) collapse to one; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let components = find_components(&adjacency);
        Ok(Graph {
            adjacency,
            edge_count: set.len(),
            components,
            gravity_override: vec![None; n],
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[v.0].iter().map(|&w| NodeId(w))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// Connected components as `(lowest node, size)`, ascending by node.
    pub fn components(&self) -> &[(NodeId, usize)] {
        &self.components
    }

    fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected { components: self.components.clone() })
        }
    }

    /// Gravity weight of a node: the per-node override from the topology
    /// file if present, otherwise its degree.
    pub fn gravity_weight(&self, v: NodeId) -> f64 {
        self.gravity_override[v.0].unwrap_or(self.degree(v) as f64)
    }

    pub fn set_gravity_weight(&mut self, v: NodeId, weight: f64) {
        self.gravity_override[v.0] = Some(weight);
    }

    /// Lower median of the degree sequence.
    pub fn median_degree(&self) -> usize {
        let mut degrees: Vec<usize> = (0..self.node_count()).map(|v| self.adjacency[v].len()).collect();
        degrees.sort_unstable();
        degrees[(degrees.len() - 1) / 2]
    }

    /// BFS hop distances from `from`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[from.0] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(from.0);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Deterministic BFS shortest path from `a` to `b`, both endpoints
    /// included. Among equal-distance predecessors the lowest node id wins.
    pub fn shortest_path(&self, a: NodeId, b: NodeId) -> Result<Vec<NodeId>> {
        if a == b {
            return Ok(vec![a]);
        }
        let dist = self.bfs_distances(a);
        if dist[b.0].is_none() {
            return Err(Error::Unreachable { from: a, to: b });
        }
        // Walk back from b; adjacency lists are sorted, so the first
        // neighbor one hop closer is the lowest-id predecessor.
        let mut path = vec![b];
        let mut current = b.0;
        while current != a.0 {
            let d = dist[current].unwrap();
            let pred = self.adjacency[current]
                .iter()
                .copied()
                .find(|&w| dist[w] == Some(d - 1))
                .expect("BFS predecessor exists");
            path.push(NodeId(pred));
            current = pred;
        }
        path.reverse();
        Ok(path)
    }
}

fn find_components(adjacency: &[Vec<usize>]) -> Vec<(NodeId, usize)> {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        components.push((NodeId(start), size));
    }
    components
}

/// Parses an edge-list topology file.
///
/// Each line is either two whitespace-separated node ids, an extended
/// `node <id> weight <w>` gravity override, a `#` comment, or blank.
/// Raw ids are arbitrary integers; they are compacted to `0..n` in order of
/// first appearance. Self-loops are rejected with their line number;
/// a disconnected result is returned as-is (see [`Graph::components`]).
pub fn load_topology(text: &str) -> Result<Graph> {
    let mut ids: Vec<u64> = Vec::new();
    let mut index_of = std::collections::HashMap::new();
    let mut intern = |raw: u64, ids: &mut Vec<u64>| -> usize {
        *index_of.entry(raw).or_insert_with(|| {
            ids.push(raw);
            ids.len() - 1
        })
    };
    let mut edges = Vec::new();
    let mut weights: Vec<(usize, f64)> = Vec::new();

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] == "node" {
            if tokens.len() != 4 || tokens[2] != "weight" {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `node <id> weight <w>`, got `{content}`"),
                });
            }
            let id: u64 = tokens[1].parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid node id `{}`", tokens[1]),
            })?;
            let weight: f64 = tokens[3].parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid weight `{}`", tokens[3]),
            })?;
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::Parse {
                    line,
                    message: format!("weight must be positive, got {weight}"),
                });
            }
            let v = intern(id, &mut ids);
            weights.push((v, weight));
            continue;
        }
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected two node ids, got `{content}`"),
            });
        }
        let a: u64 = tokens[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid node id `{}`", tokens[0]),
        })?;
        let b: u64 = tokens[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid node id `{}`", tokens[1]),
        })?;
        if a == b {
            return Err(Error::Parse { line, message: format!("self-loop {a} {b}") });
        }
        let va = intern(a, &mut ids);
        let vb = intern(b, &mut ids);
        edges.push((va, vb));
    }

    if ids.is_empty() {
        return Err(Error::Parse { line: 0, message: "topology file defines no nodes".into() });
    }
    let mut graph = Graph::from_edges(ids.len(), &edges)?;
    for (v, w) in weights {
        graph.set_gravity_weight(NodeId(v), w);
    }
    Ok(graph)
}

/// Barabási–Albert preferential-attachment graph.
///
/// Starts from a complete graph on `m + 1` nodes; each subsequent node
/// attaches to `m` distinct existing nodes with probability proportional to
/// their current degree. The result always has `C(m+1, 2) + m * (n - m - 1)`
/// edges and is connected.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if n < m + 1 {
        return Err(Error::InvalidParameter(format!("n must be at least m + 1 = {}", m + 1)));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + m * (n - m - 1));
    // Each endpoint appears once per incident edge; sampling an index
    // uniformly from this list is degree-proportional sampling.
    let mut endpoints = Vec::new();
    for a in 0..=m {
        for b in (a + 1)..=m {
            edges.push((a, b));
            endpoints.push(a);
            endpoints.push(b);
        }
    }
    for v in (m + 1)..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(endpoints[rng.gen_range(0..endpoints.len())]);
        }
        for &t in &targets {
            edges.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Per-node betweenness centrality.
///
/// Unnormalized pair-count convention: the value at `v` is the sum over all
/// unordered source/target pairs of the fraction of shortest paths between
/// them that pass through `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    values: Vec<f64>,
}

impl CentralityTable {
    pub fn get(&self, v: NodeId) -> f64 {
        self.values[v.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact betweenness centrality via Brandes' accumulation.
pub fn betweenness(g: &Graph) -> Result<CentralityTable> {
    g.require_connected()?;
    let n = g.node_count();
    let mut values = vec![0.0f64; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut delta = vec![0.0f64; n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(-1);
        delta.fill(0.0);
        for p in &mut preds {
            p.clear();
        }
        stack.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            let dv = dist[v];
            for w in g.neighbors(NodeId(v)).map(|w| w.0) {
                if dist[w] < 0 {
                    dist[w] = dv + 1;
                    queue.push_back(w);
                }
                if dist[w] == dv + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                values[w] += delta[w];
            }
        }
    }
    // Brandes counts ordered pairs; halve for the unordered convention.
    for v in &mut values {
        *v *= 0.5;
    }
    Ok(CentralityTable { values })
}

/// Which servers count as external (inter-ISP) content sources for the
/// costly-miss metric. Large content providers hosting the most popular
/// content inside the ISP are the internal case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExternalServers {
    /// Every server is an external source (the classic accounting).
    #[default]
    All,
    /// Every server is inside the ISP; misses to them cost nothing.
    None,
    /// The servers holding the most popular content are internal; the rest
    /// are external.
    InternalTop(usize),
}

/// Parameters for [`assign_roles`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleParams {
    pub n_servers: usize,
    /// Fraction of eligible edge routers to turn into clients.
    pub client_fraction: f64,
    /// A node is an edge router when its degree is at or below this
    /// threshold. `None` uses the median degree.
    pub edge_degree_threshold: Option<usize>,
    pub external: ExternalServers,
}

/// Client, server, and origin assignment for one repetition.
///
/// Caching routers are exactly the nodes that are neither clients nor
/// servers; clients inject requests and servers are permanent sources, so
/// neither carries a content store.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleAssignment {
    /// Client nodes, ascending.
    pub clients: Vec<NodeId>,
    /// Gravity weight per client, aligned with `clients`.
    pub client_weights: Vec<f64>,
    /// Server nodes in selection order (degree descending, id ascending).
    pub servers: Vec<NodeId>,
    /// External classification per server, aligned with `servers`.
    pub server_external: Vec<bool>,
    /// Origin server per object id.
    pub origin: Vec<NodeId>,
}

impl RoleAssignment {
    pub fn is_client(&self, v: NodeId) -> bool {
        self.clients.binary_search(&v).is_ok()
    }

    pub fn is_server(&self, v: NodeId) -> bool {
        self.servers.contains(&v)
    }

    pub fn origin_of(&self, object: crate::workload::ObjectId) -> NodeId {
        self.origin[object.0]
    }

    pub fn is_external(&self, server: NodeId) -> bool {
        self.servers
            .iter()
            .position(|&s| s == server)
            .map(|i| self.server_external[i])
            .unwrap_or(false)
    }

    /// Nodes that carry a content store: everything except clients and
    /// servers, ascending.
    pub fn caching_nodes(&self, g: &Graph) -> Vec<NodeId> {
        g.nodes().filter(|&v| !self.is_client(v) && !self.is_server(v)).collect()
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        let n = g.node_count();
        for &v in self.clients.iter().chain(self.servers.iter()) {
            if v.0 >= n {
                return Err(Error::InvalidParameter(format!("role node {v} outside graph")));
            }
        }
        for &c in &self.clients {
            if self.is_server(c) {
                return Err(Error::InvalidParameter(format!(
                    "node {c} is both client and server"
                )));
            }
        }
        if self.client_weights.len() != self.clients.len() {
            return Err(Error::InvalidParameter("client weight list misaligned".into()));
        }
        if self.server_external.len() != self.servers.len() {
            return Err(Error::InvalidParameter("server external list misaligned".into()));
        }
        for &o in &self.origin {
            if !self.is_server(o) {
                return Err(Error::InvalidParameter(format!("origin {o} is not a server")));
            }
        }
        Ok(())
    }
}

/// Assigns servers, clients, and object origins.
///
/// Servers are the `n_servers` highest-degree nodes (ties to the lower id).
/// Clients are sampled without replacement from the eligible edge routers
/// (degree at or below the threshold, servers excluded) with probability
/// proportional to gravity weight; the client count is
/// `round(client_fraction * |eligible|)`. Objects are assigned to servers
/// round-robin in descending popularity order.
pub fn assign_roles(
    g: &Graph,
    n_objects: usize,
    params: &RoleParams,
    seed: u64,
) -> Result<RoleAssignment> {
    let n = g.node_count();
    if params.n_servers == 0 {
        return Err(Error::InvalidParameter("need at least one server".into()));
    }
    if params.n_servers > n {
        return Err(Error::InvalidParameter(format!(
            "n_servers = {} exceeds node count {n}",
            params.n_servers
        )));
    }
    if !(0.0..=1.0).contains(&params.client_fraction) {
        return Err(Error::InvalidParameter(format!(
            "client_fraction must be in [0, 1], got {}",
            params.client_fraction
        )));
    }

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(g.degree(NodeId(v))), v));
    let servers: Vec<NodeId> = by_degree[..params.n_servers].iter().map(|&v| NodeId(v)).collect();

    let threshold = params.edge_degree_threshold.unwrap_or_else(|| g.median_degree());
    let mut eligible: Vec<NodeId> = g
        .nodes()
        .filter(|&v| g.degree(v) <= threshold && !servers.contains(&v))
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoEligibleClients);
    }

    let count = (params.client_fraction * eligible.len() as f64).round() as usize;
    let count = count.min(eligible.len());
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, DOMAIN_ROLES));
    let mut weights: Vec<f64> = eligible.iter().map(|&v| g.gravity_weight(v)).collect();
    let mut clients = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = weights.iter().sum();
        let mut draw = rng.gen_range(0.0..total);
        let mut picked = weights.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            if draw < w {
                picked = i;
                break;
            }
            draw -= w;
        }
        clients.push(eligible.remove(picked));
        weights.remove(picked);
    }
    clients.sort_unstable();
    let client_weights: Vec<f64> = clients.iter().map(|&v| g.gravity_weight(v)).collect();

    let server_external: Vec<bool> = match &params.external {
        ExternalServers::All => vec![true; servers.len()],
        ExternalServers::None => vec![false; servers.len()],
        ExternalServers::InternalTop(k) => {
            (0..servers.len()).map(|i| i >= *k).collect()
        }
    };
    // Object ids are ranks: id 0 is the most popular object.
    let origin: Vec<NodeId> = (0..n_objects).map(|k| servers[k % servers.len()]).collect();

    let roles = RoleAssignment { clients, client_weights, servers, server_external, origin };
    roles.validate(g)?;
    Ok(roles)
}

/// Least-squares fit of the degree CCDF on log-log axes over the degree
/// range `d_min..=d_max`. Returns `(slope, r_squared)`. Degrees with an
/// empty tail are skipped.
pub fn degree_ccdf_loglog_fit(g: &Graph, d_min: usize, d_max: usize) -> (f64, f64) {
    let n = g.node_count() as f64;
    let mut points = Vec::new();
    for d in d_min..=d_max {
        let tail = g.nodes().filter(|&v| g.degree(v) >= d).count();
        if tail == 0 {
            continue;
        }
        points.push(((d as f64).ln(), (tail as f64 / n).ln()));
    }
    linear_fit(&points)
}

fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

/// `node,degree,betweenness` CSV dump used by the CLI.
pub fn centrality_csv(g: &Graph, table: &CentralityTable) -> String {
    let mut out = String::from("node,degree,betweenness\n");
    for v in g.nodes() {
        out.push_str(&format!("{},{},{}\n", v, g.degree(v), table.get(v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn star_graph(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn load_minimal_path() {
        let g = load_topology("0 1\n1 2").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_connected());
    }

    #[test]
    fn load_deduplicates_edges() {
        let g = load_topology("0 1\n1 0\n0 1").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn load_rejects_self_loop_with_line_number() {
        let err = load_topology("0 0").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_compacts_ids_in_first_appearance_order() {
        // Raw ids 10, 7, 3: first appearance order 10 -> 0, 7 -> 1, 3 -> 2.
        let g = load_topology("10 7\n7 3").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degree(NodeId(1)), 2); // raw 7 is in both edges
    }

    #[test]
    fn load_allows_comments_blanks_and_weights() {
        let g = load_topology("# header\n\n0 1  # trailing\nnode 0 weight 3.5\n1 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.gravity_weight(NodeId(0)), 3.5);
        assert_eq!(g.gravity_weight(NodeId(1)), 2.0); // degree fallback
    }

    #[test]
    fn load_reports_malformed_line() {
        let err = load_topology("0 1\n1 2 3").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn disconnected_is_a_warning_until_paths_are_needed() {
        let g = load_topology("0 1\n2 3").unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.components(), &[(NodeId(0), 2), (NodeId(2), 2)]);
        assert!(matches!(
            g.shortest_path(NodeId(0), NodeId(2)),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(betweenness(&g), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn ba_seed_graph_is_complete_triangle() {
        let g = generate_ba(3, 2, 123).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn ba_edge_count_matches_closed_form() {
        let g = generate_ba(100, 2, 7).unwrap();
        assert_eq!(g.edge_count(), 3 + 2 * 97);
        assert!(g.is_connected());
    }

    #[test]
    fn ba_rejects_bad_parameters() {
        assert!(generate_ba(2, 2, 0).is_err());
        assert!(generate_ba(10, 0, 0).is_err());
    }

    #[test]
    fn ba_is_deterministic_per_seed() {
        let a = generate_ba(50, 3, 99).unwrap();
        let b = generate_ba(50, 3, 99).unwrap();
        for v in a.nodes() {
            assert_eq!(a.neighbors(v).collect::<Vec<_>>(), b.neighbors(v).collect::<Vec<_>>());
        }
    }

    #[test]
    fn betweenness_star_center() {
        // All (n-1)(n-2)/2 leaf pairs route via the center.
        let table = betweenness(&star_graph(5)).unwrap();
        assert_eq!(table.get(NodeId(0)), 6.0);
        for leaf in 1..5 {
            assert_eq!(table.get(NodeId(leaf)), 0.0);
        }
    }

    #[test]
    fn betweenness_three_node_path() {
        let table = betweenness(&path_graph(3)).unwrap();
        assert_eq!(table.get(NodeId(0)), 0.0);
        assert_eq!(table.get(NodeId(1)), 1.0);
        assert_eq!(table.get(NodeId(2)), 0.0);
    }

    #[test]
    fn shortest_path_identity() {
        let g = path_graph(3);
        assert_eq!(g.shortest_path(NodeId(1), NodeId(1)).unwrap(), vec![NodeId(1)]);
    }

    #[test]
    fn shortest_path_on_path_graph() {
        let g = path_graph(3);
        let p = g.shortest_path(NodeId(0), NodeId(2)).unwrap();
        assert_eq!(p, vec![NodeId(0), NodeId(1), NodeId(2)]);
    }

    #[test]
    fn shortest_path_cycle_tie_break() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = g.shortest_path(NodeId(0), NodeId(2)).unwrap();
        assert_eq!(p, vec![NodeId(0), NodeId(1), NodeId(2)]);
    }

    fn default_params(n_servers: usize, client_fraction: f64) -> RoleParams {
        RoleParams {
            n_servers,
            client_fraction,
            edge_degree_threshold: None,
            external: ExternalServers::All,
        }
    }

    #[test]
    fn roles_star_server_is_center() {
        let g = star_graph(5);
        let roles = assign_roles(&g, 4, &default_params(1, 0.5), 11).unwrap();
        assert_eq!(roles.servers, vec![NodeId(0)]);
        assert_eq!(roles.clients.len(), 2);
        for c in &roles.clients {
            assert!(c.0 >= 1);
        }
        // Origins round-robin over the single server.
        assert_eq!(roles.origin, vec![NodeId(0); 4]);
    }

    #[test]
    fn roles_path_of_five_eligible_set() {
        // Degrees 1,2,2,2,1; median degree 2, so every node is an edge
        // router. The server (node 1: degree 2, lowest id) is removed,
        // leaving 4 eligible nodes; round(0.5 * 4) = 2 clients.
        let g = path_graph(5);
        let roles = assign_roles(&g, 2, &default_params(1, 0.5), 3).unwrap();
        assert_eq!(roles.servers, vec![NodeId(1)]);
        assert_eq!(roles.clients.len(), 2);
        for c in &roles.clients {
            assert_ne!(*c, NodeId(1));
        }
        let again = assign_roles(&g, 2, &default_params(1, 0.5), 3).unwrap();
        assert_eq!(roles, again);
    }

    #[test]
    fn roles_zero_fraction_gives_empty_clients() {
        let g = path_graph(5);
        let roles = assign_roles(&g, 1, &default_params(1, 0.0), 3).unwrap();
        assert!(roles.clients.is_empty());
    }

    #[test]
    fn roles_error_when_no_eligible_edge_routers() {
        // Threshold 0 excludes everything.
        let g = path_graph(3);
        let params = RoleParams {
            n_servers: 1,
            client_fraction: 0.5,
            edge_degree_threshold: Some(0),
            external: ExternalServers::All,
        };
        assert!(matches!(assign_roles(&g, 1, &params, 0), Err(Error::NoEligibleClients)));
    }

    #[test]
    fn roles_too_many_servers() {
        let g = path_graph(3);
        assert!(assign_roles(&g, 1, &default_params(4, 0.0), 0).is_err());
    }

    #[test]
    fn roles_external_classification() {
        let g = star_graph(6);
        let mut params = default_params(2, 0.2);
        params.external = ExternalServers::InternalTop(1);
        let roles = assign_roles(&g, 4, &params, 5).unwrap();
        assert_eq!(roles.server_external, vec![false, true]);
        assert!(!roles.is_external(roles.servers[0]));
        assert!(roles.is_external(roles.servers[1]));
    }

    #[test]
    fn centrality_csv_shape() {
        let g = path_graph(3);
        let table = betweenness(&g).unwrap();
        let csv = centrality_csv(&g, &table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "node,degree,betweenness");
        assert_eq!(lines[1], "0,1,0");
        assert_eq!(lines[2], "1,2,1");
    }
}
