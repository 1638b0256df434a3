//! Attributed graph storage, exact-distance neighborhoods, paths and splits.

mod io;
mod split;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_glmf, write_glmf, GraphFiles, LoadOptions};
pub use split::{make_split, SplitPolicy};

pub type NodeId = usize;

/// Largest hop level the neighborhood operations accept.
pub const MAX_HOP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Val, Split::Test, Split::Unassigned];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "val" | "valid" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            "unassigned" | "" => Ok(Split::Unassigned),
            other => Err(Error::Config(format!("unknown split tag {other:?}"))),
        }
    }
}

/// Raw, unvalidated graph content. [`Graph::from_parts`] checks it.
#[derive(Debug, Clone, Default)]
pub struct GraphParts {
    pub num_nodes: usize,
    pub directed: bool,
    /// `(src, dst, optional edge text)`.
    pub edges: Vec<(NodeId, NodeId, Option<String>)>,
    /// Row-major `num_nodes x dim`.
    pub features: Vec<f32>,
    pub dim: usize,
    pub texts: Vec<Option<String>>,
    pub labels: Vec<Option<usize>>,
    pub categories: Vec<String>,
    pub splits: Vec<Split>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Immutable attributed graph with CSR adjacency (neighbor lists sorted).
#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    directed: bool,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    edge_texts: HashMap<(NodeId, NodeId), String>,
    features: Vec<f32>,
    dim: usize,
    texts: Vec<Option<String>>,
    labels: Vec<Option<usize>>,
    categories: Vec<String>,
    splits: Vec<Split>,
}

/// Exact-distance levels around a center; `levels[k - 1]` holds distance `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub center: NodeId,
    pub levels: Vec<Vec<NodeId>>,
}

impl Neighborhood {
    pub fn hops(&self) -> usize {
        self.levels.len()
    }

    /// Within-k levels: level k is the union of exact levels 1..=k.
    pub fn cumulative(&self) -> Neighborhood {
        let mut acc: Vec<NodeId> = Vec::new();
        let levels = self
            .levels
            .iter()
            .map(|level| {
                acc.extend_from_slice(level);
                acc.sort_unstable();
                acc.clone()
            })
            .collect();
        Neighborhood {
            center: self.center,
            levels,
        }
    }
}

/// Simple paths of a fixed length from a center.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSet {
    pub center: NodeId,
    pub hop: usize,
    pub paths: Vec<Vec<NodeId>>,
    pub truncated: bool,
}

impl Graph {
    pub fn from_parts(parts: GraphParts) -> Result<(Graph, LoadReport)> {
        let GraphParts {
            num_nodes,
            directed,
            edges,
            features,
            dim,
            mut texts,
            mut labels,
            categories,
            mut splits,
        } = parts;

        if features.len() != num_nodes * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot form {num_nodes} rows of dimension {dim}",
                features.len()
            )));
        }
        if texts.is_empty() {
            texts = vec![None; num_nodes];
        }
        if labels.is_empty() {
            labels = vec![None; num_nodes];
        }
        if splits.is_empty() {
            splits = vec![Split::Unassigned; num_nodes];
        }
        for (what, len) in [
            ("texts", texts.len()),
            ("labels", labels.len()),
            ("splits", splits.len()),
        ] {
            if len != num_nodes {
                return Err(Error::DimensionMismatch(format!(
                    "{what} has {len} entries for {num_nodes} nodes"
                )));
            }
        }
        if let Some(bad) = labels.iter().flatten().find(|&&l| l >= categories.len()) {
            return Err(Error::UnknownCategory(format!("category id {bad}")));
        }

        let mut report = LoadReport {
            nodes: num_nodes,
            ..LoadReport::default()
        };
        let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(edges.len());
        let mut kept = Vec::with_capacity(edges.len());
        let mut edge_texts = HashMap::new();
        for (u, v, text) in edges {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(Error::UnknownNode(node.to_string()));
                }
            }
            if u == v {
                report.self_loops += 1;
                continue;
            }
            let key = edge_key(directed, u, v);
            if !seen.insert(key) {
                report.duplicates += 1;
                continue;
            }
            if let Some(t) = text {
                edge_texts.insert(key, t);
            }
            kept.push(key);
        }
        kept.sort_unstable();
        report.edges = kept.len();

        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in &kept {
            degree[u] += 1;
            if !directed {
                degree[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..num_nodes].to_vec();
        let mut targets = vec![0; *offsets.last().unwrap()];
        for &(u, v) in &kept {
            targets[fill[u]] = v;
            fill[u] += 1;
            if !directed {
                targets[fill[v]] = u;
                fill[v] += 1;
            }
        }
        for n in 0..num_nodes {
            targets[offsets[n]..offsets[n + 1]].sort_unstable();
        }

        let graph = Graph {
            num_nodes,
            directed,
            offsets,
            targets,
            edges: kept,
            edge_texts,
            features,
            dim,
            texts,
            labels,
            categories,
            splits,
        };
        Ok((graph, report))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Canonical edge list: sorted, `src < dst` for undirected graphs.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edge_text(&self, u: NodeId, v: NodeId) -> Option<&str> {
        self.edge_texts
            .get(&edge_key(self.directed, u, v))
            .map(String::as_str)
    }

    pub fn has_edge_texts(&self) -> bool {
        !self.edge_texts.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn feature_row(&self, v: NodeId) -> &[f32] {
        &self.features[v * self.dim..(v + 1) * self.dim]
    }

    pub fn text(&self, v: NodeId) -> Option<&str> {
        self.texts[v].as_deref()
    }

    pub fn label(&self, v: NodeId) -> Option<usize> {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn split(&self, v: NodeId) -> Split {
        self.splits[v]
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn with_splits(&self, splits: Vec<Split>) -> Result<Graph> {
        if splits.len() != self.num_nodes {
            return Err(Error::DimensionMismatch(format!(
                "{} split tags for {} nodes",
                splits.len(),
                self.num_nodes
            )));
        }
        let mut g = self.clone();
        g.splits = splits;
        Ok(g)
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.num_nodes {
            return Err(Error::NodeOutOfRange {
                node: v,
                num_nodes: self.num_nodes,
            });
        }
        Ok(())
    }

    /// Shortest-path distances from `v` for every node within `max_dist`,
    /// the center included at distance 0.
    pub fn distances_within(&self, v: NodeId, max_dist: usize) -> HashMap<NodeId, usize> {
        let mut dist = HashMap::new();
        dist.insert(v, 0);
        let mut frontier = vec![v];
        for d in 1..=max_dist {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in self.neighbors(u) {
                    if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                        e.insert(d);
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        dist
    }

    fn bfs_levels(&self, v: NodeId, hops: usize) -> Vec<Vec<NodeId>> {
        let dist = self.distances_within(v, hops);
        let mut levels = vec![Vec::new(); hops];
        for (&node, &d) in &dist {
            if d > 0 {
                levels[d - 1].push(node);
            }
        }
        for level in &mut levels {
            level.sort_unstable();
        }
        levels
    }

    /// Nodes at shortest-path distance exactly 1..=`hops` from `v`.
    pub fn khop_neighbors(&self, v: NodeId, hops: usize) -> Result<Neighborhood> {
        self.check_node(v)?;
        check_hop(hops, 1)?;
        Ok(Neighborhood {
            center: v,
            levels: self.bfs_levels(v, hops),
        })
    }

    /// Simple paths with `hop` edges starting at `v`, in lexicographic order,
    /// cut off after `limit` paths.
    pub fn paths_to_level(&self, v: NodeId, hop: usize, limit: usize) -> Result<PathSet> {
        self.check_node(v)?;
        check_hop(hop, 2)?;
        let mut out = PathSet {
            center: v,
            hop,
            paths: Vec::new(),
            truncated: false,
        };
        let mut stack = vec![v];
        self.extend_paths(&mut stack, hop, limit, &mut out);
        Ok(out)
    }

    fn extend_paths(&self, path: &mut Vec<NodeId>, hop: usize, limit: usize, out: &mut PathSet) {
        if path.len() == hop + 1 {
            if out.paths.len() == limit {
                out.truncated = true;
            } else {
                out.paths.push(path.clone());
            }
            return;
        }
        let last = *path.last().unwrap();
        for &w in self.neighbors(last) {
            if out.truncated {
                return;
            }
            if path.contains(&w) {
                continue;
            }
            path.push(w);
            self.extend_paths(path, hop, limit, out);
            path.pop();
        }
    }

    /// Every shortest route from `center` to `target`, given the target's
    /// distance `hop`. Each route lists only the intermediate nodes, in
    /// lexicographic order. Routes through `avoid` are skipped.
    pub fn shortest_routes(
        &self,
        center: NodeId,
        target: NodeId,
        hop: usize,
        avoid: &[NodeId],
    ) -> Vec<Vec<NodeId>> {
        let dist = self.distances_within(center, hop);
        self.routes_with_distances(&dist, center, target, hop, avoid)
    }

    /// As [`Graph::shortest_routes`], reusing distances from
    /// [`Graph::distances_within`] computed for the same center.
    pub fn routes_with_distances(
        &self,
        dist: &HashMap<NodeId, usize>,
        center: NodeId,
        target: NodeId,
        hop: usize,
        avoid: &[NodeId],
    ) -> Vec<Vec<NodeId>> {
        if dist.get(&target) != Some(&hop) || hop < 2 {
            return Vec::new();
        }
        let mut routes = Vec::new();
        let mut path = Vec::with_capacity(hop);
        self.descend_routes(dist, center, target, hop, 1, avoid, &mut path, &mut routes);
        routes
    }

    #[allow(clippy::too_many_arguments)]
    fn descend_routes(
        &self,
        dist: &HashMap<NodeId, usize>,
        at: NodeId,
        target: NodeId,
        hop: usize,
        depth: usize,
        avoid: &[NodeId],
        path: &mut Vec<NodeId>,
        routes: &mut Vec<Vec<NodeId>>,
    ) {
        if depth == hop {
            if self.has_edge(at, target) {
                routes.push(path.clone());
            }
            return;
        }
        for &w in self.neighbors(at) {
            if dist.get(&w) != Some(&depth) || avoid.contains(&w) {
                continue;
            }
            path.push(w);
            self.descend_routes(dist, w, target, hop, depth + 1, avoid, path, routes);
            path.pop();
        }
    }
}

fn check_hop(hop: usize, min: usize) -> Result<()> {
    if hop < min || hop > MAX_HOP {
        return Err(Error::HopOutOfRange {
            hop,
            min,
            max: MAX_HOP,
        });
    }
    Ok(())
}

pub(crate) fn edge_key(directed: bool, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if directed || u < v {
        (u, v)
    } else {
        (v, u)
    }
}
