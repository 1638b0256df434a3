//! Independent oracles and fixtures shared by the integration tests. None
//! of this calls into the library's traversal or voting code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use graphtext::graph::GraphParts;
use graphtext::{Graph, NodeId, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi edge list over `n` nodes, each unordered pair with prob `p`.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn plain_graph(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
    Graph::from_parts(GraphParts {
        num_nodes: n,
        edges: edges.iter().map(|&(u, v)| (u, v, None)).collect(),
        features: vec![0.0; n],
        dim: 1,
        ..GraphParts::default()
    })
    .unwrap()
    .0
}

/// Texts that try to break the grammar.
pub const NASTY_TEXTS: &[&str] = &[
    "Deep (graph) learning, revisited",
    "within two hops through <node_1>, respectively.",
    "a \\ b \\\\ c",
    ")(",
    "is connected with <node_99> within one hop.",
    "ünïcødé — τίτλος",
    "trailing backslash \\",
    "(its title: nested)",
    "or then , ; :",
    "",
];

pub struct Fixture {
    pub graph: Graph,
    pub edges: Vec<(NodeId, NodeId)>,
}

/// Plain titles that contain no grammar keywords or node tokens.
pub const PLAIN_TEXTS: &[&str] = &["Spectral methods", "A survey of citation networks", "Notes"];

/// Random labeled graph with titles drawn from `texts` (none if empty),
/// a rough 54/18/28 split and `num_classes` categories.
pub fn labeled_graph(seed: u64, n: usize, p: f64, num_classes: usize, texts: &[&str]) -> Fixture {
    let mut r = rng(seed);
    let edges = random_edges(&mut r, n, p);
    let labels = (0..n).map(|_| Some(r.random_range(0..num_classes))).collect();
    let texts = (0..n)
        .map(|i| {
            if texts.is_empty() || r.random_bool(0.2) {
                None
            } else {
                let t = texts[r.random_range(0..texts.len())];
                Some(format!("{t} #{i}"))
            }
        })
        .collect();
    let splits = (0..n)
        .map(|_| match r.random_range(0..100) {
            0..54 => Split::Train,
            54..72 => Split::Val,
            _ => Split::Test,
        })
        .collect();
    let graph = Graph::from_parts(GraphParts {
        num_nodes: n,
        edges: edges.iter().map(|&(u, v)| (u, v, None)).collect(),
        features: (0..n).map(|i| i as f32).collect(),
        dim: 1,
        texts,
        labels,
        categories: (0..num_classes).map(|c| format!("Class {c}")).collect(),
        splits,
        ..GraphParts::default()
    })
    .unwrap()
    .0;
    Fixture { graph, edges }
}

/// Exact-distance levels for every node from boolean adjacency powers:
/// `R_k = R_{k-1} | R_{k-1} * A`, level k = `R_k \ R_{k-1}`.
pub fn matrix_levels(n: usize, edges: &[(NodeId, NodeId)], directed: bool, hops: usize) -> Vec<Vec<Vec<NodeId>>> {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u != v {
            a[u][v] = true;
            if !directed {
                a[v][u] = true;
            }
        }
    }
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut out = vec![Vec::with_capacity(hops); n];
    for _ in 0..hops {
        let mut next = reach.clone();
        for i in 0..n {
            for m in 0..n {
                if reach[i][m] {
                    for j in 0..n {
                        next[i][j] |= a[m][j];
                    }
                }
            }
        }
        for i in 0..n {
            out[i].push((0..n).filter(|&j| next[i][j] && !reach[i][j]).collect());
        }
        reach = next;
    }
    out
}

/// Every simple path of `k` edges from `v`, by trying all node sequences.
pub fn brute_paths(n: usize, edges: &[(NodeId, NodeId)], v: NodeId, k: usize) -> Vec<Vec<NodeId>> {
    let adj: BTreeSet<(NodeId, NodeId)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    let mut out = Vec::new();
    let mut seq = vec![v];
    fn go(n: usize, adj: &BTreeSet<(NodeId, NodeId)>, k: usize, seq: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if seq.len() == k + 1 {
            out.push(seq.clone());
            return;
        }
        for w in 0..n {
            if !seq.contains(&w) && adj.contains(&(*seq.last().unwrap(), w)) {
                seq.push(w);
                go(n, adj, k, seq, out);
                seq.pop();
            }
        }
    }
    go(n, &adj, k, &mut seq, &mut out);
    out.sort();
    out
}

/// Two-block stochastic block model; node i is in block `i * 2 / n`.
pub fn sbm(seed: u64, n: usize, p_in: f64, p_out: f64) -> (Vec<(NodeId, NodeId)>, Vec<usize>) {
    let mut r = rng(seed);
    let block: Vec<usize> = (0..n).map(|i| i * 2 / n).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    (edges, block)
}

/// Weighted label propagation straight off the edge list: BFS to three
/// hops, each labeled training node at distance k adds `weights[k-1]` to
/// its class. Highest score wins; ties go to the class seen at the lowest
/// hop, then the smaller name; no votes falls back to the majority class.
pub fn direct_vote(
    n: usize,
    edges: &[(NodeId, NodeId)],
    train: &[Option<usize>],
    categories: &[String],
    weights: &[f64],
    v: NodeId,
) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut queue = std::collections::VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == weights.len() {
            continue;
        }
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let nc = categories.len();
    // Per class: hop counts as integers, combined once so rounding matches
    // any implementation that sums count * weight per hop.
    let mut counts = vec![vec![0usize; weights.len()]; nc];
    for u in 0..n {
        if u != v && dist[u] >= 1 && dist[u] <= weights.len() {
            if let Some(c) = train[u] {
                counts[c][dist[u] - 1] += 1;
            }
        }
    }
    let score = |c: usize| -> f64 {
        counts[c]
            .iter()
            .zip(weights)
            .filter(|(k, _)| **k > 0)
            .map(|(k, w)| w * *k as f64)
            .sum()
    };
    let first = |c: usize| counts[c].iter().position(|&k| k > 0).unwrap_or(usize::MAX);
    let voted: Vec<usize> = (0..nc).filter(|&c| score(c) > 0.0).collect();
    if voted.is_empty() {
        let mut freq = vec![0usize; nc];
        for c in train.iter().flatten() {
            freq[*c] += 1;
        }
        let top = *freq.iter().max().unwrap();
        return (0..nc)
            .filter(|&c| freq[c] == top)
            .min_by(|&a, &b| categories[a].cmp(&categories[b]))
            .unwrap();
    }
    *voted
        .iter()
        .min_by(|&&a, &&b| {
            score(b)
                .partial_cmp(&score(a))
                .unwrap()
                .then(first(a).cmp(&first(b)))
                .then(categories[a].cmp(&categories[b]))
        })
        .unwrap()
}

/// Node ids of every `<node_N>` token in `text`.
pub fn node_tokens(text: &str) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find("<node_") {
        rest = &rest[i + 6..];
        let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
        if !digits.is_empty() && rest[digits.len()..].starts_with('>') {
            out.push(digits.parse().unwrap());
        }
    }
    out
}

/// Adjacency lists for an undirected edge list, sorted.
pub fn adjacency(n: usize, edges: &[(NodeId, NodeId)]) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Simple paths of `k` edges from `v`, by depth-first search over `adj`.
pub fn dfs_paths(adj: &[Vec<NodeId>], v: NodeId, k: usize) -> Vec<Vec<NodeId>> {
    fn go(adj: &[Vec<NodeId>], k: usize, seq: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if seq.len() == k + 1 {
            out.push(seq.clone());
            return;
        }
        for &w in &adj[*seq.last().unwrap()] {
            if !seq.contains(&w) {
                seq.push(w);
                go(adj, k, seq, out);
                seq.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, k, &mut vec![v], &mut out);
    out.sort();
    out
}
