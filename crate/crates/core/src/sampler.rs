//! Budget-constrained neighbor selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::prompt::{render_text, PromptSpec};
use crate::tokens::TokenCounter;

/// Intermediate nodes of one route from the center to a target.
pub type Route = Vec<NodeId>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodSample {
    pub center: NodeId,
    /// `chosen[k - 1]`: sorted neighbors kept at hop `k`.
    pub chosen: Vec<Vec<NodeId>>,
    /// `chosen_paths[k - 1][i]`: routes to `chosen[k - 1][i]`. The hop-1
    /// entry is always empty.
    pub chosen_paths: Option<Vec<Vec<Vec<Route>>>>,
    /// Tokens in the full input the sample was measured against.
    pub token_count: usize,
    pub budget: usize,
    /// Every eligible neighbor was kept.
    pub exhaustive: bool,
}

impl NeighborhoodSample {
    /// Drops `nodes` from every level and every route through them. With
    /// paths, a target left without routes is dropped too.
    pub fn without(&self, nodes: &[NodeId]) -> NeighborhoodSample {
        let mut out = self.clone();
        for k in 0..out.chosen.len() {
            let level = std::mem::take(&mut out.chosen[k]);
            let mut groups = out
                .chosen_paths
                .as_mut()
                .filter(|_| k > 0)
                .map(|p| std::mem::take(&mut p[k]).into_iter());
            let mut kept_groups = Vec::new();
            for n in level {
                let routes = groups.as_mut().and_then(Iterator::next);
                if nodes.contains(&n) {
                    continue;
                }
                match routes {
                    Some(routes) => {
                        let routes: Vec<Route> = routes
                            .into_iter()
                            .filter(|r| !r.iter().any(|x| nodes.contains(x)))
                            .collect();
                        if routes.is_empty() {
                            continue;
                        }
                        kept_groups.push(routes);
                    }
                    None => {}
                }
                out.chosen[k].push(n);
            }
            if k > 0 {
                if let Some(p) = out.chosen_paths.as_mut() {
                    p[k] = kept_groups;
                }
            }
        }
        if out.chosen != self.chosen {
            out.exhaustive = false;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.chosen.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Text around the structure description plus nodes that must not appear.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleContext<'a> {
    pub prefix: &'a str,
    pub query: &'a str,
    pub exclude: &'a [NodeId],
    /// Use within-k levels instead of exact-distance levels.
    pub cumulative_levels: bool,
}

/// Joins the non-empty parts with single spaces.
pub fn compose_input(prefix: &str, structure: &str, query: &str) -> String {
    let mut out = String::with_capacity(prefix.len() + structure.len() + query.len() + 2);
    for part in [prefix, structure, query] {
        if part.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

struct Pool {
    nodes: Vec<NodeId>,
    routes: Vec<Vec<Route>>,
}

/// Greedy round-robin growth over the hop levels.
///
/// Each level is shuffled with an RNG seeded from `seed`; neighbors are
/// then offered one at a time, cycling hop 1, 2, 3, 1, ... A level closes
/// the first time its next neighbor would push the composed input past the
/// counter's limit. When everything fits the sample is exhaustive.
pub fn sample_neighborhood(
    g: &Graph,
    v: NodeId,
    spec: &PromptSpec,
    counter: &TokenCounter,
    seed: u64,
    ctx: &SampleContext<'_>,
) -> Result<NeighborhoodSample> {
    g.check_node(v)?;
    if ctx.cumulative_levels && spec.include_paths {
        return Err(Error::InvalidSpec(
            "cumulative levels cannot be combined with paths".into(),
        ));
    }
    let pools = eligible(g, v, spec, ctx)?;
    let measure = |picked: &[Vec<usize>]| -> Result<(NeighborhoodSample, usize)> {
        let mut sample = assemble(v, spec, &pools, picked);
        let text = render_text(g, &sample, spec)?;
        let count = counter.count(&compose_input(ctx.prefix, &text, ctx.query));
        sample.token_count = count;
        sample.budget = counter.limit;
        Ok((sample, count))
    };

    let empty: Vec<Vec<usize>> = vec![Vec::new(); pools.len()];
    let (mut best, floor) = measure(&empty)?;
    if floor > counter.limit {
        return Err(Error::BudgetTooSmall {
            budget: counter.limit,
            floor,
        });
    }

    let total: usize = pools.iter().map(|p| p.nodes.len()).sum();
    if total == 0 {
        best.exhaustive = true;
        return Ok(best);
    }
    if counter.is_unlimited() || total <= counter.limit {
        let all: Vec<Vec<usize>> = pools.iter().map(|p| (0..p.nodes.len()).collect()).collect();
        let (mut sample, count) = measure(&all)?;
        if count <= counter.limit {
            sample.exhaustive = true;
            return Ok(sample);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orders: Vec<Vec<usize>> = pools
        .iter()
        .map(|p| {
            let mut order: Vec<usize> = (0..p.nodes.len()).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect();
    let mut picked = empty;
    let mut open: Vec<bool> = orders.iter().map(|o| !o.is_empty()).collect();
    while open.iter().any(|&o| o) {
        for k in 0..orders.len() {
            if !open[k] {
                continue;
            }
            let next = orders[k][picked[k].len()];
            picked[k].push(next);
            let (sample, count) = measure(&picked)?;
            if count <= counter.limit {
                best = sample;
                if picked[k].len() == orders[k].len() {
                    open[k] = false;
                }
            } else {
                picked[k].pop();
                open[k] = false;
            }
        }
    }
    best.exhaustive = picked
        .iter()
        .zip(&pools)
        .all(|(p, pool)| p.len() == pool.nodes.len());
    Ok(best)
}

fn eligible(g: &Graph, v: NodeId, spec: &PromptSpec, ctx: &SampleContext<'_>) -> Result<Vec<Pool>> {
    let hood = g.khop_neighbors(v, spec.hops())?;
    let hood = if ctx.cumulative_levels {
        hood.cumulative()
    } else {
        hood
    };
    let dist = spec
        .include_paths
        .then(|| g.distances_within(v, spec.hops()));
    let mut pools = Vec::with_capacity(hood.levels.len());
    for (k, level) in hood.levels.into_iter().enumerate() {
        let mut pool = Pool {
            nodes: Vec::new(),
            routes: Vec::new(),
        };
        for n in level {
            if ctx.exclude.contains(&n) {
                continue;
            }
            if let (Some(dist), true) = (&dist, k > 0) {
                let routes = g.routes_with_distances(dist, v, n, k + 1, ctx.exclude);
                if routes.is_empty() {
                    continue;
                }
                pool.routes.push(routes);
            }
            pool.nodes.push(n);
        }
        pools.push(pool);
    }
    Ok(pools)
}

fn assemble(v: NodeId, spec: &PromptSpec, pools: &[Pool], picked: &[Vec<usize>]) -> NeighborhoodSample {
    let mut chosen = Vec::with_capacity(pools.len());
    let mut paths = Vec::with_capacity(pools.len());
    for (k, (pool, idx)) in pools.iter().zip(picked).enumerate() {
        let mut idx = idx.clone();
        idx.sort_unstable();
        chosen.push(idx.iter().map(|&i| pool.nodes[i]).collect());
        if spec.include_paths && k > 0 {
            paths.push(idx.iter().map(|&i| pool.routes[i].clone()).collect());
        } else {
            paths.push(Vec::new());
        }
    }
    NeighborhoodSample {
        center: v,
        chosen,
        chosen_paths: spec.include_paths.then_some(paths),
        token_count: 0,
        budget: 0,
        exhaustive: false,
    }
}
