//! Strict inverse of the structure renderer.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_key, Graph, NodeId};
use crate::prompt::{PromptSpec, EDGE_OPEN, EMPTY_LIST, FEATURE_OPEN, HOP_PHRASES};
use crate::sampler::{sample_neighborhood, Route, SampleContext};
use crate::tokens::TokenCounter;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedNeighborhood {
    pub center: NodeId,
    /// `levels[k - 1]`; hops with no sentence are empty.
    pub levels: Vec<Vec<NodeId>>,
    /// `paths[k - 1]`, aligned with `levels[k - 1]` when the sentence had a
    /// `through` clause.
    pub paths: Vec<Option<Vec<Vec<Route>>>>,
    pub node_features: BTreeMap<NodeId, String>,
    /// Keyed like the graph's edges: `(min, max)` for undirected graphs.
    pub edge_features: BTreeMap<(NodeId, NodeId), String>,
}

impl ParsedNeighborhood {
    /// Levels with trailing empty hops removed.
    pub fn trimmed_levels(&self) -> &[Vec<NodeId>] {
        let n = self
            .levels
            .iter()
            .rposition(|l| !l.is_empty())
            .map_or(0, |i| i + 1);
        &self.levels[..n]
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos == self.text.len()
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Malformed {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            let got: String = self.rest().chars().take(24).collect();
            self.fail(format!("expected {lit:?}, found {got:?}"))
        }
    }

    fn node_token(&mut self) -> Result<NodeId> {
        if !self.eat("<node_") {
            return self.fail("expected a node token");
        }
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        let raw = &self.rest()[..digits];
        if digits == 0 || (digits > 1 && raw.starts_with('0')) {
            return self.fail(format!("bad node id {raw:?}"));
        }
        let id = match raw.parse() {
            Ok(id) => id,
            Err(_) => return self.fail(format!("node id {raw:?} overflows")),
        };
        self.pos += digits;
        self.expect(">")?;
        Ok(id)
    }

    /// Body of an escaped group; the opening literal is already consumed.
    fn group_body(&mut self) -> Result<String> {
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some((_, e @ ('(' | ')' | '\\'))) => out.push(e),
                    _ => {
                        self.pos += i;
                        return self.fail("invalid escape");
                    }
                },
                '(' => {
                    self.pos += i;
                    return self.fail("unescaped '(' inside feature text");
                }
                ')' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                _ => out.push(c),
            }
        }
        self.pos = self.text.len();
        self.fail("unbalanced feature parentheses")
    }
}

struct Parser<'a> {
    cur: Cursor<'a>,
    out: ParsedNeighborhood,
    seen_nodes: HashSet<NodeId>,
}

impl Parser<'_> {
    fn node_ref(&mut self) -> Result<NodeId> {
        let id = self.cur.node_token()?;
        let first = self.seen_nodes.insert(id);
        if self.cur.rest().starts_with(" (its title: ") {
            if !first {
                return self.cur.fail(format!("feature text on repeated node {id}"));
            }
            self.cur.expect(" ")?;
            self.cur.expect(FEATURE_OPEN)?;
            let text = self.cur.group_body()?;
            self.out.node_features.insert(id, text);
        }
        Ok(id)
    }

    fn record_edge(&mut self, u: NodeId, v: NodeId, text: String) -> Result<()> {
        // Direction is unknown at parse time; verification looks up both.
        if self.out.edge_features.insert(edge_key(false, u, v), text).is_some() {
            return self.cur.fail(format!("repeated feature for edge ({u}, {v})"));
        }
        Ok(())
    }

    fn route(&mut self, center: NodeId, target: NodeId, hop: usize) -> Result<Route> {
        let mut route: Route = Vec::with_capacity(hop - 1);
        let mut pending = None;
        if self.cur.eat(EDGE_OPEN) {
            pending = Some(self.cur.group_body()?);
            self.cur.expect(" ")?;
        }
        loop {
            let prev = route.last().copied().unwrap_or(center);
            let n = self.node_ref()?;
            if let Some(text) = pending.take() {
                self.record_edge(prev, n, text)?;
            }
            route.push(n);
            if self.cur.eat(" (via: ") {
                pending = Some(self.cur.group_body()?);
            }
            if route.len() == hop - 1 {
                if let Some(text) = pending.take() {
                    self.record_edge(n, target, text)?;
                }
                return Ok(route);
            }
            self.cur.expect(" then ")?;
        }
    }

    fn sentence(&mut self) -> Result<(NodeId, usize)> {
        let center = self.node_ref()?;
        self.cur.expect(" is connected with ")?;
        let mut list = Vec::new();
        if !self.cur.eat(EMPTY_LIST) {
            list.push(self.node_ref()?);
            while self.cur.eat(", ") {
                list.push(self.node_ref()?);
            }
        }
        self.cur.expect(" within ")?;
        let hop = match HOP_PHRASES.iter().position(|p| self.cur.eat(p)) {
            Some(i) => i + 1,
            None => return self.cur.fail("hop phrase must be one hop, two hops or three hops"),
        };
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return self.cur.fail("neighbor list not strictly ascending");
        }
        if list.contains(&center) {
            return self.cur.fail("center listed as its own neighbor");
        }
        if list.is_empty() && hop > 1 {
            return self.cur.fail("empty list outside the one-hop sentence");
        }

        let mut groups = None;
        if self.cur.eat(" through ") {
            if hop < 2 {
                return self.cur.fail("one-hop sentence cannot have paths");
            }
            let mut all = Vec::with_capacity(list.len());
            for (i, &target) in list.iter().enumerate() {
                if i > 0 {
                    self.cur.expect(", ")?;
                }
                let mut routes = vec![self.route(center, target, hop)?];
                while self.cur.eat(" or ") {
                    routes.push(self.route(center, target, hop)?);
                }
                if routes.windows(2).any(|w| w[0] >= w[1]) {
                    return self.cur.fail("routes not strictly ascending");
                }
                all.push(routes);
            }
            if !self.cur.eat(", respectively") {
                return self.cur.fail("path count differs from neighbor count");
            }
            groups = Some(all);
        }
        self.cur.expect(".")?;

        if self.out.levels.len() < hop {
            self.out.levels.resize(hop, Vec::new());
            self.out.paths.resize(hop, None);
        }
        self.out.levels[hop - 1] = list;
        self.out.paths[hop - 1] = groups;
        Ok((center, hop))
    }
}

/// Parses canonical structure text. Anything the renderer cannot produce
/// is rejected.
pub fn parse_structure(text: &str) -> Result<ParsedNeighborhood> {
    let mut p = Parser {
        cur: Cursor { text, pos: 0 },
        out: ParsedNeighborhood::default(),
        seen_nodes: HashSet::new(),
    };
    let mut last_hop = 0;
    let mut center = None;
    loop {
        let start = p.cur.pos;
        let (c, hop) = p.sentence()?;
        if hop <= last_hop {
            p.cur.pos = start;
            return p.cur.fail("hop sentences out of order");
        }
        if last_hop == 0 && hop != 1 {
            p.cur.pos = start;
            return p.cur.fail("first sentence must describe one hop");
        }
        if *center.get_or_insert(c) != c {
            p.cur.pos = start;
            return p.cur.fail("sentences disagree on the center");
        }
        last_hop = hop;
        if p.cur.at_end() {
            break;
        }
        p.cur.expect(" ")?;
    }
    p.out.center = center.unwrap();
    Ok(p.out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub node: NodeId,
    pub prompt_id: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub total: usize,
    pub passed: usize,
    pub cases: Vec<CaseReport>,
}

impl RoundtripReport {
    pub fn all_ok(&self) -> bool {
        self.passed == self.total
    }

    pub fn push(&mut self, case: CaseReport) {
        self.total += 1;
        self.passed += case.ok as usize;
        self.cases.push(case);
    }

    pub fn merge(&mut self, other: RoundtripReport) {
        self.total += other.total;
        self.passed += other.passed;
        self.cases.extend(other.cases);
    }
}

/// Renders `v` under `spec`, parses the text back and compares it with
/// the graph. An unlimited counter demands equality; a finite one demands
/// that everything parsed is genuinely there.
pub fn verify_roundtrip(g: &Graph, v: NodeId, spec: &PromptSpec, counter: &TokenCounter) -> CaseReport {
    let diff = match check(g, v, spec, counter) {
        Ok(()) => None,
        Err(msg) => Some(msg),
    };
    CaseReport {
        node: v,
        prompt_id: spec.id().to_string(),
        ok: diff.is_none(),
        diff,
    }
}

fn excerpt<T: std::fmt::Debug>(what: &str, expected: &T, got: &T) -> String {
    let mut s = format!("{what}: expected {expected:?}, got {got:?}");
    if s.len() > 240 {
        let cut = (0..=240).rev().find(|&i| s.is_char_boundary(i)).unwrap();
        s.truncate(cut);
        s.push_str("...");
    }
    s
}

fn check(g: &Graph, v: NodeId, spec: &PromptSpec, counter: &TokenCounter) -> Result<(), String> {
    let seed = crate::seed::derive_seed(0, v, spec.id().code(), "verify", 0);
    let sample = sample_neighborhood(g, v, spec, counter, seed, &SampleContext::default())
        .map_err(|e| format!("sampling failed: {e}"))?;
    let text = crate::prompt::render_text(g, &sample, spec).map_err(|e| format!("render failed: {e}"))?;
    let parsed = parse_structure(&text).map_err(|e| format!("parse failed: {e}"))?;
    let exact = counter.is_unlimited();

    if parsed.center != v {
        return Err(excerpt("center", &v, &parsed.center));
    }
    let truth = g.khop_neighbors(v, spec.hops()).map_err(|e| e.to_string())?;
    let mut levels = parsed.levels.clone();
    levels.resize(spec.hops(), Vec::new());
    for (k, (want, got)) in truth.levels.iter().zip(&levels).enumerate() {
        let ok = if exact {
            want == got
        } else {
            got.iter().all(|n| want.binary_search(n).is_ok())
        };
        if !ok {
            return Err(excerpt(&format!("hop {} neighbors", k + 1), want, got));
        }
    }

    let mut mentioned: Vec<NodeId> = vec![v];
    mentioned.extend(levels.iter().flatten());
    if spec.include_paths {
        for k in 2..=spec.hops() {
            let set = g.paths_to_level(v, k, usize::MAX).map_err(|e| e.to_string())?;
            let got_targets = &levels[k - 1];
            let got_groups = parsed.paths.get(k - 1).cloned().flatten().unwrap_or_default();
            if got_groups.len() != got_targets.len() {
                return Err(format!("hop {k}: {} route groups for {} neighbors", got_groups.len(), got_targets.len()));
            }
            for (&t, routes) in got_targets.iter().zip(&got_groups) {
                let want: Vec<Route> = set
                    .paths
                    .iter()
                    .filter(|p| p[k] == t)
                    .map(|p| p[1..k].to_vec())
                    .collect();
                let ok = if exact {
                    &want == routes
                } else {
                    routes.iter().all(|r| want.contains(r))
                };
                if !ok {
                    return Err(excerpt(&format!("hop {k} routes to {t}"), &want, routes));
                }
                mentioned.extend(routes.iter().flatten());
            }
        }
    } else if parsed.paths.iter().any(Option::is_some) {
        return Err("paths rendered for a spec without paths".into());
    }

    if spec.use_features {
        mentioned.sort_unstable();
        mentioned.dedup();
        let want: BTreeMap<NodeId, String> = mentioned
            .iter()
            .filter_map(|&n| g.text(n).map(|t| (n, t.to_string())))
            .collect();
        if want != parsed.node_features {
            return Err(excerpt("node features", &want, &parsed.node_features));
        }
        for (&(a, b), text) in &parsed.edge_features {
            let stored = g.edge_text(a, b).or_else(|| g.edge_text(b, a));
            if stored != Some(text.as_str()) {
                return Err(excerpt(&format!("edge ({a}, {b}) feature"), &stored.map(str::to_string), &Some(text.clone())));
            }
        }
    } else if !parsed.node_features.is_empty() || !parsed.edge_features.is_empty() {
        return Err("features rendered for a spec without features".into());
    }
    Ok(())
}
