//! The prompt family and the canonical structure grammar.
//!
//! One sentence per hop level:
//!
//! ```text
//! <node_0> is connected with <node_1>, <node_4> within one hop.
//! <node_0> is connected with <node_2> within two hops through <node_1>, respectively.
//! ```
//!
//! Neighbor lists are sorted by id. With paths, the `through` list has one
//! entry per listed neighbor: its shortest routes joined by ` or `, and the
//! intermediate nodes of a three-hop route joined by ` then `. With
//! features, the first occurrence of a node token carries
//! `(its title: ...)` and the first occurrence of a path edge carries
//! `(via: ...)`; `(`, `)` and `\` inside those groups are backslash-escaped.
//! An empty one-hop list renders as `no nodes`; empty higher levels are
//! omitted.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, MAX_HOP};
use crate::sampler::NeighborhoodSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "nc")]
    NodeClassification,
    #[serde(rename = "lp_gen")]
    LpGenerative,
    #[serde(rename = "lp_disc")]
    LpDiscriminative,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::NodeClassification => "nc",
            Task::LpGenerative => "lp_gen",
            Task::LpDiscriminative => "lp_disc",
        }
    }

    pub fn is_link_prediction(self) -> bool {
        !matches!(self, Task::NodeClassification)
    }

    fn digit(self) -> u16 {
        if self.is_link_prediction() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nc" | "node_classification" => Ok(Task::NodeClassification),
            "lp_gen" | "lp_generative" => Ok(Task::LpGenerative),
            "lp_disc" | "lp_discriminative" => Ok(Task::LpDiscriminative),
            other => Err(Error::Config(format!("unknown task {other:?}"))),
        }
    }
}

/// A point in the prompt design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptSpec {
    pub task: Task,
    pub use_features: bool,
    pub max_hop: u8,
    pub include_paths: bool,
}

impl PromptSpec {
    pub fn new(task: Task, use_features: bool, max_hop: u8, include_paths: bool) -> Result<Self> {
        if max_hop == 0 || max_hop as usize > MAX_HOP {
            return Err(Error::InvalidSpec(format!(
                "max_hop {max_hop} outside 1..={MAX_HOP}"
            )));
        }
        if include_paths && max_hop < 2 {
            return Err(Error::InvalidSpec(
                "paths need a max_hop of at least 2".into(),
            ));
        }
        Ok(PromptSpec {
            task,
            use_features,
            max_hop,
            include_paths,
        })
    }

    pub fn id(&self) -> PromptId {
        PromptId(
            self.task.digit() * 1000
                + (self.use_features as u16 + 1) * 100
                + self.max_hop as u16 * 10
                + (self.include_paths as u16 + 1),
        )
    }

    pub fn with_task(self, task: Task) -> PromptSpec {
        PromptSpec { task, ..self }
    }

    pub fn hops(&self) -> usize {
        self.max_hop as usize
    }
}

/// Four-digit prompt code: task, features, max hop, paths.
///
/// The first two digits follow the published numbering (1 = node
/// classification / 2 = link prediction; 1 = no text features / 2 = text
/// features). The last two are this crate's convention: the hop cap, then
/// 1 = no intermediate paths / 2 = paths. Both link-prediction forms share
/// a code; the instance's `task` field tells them apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PromptId(u16);

impl PromptId {
    pub fn new(code: u16) -> Result<Self> {
        let id = PromptId(code);
        id.decode()?;
        Ok(id)
    }

    pub fn code(self) -> u16 {
        self.0
    }

    pub fn max_hop(self) -> u8 {
        (self.0 / 10 % 10) as u8
    }

    /// Link-prediction codes decode to the generative form.
    pub fn decode(self) -> Result<PromptSpec> {
        let bad = || Error::InvalidPromptId(format!("{:04}", self.0));
        let d = [self.0 / 1000, self.0 / 100 % 10, self.0 / 10 % 10, self.0 % 10];
        let task = match d[0] {
            1 => Task::NodeClassification,
            2 => Task::LpGenerative,
            _ => return Err(bad()),
        };
        let flag = |x: u16| match x {
            1 => Ok(false),
            2 => Ok(true),
            _ => Err(bad()),
        };
        PromptSpec::new(task, flag(d[1])?, d[2] as u8, flag(d[3])?).map_err(|_| bad())
    }

    pub fn decode_as(self, task: Task) -> Result<PromptSpec> {
        let spec = self.decode()?;
        if spec.task.digit() != task.digit() {
            return Err(Error::InvalidPromptId(format!(
                "{self} does not encode task {task}"
            )));
        }
        Ok(spec.with_task(task))
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.0)
    }
}

impl FromStr for PromptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 4 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidPromptId(s.to_string()));
        }
        PromptId::new(s.parse().unwrap())
    }
}

impl Serialize for PromptId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PromptId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every valid spec for the given tasks, ordered by prompt id then task.
pub fn enumerate_family(tasks: &[Task]) -> Result<Vec<PromptSpec>> {
    if tasks.is_empty() {
        return Err(Error::EmptyTasks);
    }
    let mut tasks = tasks.to_vec();
    tasks.sort_unstable();
    tasks.dedup();
    let mut family = Vec::new();
    for &task in &tasks {
        for use_features in [false, true] {
            for hop in 1..=MAX_HOP as u8 {
                for paths in [false, true] {
                    if let Ok(spec) = PromptSpec::new(task, use_features, hop, paths) {
                        family.push(spec);
                    }
                }
            }
        }
    }
    family.sort_by_key(|s| (s.id(), s.task));
    Ok(family)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureDescription {
    pub text: String,
    pub provenance: NeighborhoodSample,
}

pub fn node_token(id: NodeId) -> String {
    format!("<node_{id}>")
}

pub(crate) const HOP_PHRASES: [&str; MAX_HOP] = ["one hop", "two hops", "three hops"];
pub(crate) const FEATURE_OPEN: &str = "(its title: ";
pub(crate) const EDGE_OPEN: &str = "(via: ";
pub(crate) const EMPTY_LIST: &str = "no nodes";

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '(' | ')' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Renders the sample into canonical text, keeping the sample as provenance.
pub fn render_structure(
    g: &Graph,
    sample: &NeighborhoodSample,
    spec: &PromptSpec,
) -> Result<StructureDescription> {
    Ok(StructureDescription {
        text: render_text(g, sample, spec)?,
        provenance: sample.clone(),
    })
}

pub(crate) fn render_text(g: &Graph, sample: &NeighborhoodSample, spec: &PromptSpec) -> Result<String> {
    check_sample(g, sample, spec)?;
    let mut r = Renderer {
        g,
        features: spec.use_features,
        seen_nodes: HashSet::new(),
        seen_edges: HashSet::new(),
        out: String::new(),
    };
    for (k, level) in sample.chosen.iter().enumerate() {
        if k > 0 && level.is_empty() {
            continue;
        }
        if k > 0 {
            r.out.push(' ');
        }
        r.node(sample.center);
        r.out.push_str(" is connected with ");
        if level.is_empty() {
            r.out.push_str(EMPTY_LIST);
        }
        for (i, &n) in level.iter().enumerate() {
            if i > 0 {
                r.out.push_str(", ");
            }
            r.node(n);
        }
        r.out.push_str(" within ");
        r.out.push_str(HOP_PHRASES[k]);
        if spec.include_paths && k > 0 {
            let groups = &sample.chosen_paths.as_ref().unwrap()[k];
            r.out.push_str(" through ");
            for (i, (&target, routes)) in level.iter().zip(groups).enumerate() {
                if i > 0 {
                    r.out.push_str(", ");
                }
                for (j, route) in routes.iter().enumerate() {
                    if j > 0 {
                        r.out.push_str(" or ");
                    }
                    r.route(sample.center, route, target);
                }
            }
            r.out.push_str(", respectively");
        }
        r.out.push('.');
    }
    Ok(r.out)
}

fn check_sample(g: &Graph, sample: &NeighborhoodSample, spec: &PromptSpec) -> Result<()> {
    g.check_node(sample.center)?;
    if sample.chosen.len() != spec.hops() {
        return Err(Error::SpecMismatch(format!(
            "sample has {} hop levels, spec wants {}",
            sample.chosen.len(),
            spec.max_hop
        )));
    }
    if let Some(bad) = sample.chosen.iter().flatten().find(|&&n| n >= g.num_nodes()) {
        return Err(Error::NodeOutOfRange {
            node: *bad,
            num_nodes: g.num_nodes(),
        });
    }
    if !spec.include_paths {
        return Ok(());
    }
    let paths = sample
        .chosen_paths
        .as_ref()
        .ok_or_else(|| Error::SpecMismatch("spec includes paths but sample has none".into()))?;
    if paths.len() != sample.chosen.len() {
        return Err(Error::SpecMismatch("path levels misaligned".into()));
    }
    for (k, (level, groups)) in sample.chosen.iter().zip(paths).enumerate().skip(1) {
        if level.len() != groups.len() {
            return Err(Error::SpecMismatch(format!(
                "hop {} has {} neighbors but {} route groups",
                k + 1,
                level.len(),
                groups.len()
            )));
        }
        for routes in groups {
            if routes.is_empty() || routes.iter().any(|r| r.len() != k) {
                return Err(Error::SpecMismatch(format!(
                    "hop {} route groups need routes of {k} intermediate nodes",
                    k + 1
                )));
            }
        }
    }
    Ok(())
}

struct Renderer<'a> {
    g: &'a Graph,
    features: bool,
    seen_nodes: HashSet<NodeId>,
    seen_edges: HashSet<(NodeId, NodeId)>,
    out: String,
}

impl Renderer<'_> {
    fn node(&mut self, id: NodeId) {
        self.out.push_str(&node_token(id));
        if self.features && self.seen_nodes.insert(id) {
            if let Some(text) = self.g.text(id) {
                self.out.push(' ');
                self.out.push_str(FEATURE_OPEN);
                self.out.push_str(&escape(text));
                self.out.push(')');
            }
        }
    }

    /// Writes the edge marker and reports whether one was written.
    fn edge(&mut self, u: NodeId, v: NodeId) -> bool {
        if !self.features {
            return false;
        }
        let key = crate::graph::edge_key(self.g.is_directed(), u, v);
        if !self.seen_edges.insert(key) {
            return false;
        }
        match self.g.edge_text(u, v) {
            Some(text) => {
                self.out.push_str(EDGE_OPEN);
                self.out.push_str(&escape(text));
                self.out.push(')');
                true
            }
            None => false,
        }
    }

    fn route(&mut self, center: NodeId, route: &[NodeId], target: NodeId) {
        for (i, &hop) in route.iter().enumerate() {
            if i > 0 {
                self.out.push_str(" then ");
            } else if self.edge(center, hop) {
                self.out.push(' ');
            }
            self.node(hop);
            let next = route.get(i + 1).copied().unwrap_or(target);
            let mark = self.out.len();
            self.out.push(' ');
            if !self.edge(hop, next) {
                self.out.truncate(mark);
            }
        }
    }
}
