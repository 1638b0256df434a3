//! Answer normalization, accuracy, and a label-voting oracle that reads
//! either the graph or a rendered structure description.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Split};
use crate::instance::Instance;
use crate::parser::{parse_structure, ParsedNeighborhood};
use crate::prompt::{PromptId, Task};

/// Casefolds, trims, and strips trailing punctuation.
pub fn normalize_text(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .trim_end_matches(|c: char| c.is_whitespace() || ".,;:!?\"'".contains(c))
        .trim_start()
        .to_string()
}

/// Maps a free-text answer to a category index: exact match after
/// normalization, else the only category whose name occurs in the answer.
pub fn normalize_answer(raw: &str, categories: &[String]) -> Option<usize> {
    let answer = normalize_text(raw);
    let names: Vec<String> = categories.iter().map(|c| normalize_text(c)).collect();
    if let Some(i) = names.iter().position(|n| *n == answer) {
        return Some(i);
    }
    let mut hits = names
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.is_empty() && answer.contains(n.as_str()));
    match (hits.next(), hits.next()) {
        (Some((i, _)), None) => Some(i),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub center: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<PromptId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(alias = "prediction")]
    pub generation: String,
    /// Set by the oracle; scoring re-derives it from `generation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_label: Option<usize>,
}

impl PredictionRecord {
    pub fn new(center: NodeId, generation: impl Into<String>) -> Self {
        PredictionRecord {
            center,
            prompt_id: None,
            task: None,
            generation: generation.into(),
            matched_label: None,
        }
    }
}

pub fn read_predictions(text: &str) -> Result<Vec<PredictionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                file: "<predictions>".into(),
                line: i as u64 + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn write_predictions<W: std::io::Write>(preds: &[PredictionRecord], mut out: W) -> Result<()> {
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<predictions output>", e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub n: usize,
    pub correct: usize,
    /// Classification answers that mapped to no category.
    pub unmatched_count: usize,
}

type AlignKey = (NodeId, Option<PromptId>, Option<Task>);

fn uniform<T>(preds: &[PredictionRecord], field: impl Fn(&PredictionRecord) -> Option<T>, name: &str) -> Result<bool> {
    let with = preds.iter().filter(|p| field(p).is_some()).count();
    if with != 0 && with != preds.len() {
        return Err(Error::Alignment(format!(
            "{name} is set on {with} of {} predictions",
            preds.len()
        )));
    }
    Ok(with > 0)
}

/// Scores predictions against gold instances. Records pair up on center,
/// plus prompt id and task when the predictions carry them, in file order
/// within each key. A gold instance with no prediction, or the reverse, is
/// an error; a classification answer naming no category counts as wrong.
pub fn accuracy(preds: &[PredictionRecord], gold: &[Instance], categories: &[String]) -> Result<Metrics> {
    let by_id = uniform(preds, |p| p.prompt_id, "prompt_id")?;
    let by_task = uniform(preds, |p| p.task, "task")?;

    let mut queues: HashMap<AlignKey, VecDeque<&PredictionRecord>> = HashMap::new();
    for p in preds {
        let k: AlignKey = (p.center, p.prompt_id.filter(|_| by_id), p.task.filter(|_| by_task));
        queues.entry(k).or_default().push_back(p);
    }

    let mut m = Metrics {
        accuracy: 0.0,
        n: 0,
        correct: 0,
        unmatched_count: 0,
    };
    for g in gold {
        let k: AlignKey = (g.center, by_id.then_some(g.prompt_id), by_task.then_some(g.task));
        let p = queues
            .get_mut(&k)
            .and_then(|q| q.pop_front())
            .ok_or_else(|| Error::Alignment(format!("no prediction for center {} ({} {})", g.center, g.prompt_id, g.task)))?;
        m.n += 1;
        let ok = match g.task {
            Task::NodeClassification => match normalize_answer(&p.generation, categories) {
                Some(c) => categories[c] == g.target,
                None => {
                    m.unmatched_count += 1;
                    false
                }
            },
            _ => normalize_text(&p.generation) == normalize_text(&g.target),
        };
        m.correct += ok as usize;
    }
    if let Some((k, _)) = queues.iter().find(|(_, q)| !q.is_empty()) {
        return Err(Error::Alignment(format!("prediction for center {} has no gold instance", k.0)));
    }
    m.accuracy = if m.n == 0 { 0.0 } else { m.correct as f64 / m.n as f64 };
    Ok(m)
}

/// Labels the oracle may read: training nodes only.
#[derive(Debug, Clone)]
pub struct TrainLabels {
    labels: Vec<Option<usize>>,
    categories: Vec<String>,
    majority: usize,
}

impl TrainLabels {
    pub fn new(labels: Vec<Option<usize>>, categories: Vec<String>) -> Result<TrainLabels> {
        if categories.is_empty() {
            return Err(Error::Config("oracle needs at least one category".into()));
        }
        let mut counts = vec![0usize; categories.len()];
        for &l in labels.iter().flatten() {
            let slot = counts
                .get_mut(l)
                .ok_or_else(|| Error::UnknownCategory(l.to_string()))?;
            *slot += 1;
        }
        // Most frequent, lexicographically first name on ties.
        let majority = (0..categories.len())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(categories[b].cmp(&categories[a])))
            .unwrap();
        Ok(TrainLabels {
            labels,
            categories,
            majority,
        })
    }

    pub fn from_graph(g: &Graph) -> Result<TrainLabels> {
        let labels = (0..g.num_nodes())
            .map(|v| g.label(v).filter(|_| g.split(v) == Split::Train))
            .collect();
        TrainLabels::new(labels, g.categories().to_vec())
    }

    pub fn get(&self, v: NodeId) -> Option<usize> {
        self.labels.get(v).copied().flatten()
    }

    pub fn majority(&self) -> usize {
        self.majority
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Class supported at the lowest hop, then the smallest category name.
    #[default]
    LowestHopThenLexicographic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    #[default]
    TrainMajority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// A vote from hop k weighs `hop_weights[k - 1]`; hops past the end are ignored.
    pub hop_weights: Vec<f64>,
    pub tie_break: TieBreak,
    pub fallback: Fallback,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            hop_weights: vec![1.0, 0.5, 0.25],
            tie_break: TieBreak::default(),
            fallback: Fallback::default(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hop_weights.is_empty() || self.hop_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config(format!(
                "hop weights must be positive, got {:?}",
                self.hop_weights
            )));
        }
        Ok(())
    }
}

/// Weighted vote over per-hop label counts.
fn vote(counts: &[Vec<usize>], cfg: &OracleConfig, train: &TrainLabels) -> usize {
    let mut best: Option<(f64, usize, usize)> = None;
    for c in 0..train.categories.len() {
        let mut score = 0.0;
        let mut first_hop = usize::MAX;
        for (hop, w) in counts.iter().zip(&cfg.hop_weights) {
            if hop[c] > 0 {
                score += w * hop[c] as f64;
            }
        }
        if let Some(k) = counts.iter().position(|hop| hop[c] > 0) {
            first_hop = k;
        }
        if score <= 0.0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((s, h, b)) => {
                score > s
                    || (score == s && first_hop < h)
                    || (score == s && first_hop == h && train.categories[c] < train.categories[b])
            }
        };
        if better {
            best = Some((score, first_hop, c));
        }
    }
    match cfg.fallback {
        Fallback::TrainMajority => best.map_or(train.majority, |(_, _, c)| c),
    }
}

/// Predicts the center's class from the training labels found in a parsed
/// structure description.
pub fn oracle_classify(parsed: &ParsedNeighborhood, train: &TrainLabels, cfg: &OracleConfig) -> usize {
    let counts: Vec<Vec<usize>> = parsed
        .levels
        .iter()
        .take(cfg.hop_weights.len())
        .map(|level| {
            let mut hop = vec![0usize; train.categories.len()];
            for &u in level.iter().filter(|&&u| u != parsed.center) {
                if let Some(l) = train.get(u) {
                    hop[l] += 1;
                }
            }
            hop
        })
        .collect();
    vote(&counts, cfg, train)
}

/// Oracle predictions for the classification instances of a dataset, read
/// from their prompt text alone.
pub fn oracle_predictions(instances: &[Instance], train: &TrainLabels, cfg: &OracleConfig) -> Result<Vec<PredictionRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for inst in instances.iter().filter(|i| i.task == Task::NodeClassification) {
        let text = inst.structure(&train.categories).ok_or_else(|| Error::Malformed {
            pos: 0,
            msg: format!("instance for node {} does not match the classification layout", inst.center),
        })?;
        let c = oracle_classify(&parse_structure(text)?, train, cfg);
        out.push(PredictionRecord {
            center: inst.center,
            prompt_id: Some(inst.prompt_id),
            task: Some(inst.task),
            generation: train.categories[c].clone(),
            matched_label: Some(c),
        });
    }
    Ok(out)
}

/// Per-class gold counts.
pub fn class_histogram(gold: &[Instance]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for g in gold.iter().filter(|g| g.task == Task::NodeClassification) {
        *h.entry(g.target.clone()).or_insert(0) += 1;
    }
    h
}
