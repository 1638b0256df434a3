//! Instruction instances: prefix, structure description and query, plus
//! the target the model should generate.

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Split};
use crate::prompt::{enumerate_family, node_token, render_text, PromptId, PromptSpec, Task};
use crate::sampler::{compose_input, sample_neighborhood, NeighborhoodSample, SampleContext};
use crate::seed::{derive_seed, rng_for};
use crate::tokens::TokenCounter;

pub const NC_PREFIX_HEAD: &str = "Classify the central node into one of the following categories:";
pub const MULTI_HOP_HINT: &str = "Pay attention to the multi-hop link relationships between the nodes.";
pub const LP_PREFIX: &str =
    "Perform link prediction for the central node. Pay attention to the multi-hop link relationships between the nodes.";

pub fn nc_prefix(categories: &[String]) -> String {
    format!("{NC_PREFIX_HEAD} [{}]. {MULTI_HOP_HINT}", categories.join(", "))
}

pub fn nc_query(v: NodeId) -> String {
    format!("Which category should {} be classified as?", node_token(v))
}

pub fn lp_generative_query(v: NodeId, hop: usize) -> String {
    format!("Which other node will be connected to {} within {hop} hop?", node_token(v))
}

pub fn lp_discriminative_query(candidate: NodeId, v: NodeId, hop: usize) -> String {
    format!(
        "Will {} be connected to {} within {hop} hop?",
        node_token(candidate),
        node_token(v)
    )
}

/// One training or evaluation record. Field order is the JSONL key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub prompt_id: PromptId,
    pub task: Task,
    pub center: NodeId,
    pub input: String,
    pub target: String,
    pub hop: Option<u8>,
    pub candidate: Option<NodeId>,
    pub split: Split,
}

impl Instance {
    pub fn prefix(&self, categories: &[String]) -> String {
        match self.task {
            Task::NodeClassification => nc_prefix(categories),
            _ => LP_PREFIX.to_string(),
        }
    }

    pub fn query(&self) -> String {
        let hop = self.hop.unwrap_or(0) as usize;
        match self.task {
            Task::NodeClassification => nc_query(self.center),
            Task::LpGenerative => lp_generative_query(self.center, hop),
            Task::LpDiscriminative => {
                lp_discriminative_query(self.candidate.unwrap_or(0), self.center, hop)
            }
        }
    }

    /// The structure description between prefix and query, or `None` when
    /// the input is not an exact `prefix + " " + structure + " " + query`.
    pub fn structure<'a>(&'a self, categories: &[String]) -> Option<&'a str> {
        let prefix = self.prefix(categories);
        let query = self.query();
        self.input
            .strip_prefix(prefix.as_str())?
            .strip_prefix(' ')?
            .strip_suffix(query.as_str())?
            .strip_suffix(' ')
    }
}

/// Link-prediction ground truth semantics.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpOptions {
    /// Positives at distance exactly `h` instead of at most `h`.
    pub exact_level: bool,
}

fn check_center(g: &Graph, v: NodeId, sample: &NeighborhoodSample, spec: &PromptSpec, task: Task) -> Result<()> {
    g.check_node(v)?;
    if sample.center != v {
        return Err(Error::SpecMismatch(format!(
            "sample is centered on {}, not {v}",
            sample.center
        )));
    }
    if spec.task.is_link_prediction() != task.is_link_prediction() {
        return Err(Error::SpecMismatch(format!(
            "spec {} cannot build a {task} instance",
            spec.id()
        )));
    }
    Ok(())
}

pub fn build_nc_instance(g: &Graph, v: NodeId, spec: &PromptSpec, sample: &NeighborhoodSample) -> Result<Instance> {
    check_center(g, v, sample, spec, Task::NodeClassification)?;
    let label = g.label(v).ok_or(Error::Unlabeled(v))?;
    let structure = render_text(g, sample, spec)?;
    Ok(Instance {
        prompt_id: spec.id(),
        task: Task::NodeClassification,
        center: v,
        input: compose_input(&nc_prefix(g.categories()), &structure, &nc_query(v)),
        target: g.categories()[label].clone(),
        hop: None,
        candidate: None,
        split: g.split(v),
    })
}

fn check_lp_hop(h: usize, spec: &PromptSpec) -> Result<()> {
    if h == 0 || h > spec.hops() {
        return Err(Error::HopOutOfRange {
            hop: h,
            min: 1,
            max: spec.hops(),
        });
    }
    Ok(())
}

/// Sorted nodes counted as linked to `v` at hop `h`.
fn positive_pool(g: &Graph, v: NodeId, h: usize, opts: LpOptions) -> Vec<NodeId> {
    let mut pool: Vec<NodeId> = g
        .distances_within(v, h)
        .into_iter()
        .filter(|&(_, d)| d > 0 && (!opts.exact_level || d == h))
        .map(|(n, _)| n)
        .collect();
    pool.sort_unstable();
    pool
}

/// Whether `v` has both a positive and a negative candidate at hop `h`.
/// Slots failing this are dropped before the label is drawn, so skips do
/// not skew the yes/no balance.
pub fn lp_candidates_exist(g: &Graph, v: NodeId, h: usize, opts: LpOptions) -> bool {
    let pos = positive_pool(g, v, h, opts).len();
    pos > 0 && pos + 1 < g.num_nodes()
}

pub fn choose_lp_target(g: &Graph, v: NodeId, h: usize, seed: u64, opts: LpOptions) -> Result<NodeId> {
    g.check_node(v)?;
    let pool = positive_pool(g, v, h, opts);
    if pool.is_empty() {
        return Err(Error::NoCandidate { node: v, hop: h });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(pool[rng.random_range(0..pool.len())])
}

pub fn choose_lp_candidate(
    g: &Graph,
    v: NodeId,
    h: usize,
    seed: u64,
    positive: bool,
    opts: LpOptions,
) -> Result<NodeId> {
    if positive {
        return choose_lp_target(g, v, h, seed, opts);
    }
    g.check_node(v)?;
    let mut blocked: HashSet<NodeId> = positive_pool(g, v, h, opts).into_iter().collect();
    blocked.insert(v);
    let available = g.num_nodes() - blocked.len();
    if available == 0 {
        return Err(Error::NoCandidate { node: v, hop: h });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.random_range(0..available);
    Ok((0..g.num_nodes())
        .filter(|n| !blocked.contains(n))
        .nth(pick)
        .unwrap())
}

/// Generative link prediction: the model must name a node linked to `v`
/// within `h` hops. The chosen node is removed from the description.
pub fn build_lp_generative(
    g: &Graph,
    v: NodeId,
    h: usize,
    spec: &PromptSpec,
    sample: &NeighborhoodSample,
    seed: u64,
    opts: LpOptions,
) -> Result<Instance> {
    check_center(g, v, sample, spec, Task::LpGenerative)?;
    check_lp_hop(h, spec)?;
    let target = choose_lp_target(g, v, h, seed, opts)?;
    let structure = render_text(g, &sample.without(&[target]), spec)?;
    Ok(Instance {
        prompt_id: spec.id(),
        task: Task::LpGenerative,
        center: v,
        input: compose_input(LP_PREFIX, &structure, &lp_generative_query(v, h)),
        target: node_token(target),
        hop: Some(h as u8),
        candidate: None,
        split: g.split(v),
    })
}

/// Discriminative link prediction: a yes/no question about one candidate,
/// which is removed from the description either way.
#[allow(clippy::too_many_arguments)]
pub fn build_lp_discriminative(
    g: &Graph,
    v: NodeId,
    h: usize,
    spec: &PromptSpec,
    sample: &NeighborhoodSample,
    seed: u64,
    positive: bool,
    opts: LpOptions,
) -> Result<Instance> {
    check_center(g, v, sample, spec, Task::LpDiscriminative)?;
    check_lp_hop(h, spec)?;
    let candidate = choose_lp_candidate(g, v, h, seed, positive, opts)?;
    let structure = render_text(g, &sample.without(&[candidate]), spec)?;
    Ok(Instance {
        prompt_id: spec.id(),
        task: Task::LpDiscriminative,
        center: v,
        input: compose_input(
            LP_PREFIX,
            &structure,
            &lp_discriminative_query(candidate, v, h),
        ),
        target: if positive { "yes" } else { "no" }.to_string(),
        hop: Some(h as u8),
        candidate: Some(candidate),
        split: g.split(v),
    })
}

/// Which specs of the family a build uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecFilter {
    pub max_hop: u8,
    /// `None` keeps both variants.
    pub features: Option<bool>,
    pub paths: Option<bool>,
}

impl Default for SpecFilter {
    fn default() -> Self {
        SpecFilter {
            max_hop: 3,
            features: None,
            paths: None,
        }
    }
}

impl SpecFilter {
    pub fn matches(&self, spec: &PromptSpec) -> bool {
        spec.max_hop <= self.max_hop
            && self.features.is_none_or(|f| f == spec.use_features)
            && self.paths.is_none_or(|p| p == spec.include_paths)
    }
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub tasks: Vec<Task>,
    /// Explicit prompt ids; when set, `filter` is ignored.
    pub prompt_ids: Option<Vec<PromptId>>,
    pub filter: SpecFilter,
    /// Splits whose labeled nodes get node-classification instances.
    pub splits: Vec<Split>,
    /// Link prediction covers every node, not only the selected splits.
    pub lp_all_nodes: bool,
    pub counter: TokenCounter,
    pub seed: u64,
    /// Link-prediction instances per (node, link-prediction spec) slot.
    pub lp_mix_ratio: f64,
    /// Fraction of discriminative instances that are negative.
    pub neg_ratio: f64,
    pub lp: LpOptions,
    pub cumulative_levels: bool,
    pub resample_epochs: usize,
    pub workers: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            tasks: vec![
                Task::NodeClassification,
                Task::LpGenerative,
                Task::LpDiscriminative,
            ],
            prompt_ids: None,
            filter: SpecFilter::default(),
            splits: vec![Split::Train],
            lp_all_nodes: true,
            counter: TokenCounter::whitespace(512),
            seed: 0,
            lp_mix_ratio: 1.0,
            neg_ratio: 0.5,
            lp: LpOptions::default(),
            cumulative_levels: false,
            resample_epochs: 1,
            workers: 1,
        }
    }
}

impl DatasetConfig {
    /// Node-classification specs and link-prediction specs (generative
    /// form; the form is chosen per instance).
    pub fn specs(&self) -> Result<(Vec<PromptSpec>, Vec<PromptSpec>)> {
        if self.tasks.is_empty() {
            return Err(Error::EmptyTasks);
        }
        let mut nc = Vec::new();
        let mut lp = Vec::new();
        let wants_nc = self.tasks.contains(&Task::NodeClassification);
        let wants_lp = self.tasks.iter().any(|t| t.is_link_prediction());
        let candidates: Vec<PromptSpec> = match &self.prompt_ids {
            Some(ids) => ids.iter().map(|id| id.decode()).collect::<Result<_>>()?,
            None => enumerate_family(&[Task::NodeClassification, Task::LpGenerative])?
                .into_iter()
                .filter(|s| self.filter.matches(s))
                .collect(),
        };
        for spec in candidates {
            if spec.task.is_link_prediction() {
                if wants_lp {
                    lp.push(spec);
                }
            } else if wants_nc {
                nc.push(spec);
            }
        }
        nc.dedup();
        lp.dedup();
        if self.cumulative_levels && nc.iter().chain(&lp).any(|s| s.include_paths) {
            return Err(Error::Config(
                "cumulative levels cannot be combined with path prompts; disable paths".into(),
            ));
        }
        Ok((nc, lp))
    }

    fn lp_forms(&self) -> Vec<Task> {
        let mut forms: Vec<Task> = self
            .tasks
            .iter()
            .copied()
            .filter(|t| t.is_link_prediction())
            .collect();
        forms.sort_unstable();
        forms.dedup();
        forms
    }

    fn validate(&self, g: &Graph) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::EmptyTasks);
        }
        if !(self.lp_mix_ratio.is_finite() && self.lp_mix_ratio >= 0.0) {
            return Err(Error::Config(format!("lp_mix_ratio {} must be >= 0", self.lp_mix_ratio)));
        }
        if !(0.0..=1.0).contains(&self.neg_ratio) {
            return Err(Error::Config(format!("neg_ratio {} outside [0, 1]", self.neg_ratio)));
        }
        if self.resample_epochs == 0 {
            return Err(Error::Config("resample_epochs must be at least 1".into()));
        }
        if self.tasks.contains(&Task::NodeClassification) {
            for &split in &self.splits {
                let members = (0..g.num_nodes()).filter(|&v| g.split(v) == split);
                let (n, labeled) = members.fold((0, 0), |(n, l), v| {
                    (n + 1, l + g.label(v).is_some() as usize)
                });
                if n > 0 && labeled == 0 || split == Split::Unassigned && labeled == 0 {
                    return Err(Error::Config(format!(
                        "split {split} has no labeled nodes for node classification"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub nc: usize,
    pub lp_gen: usize,
    pub lp_disc: usize,
    pub lp_disc_positive: usize,
    pub skipped_budget: usize,
    pub skipped_no_candidate: usize,
}

impl BuildStats {
    fn add(&mut self, o: &BuildStats) {
        self.nc += o.nc;
        self.lp_gen += o.lp_gen;
        self.lp_disc += o.lp_disc;
        self.lp_disc_positive += o.lp_disc_positive;
        self.skipped_budget += o.skipped_budget;
        self.skipped_no_candidate += o.skipped_no_candidate;
    }

    fn record(&mut self, inst: &Instance) {
        match inst.task {
            Task::NodeClassification => self.nc += 1,
            Task::LpGenerative => self.lp_gen += 1,
            Task::LpDiscriminative => {
                self.lp_disc += 1;
                self.lp_disc_positive += (inst.target == "yes") as usize;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub stats: BuildStats,
}

type SortKey = (usize, NodeId, PromptId, Task, usize);

/// Builds every instance for `g`. Output order and bytes depend only on
/// `(g, cfg)` minus the worker count.
pub fn build_dataset(g: &Graph, cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate(g)?;
    let (nc_specs, lp_specs) = cfg.specs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let jobs: Vec<(usize, NodeId)> = (0..cfg.resample_epochs)
        .flat_map(|e| (0..g.num_nodes()).map(move |v| (e, v)))
        .collect();
    let per_node: Vec<(Vec<(SortKey, Instance)>, BuildStats)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(epoch, v)| node_instances(g, cfg, v, epoch, &nc_specs, &lp_specs))
            .collect::<Result<_>>()
    })?;

    let mut stats = BuildStats::default();
    let mut keyed = Vec::new();
    for (items, s) in per_node {
        stats.add(&s);
        keyed.extend(items);
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Dataset {
        instances: keyed.into_iter().map(|(_, i)| i).collect(),
        stats,
    })
}

fn node_instances(
    g: &Graph,
    cfg: &DatasetConfig,
    v: NodeId,
    epoch: usize,
    nc_specs: &[PromptSpec],
    lp_specs: &[PromptSpec],
) -> Result<(Vec<(SortKey, Instance)>, BuildStats)> {
    let mut out = Vec::new();
    let mut stats = BuildStats::default();
    let selected = cfg.splits.contains(&g.split(v));
    let epoch_tag = epoch as u64;

    if selected && g.label(v).is_some() {
        let prefix = nc_prefix(g.categories());
        let query = nc_query(v);
        for spec in nc_specs {
            let ctx = SampleContext {
                prefix: &prefix,
                query: &query,
                exclude: &[],
                cumulative_levels: cfg.cumulative_levels,
            };
            let seed = derive_seed(cfg.seed, v, spec.id().code(), "sample", epoch_tag);
            let sample = match sample_neighborhood(g, v, spec, &cfg.counter, seed, &ctx) {
                Ok(s) => s,
                Err(Error::BudgetTooSmall { .. }) => {
                    stats.skipped_budget += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let inst = build_nc_instance(g, v, spec, &sample)?;
            stats.record(&inst);
            out.push(((epoch, v, inst.prompt_id, inst.task, 0), inst));
        }
    }

    let forms = cfg.lp_forms();
    if forms.is_empty() || !(selected || cfg.lp_all_nodes) {
        return Ok((out, stats));
    }
    let whole = cfg.lp_mix_ratio.floor();
    let frac = cfg.lp_mix_ratio - whole;
    for spec in lp_specs {
        let pid = spec.id().code();
        let mut count_rng = rng_for(cfg.seed, v, pid, "lp-count", epoch_tag);
        let count = whole as usize + (frac > 0.0 && count_rng.random::<f64>() < frac) as usize;
        for j in 0..count {
            let form = forms[(v + j) % forms.len()];
            let mut rng = rng_for(cfg.seed, v, pid, "lp", (epoch_tag << 32) | j as u64);
            let h = rng.random_range(1..=spec.hops());
            let positive = rng.random::<f64>() >= cfg.neg_ratio;
            let pick_seed: u64 = rng.random();
            let spec = spec.with_task(form);
            if form == Task::LpDiscriminative && !lp_candidates_exist(g, v, h, cfg.lp) {
                stats.skipped_no_candidate += 1;
                continue;
            }
            let pick = match form {
                Task::LpGenerative => choose_lp_target(g, v, h, pick_seed, cfg.lp),
                _ => choose_lp_candidate(g, v, h, pick_seed, positive, cfg.lp),
            };
            let removed = match pick {
                Ok(n) => n,
                Err(Error::NoCandidate { .. }) => {
                    stats.skipped_no_candidate += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let query = match form {
                Task::LpGenerative => lp_generative_query(v, h),
                _ => lp_discriminative_query(removed, v, h),
            };
            let ctx = SampleContext {
                prefix: LP_PREFIX,
                query: &query,
                exclude: &[removed],
                cumulative_levels: cfg.cumulative_levels,
            };
            let sample_seed = derive_seed(cfg.seed, v, pid, "lp-sample", (epoch_tag << 32) | j as u64);
            let sample = match sample_neighborhood(g, v, &spec, &cfg.counter, sample_seed, &ctx) {
                Ok(s) => s,
                Err(Error::BudgetTooSmall { .. }) => {
                    stats.skipped_budget += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let inst = match form {
                Task::LpGenerative => build_lp_generative(g, v, h, &spec, &sample, pick_seed, cfg.lp)?,
                _ => build_lp_discriminative(g, v, h, &spec, &sample, pick_seed, positive, cfg.lp)?,
            };
            stats.record(&inst);
            out.push(((epoch, v, inst.prompt_id, inst.task, j), inst));
        }
    }
    Ok((out, stats))
}

pub fn write_jsonl<W: Write>(instances: &[Instance], mut out: W) -> Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<jsonl output>", e))?;
    }
    Ok(())
}

pub fn read_jsonl(text: &str) -> Result<Vec<Instance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                file: "<jsonl>".into(),
                line: i as u64 + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::build;
    use crate::graph::GraphParts;

    fn labeled_path() -> Graph {
        let parts = GraphParts {
            num_nodes: 4,
            edges: vec![(0, 1, None), (1, 2, None), (2, 3, None)],
            features: vec![0.0; 4],
            dim: 1,
            labels: vec![Some(0), Some(1), Some(0), None],
            categories: vec!["Diabetes Mellitus Type 2".into(), "Other".into()],
            splits: vec![Split::Train; 4],
            ..GraphParts::default()
        };
        Graph::from_parts(parts).unwrap().0
    }

    fn full_sample(g: &Graph, v: NodeId, spec: &PromptSpec) -> NeighborhoodSample {
        sample_neighborhood(g, v, spec, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap()
    }

    #[test]
    fn nc_instance_layout() {
        let g = labeled_path();
        let spec = PromptSpec::new(Task::NodeClassification, false, 1, false).unwrap();
        let inst = build_nc_instance(&g, 0, &spec, &full_sample(&g, 0, &spec)).unwrap();
        assert_eq!(inst.target, "Diabetes Mellitus Type 2");
        assert!(inst.input.starts_with(NC_PREFIX_HEAD));
        assert_eq!(
            inst.input,
            "Classify the central node into one of the following categories: \
             [Diabetes Mellitus Type 2, Other]. Pay attention to the multi-hop link relationships between the nodes. \
             <node_0> is connected with <node_1> within one hop. Which category should <node_0> be classified as?"
        );
        assert_eq!(
            inst.structure(g.categories()),
            Some("<node_0> is connected with <node_1> within one hop.")
        );
        let err = build_nc_instance(&g, 3, &spec, &full_sample(&g, 3, &spec));
        assert!(matches!(err, Err(Error::Unlabeled(3))));
    }

    #[test]
    fn generative_targets() {
        let g = build(4, &[(0, 1), (1, 2), (2, 3)]);
        let spec = PromptSpec::new(Task::LpGenerative, false, 2, false).unwrap();
        let sample = full_sample(&g, 0, &spec);
        let inst = build_lp_generative(&g, 0, 1, &spec, &sample, 5, LpOptions::default()).unwrap();
        assert_eq!(inst.target, "<node_1>");
        assert_eq!(
            inst.input,
            format!(
                "{LP_PREFIX} <node_0> is connected with no nodes within one hop. \
                 <node_0> is connected with <node_2> within two hops. \
                 Which other node will be connected to <node_0> within 1 hop?"
            )
        );
        let mut seen = HashSet::new();
        for seed in 0..50 {
            let inst = build_lp_generative(&g, 0, 2, &spec, &sample, seed, LpOptions::default()).unwrap();
            seen.insert(inst.target);
        }
        assert_eq!(
            seen,
            HashSet::from(["<node_1>".to_string(), "<node_2>".to_string()])
        );
        let iso = build(3, &[(0, 1)]);
        let s = full_sample(&iso, 2, &spec);
        assert!(matches!(
            build_lp_generative(&iso, 2, 1, &spec, &s, 0, LpOptions::default()),
            Err(Error::NoCandidate { .. })
        ));
        assert!(matches!(
            build_lp_generative(&g, 0, 3, &spec, &sample, 0, LpOptions::default()),
            Err(Error::HopOutOfRange { .. })
        ));
    }

    #[test]
    fn discriminative_candidates() {
        let g = build(4, &[(0, 1), (1, 2), (2, 3)]);
        let spec = PromptSpec::new(Task::LpDiscriminative, false, 1, false).unwrap();
        let sample = full_sample(&g, 0, &spec);
        let pos = build_lp_discriminative(&g, 0, 1, &spec, &sample, 1, true, LpOptions::default()).unwrap();
        assert_eq!((pos.candidate, pos.target.as_str()), (Some(1), "yes"));
        assert!(pos.input.ends_with("Will <node_1> be connected to <node_0> within 1 hop?"));
        let mut negs = HashSet::new();
        for seed in 0..50 {
            let neg = build_lp_discriminative(&g, 0, 1, &spec, &sample, seed, false, LpOptions::default()).unwrap();
            assert_eq!(neg.target, "no");
            negs.insert(neg.candidate.unwrap());
        }
        assert_eq!(negs, HashSet::from([2, 3]));

        let k4 = build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let s = full_sample(&k4, 2, &spec);
        assert!(matches!(
            build_lp_discriminative(&k4, 2, 1, &spec, &s, 0, false, LpOptions::default()),
            Err(Error::NoCandidate { .. })
        ));
    }

    #[test]
    fn exact_level_option() {
        let g = build(4, &[(0, 1), (1, 2), (2, 3)]);
        let exact = LpOptions { exact_level: true };
        for seed in 0..20 {
            assert_eq!(choose_lp_target(&g, 0, 2, seed, exact).unwrap(), 2);
            let neg = choose_lp_candidate(&g, 0, 2, seed, false, exact).unwrap();
            assert!(neg == 1 || neg == 3);
        }
    }

    #[test]
    fn nc_only_one_per_node() {
        let g = labeled_path();
        let cfg = DatasetConfig {
            tasks: vec![Task::NodeClassification],
            prompt_ids: Some(vec!["1121".parse().unwrap()]),
            ..DatasetConfig::default()
        };
        let ds = build_dataset(&g, &cfg).unwrap();
        assert_eq!(ds.instances.len(), 3);
        assert_eq!(ds.stats.nc, 3);
    }

    #[test]
    fn config_errors() {
        let g = labeled_path();
        let cfg = DatasetConfig {
            tasks: vec![],
            ..DatasetConfig::default()
        };
        assert!(matches!(build_dataset(&g, &cfg), Err(Error::EmptyTasks)));
        let cfg = DatasetConfig {
            splits: vec![Split::Unassigned],
            ..DatasetConfig::default()
        };
        assert!(matches!(build_dataset(&g, &cfg), Err(Error::Config(_))));
        let cfg = DatasetConfig {
            cumulative_levels: true,
            ..DatasetConfig::default()
        };
        assert!(matches!(build_dataset(&g, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn jsonl_key_order() {
        let inst = Instance {
            prompt_id: "2111".parse().unwrap(),
            task: Task::LpDiscriminative,
            center: 3,
            input: "x".into(),
            target: "no".into(),
            hop: Some(1),
            candidate: Some(9),
            split: Split::Train,
        };
        let mut buf = Vec::new();
        write_jsonl(std::slice::from_ref(&inst), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"prompt_id\":\"2111\",\"task\":\"lp_disc\",\"center\":3,\"input\":\"x\",\"target\":\"no\",\"hop\":1,\"candidate\":9,\"split\":\"train\"}\n"
        );
        assert_eq!(read_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap(), vec![inst]);
    }
}
