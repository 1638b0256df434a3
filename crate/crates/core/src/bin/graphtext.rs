use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use graphtext::config::{write_atomic, ArtifactMeta, RunConfig};
use graphtext::eval::{oracle_predictions, read_predictions, write_predictions, OracleConfig, TrainLabels};
use graphtext::graph::{make_split, GraphFiles, LoadOptions};
use graphtext::instance::{read_jsonl, write_jsonl};
use graphtext::vocab::{build_vocab_manifest, write_vocab, DEFAULT_TOKEN_FORMAT};
use graphtext::{
    accuracy, build_dataset, render_structure, sample_neighborhood, verify_roundtrip, Error, Graph, NodeId,
    PromptId, Result, RoundtripReport, SampleContext, Split, SplitPolicy, Task, TokenCounter,
};

#[derive(Parser)]
#[command(name = "graphtext", version, about = "Compile attributed graphs into instruction datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// Directory with nodes.csv, edges.csv, features and optional splits.csv.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long)]
    directed: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        Ok(GraphFiles::in_dir(&self.dir)
            .load(LoadOptions {
                directed: self.directed,
            })?
            .0)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Output JSONL; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Token budget for the full input; 0 disables it.
    #[arg(long)]
    budget: Option<usize>,
    /// whitespace | chars:R | table:PATH
    #[arg(long)]
    counter: Option<String>,
    /// Comma-separated: nc, lp_gen, lp_disc.
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<Task>>,
    #[arg(long, value_delimiter = ',')]
    prompt_ids: Option<Vec<PromptId>>,
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<Split>>,
    #[arg(long)]
    max_hop: Option<u8>,
    #[arg(long, overrides_with = "no_features")]
    features: bool,
    #[arg(long)]
    no_features: bool,
    #[arg(long, overrides_with = "no_paths")]
    paths: bool,
    #[arg(long)]
    no_paths: bool,
    #[arg(long)]
    lp_mix: Option<f64>,
    #[arg(long)]
    neg_ratio: Option<f64>,
    #[arg(long)]
    lp_exact_level: bool,
    /// Restrict link prediction to the selected splits.
    #[arg(long)]
    lp_split_only: bool,
    #[arg(long)]
    cumulative_levels: bool,
    #[arg(long)]
    resample_epochs: Option<usize>,
}

impl BuildArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = &self.$field { c.$target = v.clone(); })*
            };
        }
        set!(seed => seed, workers => workers, budget => budget, counter => counter,
             tasks => tasks, prompt_ids => prompt_ids, splits => splits, max_hop => max_hop,
             lp_mix => lp_mix, neg_ratio => neg_ratio, resample_epochs => resample_epochs);
        if self.features || self.no_features {
            c.features = Some(self.features);
        }
        if self.paths || self.no_paths {
            c.paths = Some(self.paths);
        }
        c.lp_exact_level |= self.lp_exact_level;
        c.cumulative_levels |= self.cumulative_levels;
        if self.lp_split_only {
            c.lp_all_nodes = false;
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a graph directory and report what was loaded.
    Ingest {
        #[command(flatten)]
        graph: GraphArgs,
        /// Write the normalized graph to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree, class and split summary.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Assign train/val/test splits and write splits.csv.
    Split {
        #[command(flatten)]
        graph: GraphArgs,
        /// ratio:TRAIN,VAL,TEST or per-class:N[,VAL,TEST]
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to <dir>/splits.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a JSONL instruction dataset.
    Build(BuildArgs),
    /// Print the structure description for one node.
    Render {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        node: NodeId,
        #[arg(long)]
        prompt_id: PromptId,
        #[arg(long, default_value_t = 0)]
        budget: usize,
        #[arg(long, default_value = "whitespace")]
        counter: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render and parse every node under each prompt id and compare with the graph.
    VerifyRoundtrip {
        #[command(flatten)]
        graph: GraphArgs,
        /// Defaults to every node-classification id.
        #[arg(long, value_delimiter = ',')]
        prompt_ids: Option<Vec<PromptId>>,
        #[arg(long, default_value_t = 0)]
        budget: usize,
        #[arg(long, default_value = "whitespace")]
        counter: String,
        /// Print every case, not only failures.
        #[arg(long)]
        all: bool,
    },
    /// Write the node-token manifest and embedding matrix.
    Vocab {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = DEFAULT_TOKEN_FORMAT)]
        token_format: String,
    },
    /// Classify the dataset's classification instances by voting over the
    /// training labels named in each prompt, reading the prompt text only.
    Oracle {
        #[command(flatten)]
        graph: GraphArgs,
        /// Dataset JSONL produced by `build`.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-hop vote weights.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
        hop_weights: Vec<f64>,
    },
    /// Score predictions against a dataset.
    Eval {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn counter(spec: &str, budget: usize) -> Result<TokenCounter> {
    TokenCounter::parse(spec, if budget == 0 { usize::MAX } else { budget })
}

#[derive(Serialize)]
struct Stats {
    nodes: usize,
    edges: usize,
    directed: bool,
    feature_dim: usize,
    min_degree: usize,
    max_degree: usize,
    mean_degree: f64,
    isolated: usize,
    categories: Vec<(String, usize)>,
    unlabeled: usize,
    splits: Vec<(String, usize)>,
}

fn stats(g: &Graph) -> Stats {
    let degrees: Vec<usize> = (0..g.num_nodes()).map(|v| g.degree(v)).collect();
    let mut per_class = vec![0usize; g.categories().len()];
    for l in g.labels().iter().flatten() {
        per_class[*l] += 1;
    }
    Stats {
        nodes: g.num_nodes(),
        edges: g.num_edges(),
        directed: g.is_directed(),
        feature_dim: g.feature_dim(),
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        mean_degree: degrees.iter().sum::<usize>() as f64 / g.num_nodes().max(1) as f64,
        isolated: degrees.iter().filter(|&&d| d == 0).count(),
        categories: g.categories().iter().cloned().zip(per_class).collect(),
        unlabeled: g.labels().iter().filter(|l| l.is_none()).count(),
        splits: Split::ALL
            .iter()
            .map(|s| (s.to_string(), g.splits().iter().filter(|x| *x == s).count()))
            .collect(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { graph, out } => {
            let (g, report) = GraphFiles::in_dir(&graph.dir).load(LoadOptions {
                directed: graph.directed,
            })?;
            if let Some(out) = out {
                g.save_dir(out)?;
            }
            print_json(&report)
        }
        Command::Stats { graph } => print_json(&stats(&graph.load()?)),
        Command::Split {
            graph,
            policy,
            seed,
            out,
        } => {
            let g = make_split(&graph.load()?, &SplitPolicy::parse(&policy)?, seed)?;
            g.save_splits(out.unwrap_or_else(|| graph.dir.join("splits.csv")))?;
            print_json(&stats(&g).splits)
        }
        Command::Build(args) => {
            let g = args.graph.load()?;
            let rc = args.run_config()?;
            let ds = build_dataset(&g, &rc.dataset_config()?)?;
            let mut buf = Vec::new();
            write_jsonl(&ds.instances, &mut buf)?;
            write_atomic(&args.out, &buf)?;
            let meta = ArtifactMeta::new(&rc, ds.instances.len(), ds.stats);
            meta.write(&args.out)?;
            print_json(&meta)
        }
        Command::Render {
            graph,
            node,
            prompt_id,
            budget,
            counter: spec,
            seed,
        } => {
            let g = graph.load()?;
            let spec_ = prompt_id.decode()?;
            let c = counter(&spec, budget)?;
            let sample = sample_neighborhood(&g, node, &spec_, &c, seed, &SampleContext::default())?;
            println!("{}", render_structure(&g, &sample, &spec_)?.text);
            Ok(())
        }
        Command::VerifyRoundtrip {
            graph,
            prompt_ids,
            budget,
            counter: spec,
            all,
        } => {
            let g = graph.load()?;
            let c = counter(&spec, budget)?;
            let specs = match prompt_ids {
                Some(ids) => ids.iter().map(|id| id.decode()).collect::<Result<Vec<_>>>()?,
                None => graphtext::enumerate_family(&[Task::NodeClassification])?,
            };
            let mut report = RoundtripReport::default();
            for spec in &specs {
                for v in 0..g.num_nodes() {
                    report.push(verify_roundtrip(&g, v, spec, &c));
                }
            }
            if !all {
                report.cases.retain(|c| !c.ok);
            }
            print_json(&report)?;
            if report.all_ok() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{} of {} round-trip cases failed",
                    report.total - report.passed,
                    report.total
                )))
            }
        }
        Command::Vocab {
            graph,
            out,
            token_format,
        } => {
            let g = graph.load()?;
            let manifest = build_vocab_manifest(&g, &token_format)?;
            write_vocab(&g, &manifest, &out)?;
            println!("{} tokens, dim {}", manifest.tokens.len(), manifest.embedding_dim);
            Ok(())
        }
        Command::Oracle {
            graph,
            dataset,
            out,
            hop_weights,
        } => {
            let g = graph.load()?;
            let cfg = OracleConfig {
                hop_weights,
                ..OracleConfig::default()
            };
            let instances = read_jsonl(&read(&dataset)?)?;
            let preds = oracle_predictions(&instances, &TrainLabels::from_graph(&g)?, &cfg)?;
            let mut buf = Vec::new();
            write_predictions(&preds, &mut buf)?;
            write_atomic(&out, &buf)?;
            println!("{} predictions", preds.len());
            Ok(())
        }
        Command::Eval {
            graph,
            gold,
            predictions,
        } => {
            let g = graph.load()?;
            let gold = read_jsonl(&read(&gold)?)?;
            let preds = read_predictions(&read(&predictions)?)?;
            print_json(&accuracy(&preds, &gold, g.categories())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
