//! Python bindings for the graphtext core.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use graphtext::config::RunConfig;
use graphtext::eval::read_predictions;
use graphtext::graph::{make_split, GraphFiles, GraphParts, LoadOptions};
use graphtext::instance::read_jsonl;
use graphtext::{NodeId, SampleContext, Split, SplitPolicy, TokenCounter};

fn err(e: graphtext::Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: graphtext::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (num_nodes, edges, labels=None, categories=None, texts=None, directed=false))]
    fn new(
        num_nodes: usize,
        edges: Vec<(NodeId, NodeId)>,
        labels: Option<Vec<Option<usize>>>,
        categories: Option<Vec<String>>,
        texts: Option<Vec<Option<String>>>,
        directed: bool,
    ) -> PyResult<Self> {
        let parts = GraphParts {
            num_nodes,
            directed,
            edges: edges.into_iter().map(|(u, v)| (u, v, None)).collect(),
            features: vec![0.0; num_nodes],
            dim: 1,
            texts: texts.unwrap_or_default(),
            labels: labels.unwrap_or_default(),
            categories: categories.unwrap_or_default(),
            splits: Vec::new(),
        };
        let (inner, _) = graphtext::Graph::from_parts(parts).map_err(err)?;
        Ok(PyGraph { inner })
    }

    /// Loads `nodes.csv`, `edges.csv`, features and optional splits from `dir`.
    #[staticmethod]
    #[pyo3(signature = (dir, directed=false))]
    fn load(dir: &str, directed: bool) -> PyResult<Self> {
        let (inner, _) = GraphFiles::in_dir(dir)
            .load(LoadOptions { directed })
            .map_err(err)?;
        Ok(PyGraph { inner })
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn categories(&self) -> Vec<String> {
        self.inner.categories().to_vec()
    }

    fn split(&self, v: NodeId) -> PyResult<String> {
        self.inner.check_node(v).map_err(err)?;
        Ok(self.inner.split(v).to_string())
    }

    /// Returns a copy with splits assigned by `policy` ("ratio:a,b,c" or
    /// "per-class:n[,val,test]").
    #[pyo3(signature = (policy, seed=0))]
    fn with_split(&self, policy: &str, seed: u64) -> PyResult<Self> {
        let policy = SplitPolicy::parse(policy).map_err(err)?;
        let inner = make_split(&self.inner, &policy, seed).map_err(err)?;
        Ok(PyGraph { inner })
    }

    /// Exact-distance levels `[L1, ..., Lhops]`.
    fn khop(&self, v: NodeId, hops: usize) -> PyResult<Vec<Vec<NodeId>>> {
        Ok(self.inner.khop_neighbors(v, hops).map_err(err)?.levels)
    }

    /// Simple paths from `v` to level `hop` and whether the list was cut.
    #[pyo3(signature = (v, hop, limit=1000))]
    fn paths(&self, v: NodeId, hop: usize, limit: usize) -> PyResult<(Vec<Vec<NodeId>>, bool)> {
        let p = self.inner.paths_to_level(v, hop, limit).map_err(err)?;
        Ok((p.paths, p.truncated))
    }
}

#[pyclass(name = "PromptSpec", frozen)]
struct PyPromptSpec {
    inner: graphtext::PromptSpec,
}

#[pymethods]
impl PyPromptSpec {
    #[new]
    fn new(task: &str, use_features: bool, max_hop: u8, include_paths: bool) -> PyResult<Self> {
        let task = task.parse().map_err(err)?;
        let inner = graphtext::PromptSpec::new(task, use_features, max_hop, include_paths).map_err(err)?;
        Ok(PyPromptSpec { inner })
    }

    #[staticmethod]
    fn from_id(id: &str) -> PyResult<Self> {
        let id: graphtext::PromptId = id.parse().map_err(err)?;
        Ok(PyPromptSpec {
            inner: id.decode().map_err(err)?,
        })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id().to_string()
    }

    #[getter]
    fn task(&self) -> &'static str {
        self.inner.task.as_str()
    }

    #[getter]
    fn max_hop(&self) -> u8 {
        self.inner.max_hop
    }

    #[getter]
    fn use_features(&self) -> bool {
        self.inner.use_features
    }

    #[getter]
    fn include_paths(&self) -> bool {
        self.inner.include_paths
    }

    fn __repr__(&self) -> String {
        format!("PromptSpec({})", self.inner.id())
    }
}

/// Every spec of the family for the given tasks.
#[pyfunction]
#[pyo3(signature = (tasks=vec!["nc".to_string()]))]
fn prompt_family(tasks: Vec<String>) -> PyResult<Vec<String>> {
    let tasks = tasks
        .iter()
        .map(|t| t.parse())
        .collect::<graphtext::Result<Vec<graphtext::Task>>>()
        .map_err(err)?;
    let family = graphtext::enumerate_family(&tasks).map_err(err)?;
    Ok(family.iter().map(|s| s.id().to_string()).collect())
}

fn counter_for(counter: &str, budget: Option<usize>) -> PyResult<TokenCounter> {
    TokenCounter::parse(counter, budget.unwrap_or(usize::MAX)).map_err(err)
}

/// Samples `v`'s neighborhood under the budget and renders it.
#[pyfunction]
#[pyo3(signature = (graph, v, prompt_id, budget=None, counter="whitespace", seed=0))]
fn render(
    graph: &PyGraph,
    v: NodeId,
    prompt_id: &str,
    budget: Option<usize>,
    counter: &str,
    seed: u64,
) -> PyResult<String> {
    let id: graphtext::PromptId = prompt_id.parse().map_err(err)?;
    let spec = id.decode().map_err(err)?;
    let counter = counter_for(counter, budget)?;
    let sample = graphtext::sample_neighborhood(&graph.inner, v, &spec, &counter, seed, &SampleContext::default())
        .map_err(err)?;
    Ok(graphtext::render_structure(&graph.inner, &sample, &spec)
        .map_err(err)?
        .text)
}

/// Parses a structure description into `{center, levels, node_features}`.
#[pyfunction]
fn parse<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let parsed = graphtext::parse_structure(text).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("center", parsed.center)?;
    out.set_item("levels", parsed.trimmed_levels().to_vec())?;
    out.set_item("node_features", parsed.node_features.clone())?;
    Ok(out)
}

/// Renders, parses and compares against the graph; returns the mismatch
/// description or `None`.
#[pyfunction]
#[pyo3(signature = (graph, v, prompt_id, budget=None))]
fn verify_roundtrip(graph: &PyGraph, v: NodeId, prompt_id: &str, budget: Option<usize>) -> PyResult<Option<String>> {
    let id: graphtext::PromptId = prompt_id.parse().map_err(err)?;
    let spec = id.decode().map_err(err)?;
    let report = graphtext::verify_roundtrip(&graph.inner, v, &spec, &counter_for("whitespace", budget)?);
    Ok(report.diff)
}

#[pyfunction]
#[pyo3(signature = (text, counter="whitespace"))]
fn count_tokens(text: &str, counter: &str) -> PyResult<usize> {
    Ok(counter_for(counter, None)?.count(text))
}

/// Builds a dataset from a TOML run configuration; returns a list of dicts.
#[pyfunction]
#[pyo3(signature = (graph, config=""))]
fn build_dataset<'py>(py: Python<'py>, graph: &PyGraph, config: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = RunConfig::parse(config)
        .and_then(|c| c.dataset_config())
        .map_err(err)?;
    let ds = py
        .detach(|| graphtext::build_dataset(&graph.inner, &cfg))
        .map_err(err)?;
    ds.instances
        .iter()
        .map(|inst| {
            let d = PyDict::new(py);
            d.set_item("prompt_id", inst.prompt_id.to_string())?;
            d.set_item("task", inst.task.as_str())?;
            d.set_item("center", inst.center)?;
            d.set_item("input", &inst.input)?;
            d.set_item("target", &inst.target)?;
            d.set_item("hop", inst.hop)?;
            d.set_item("candidate", inst.candidate)?;
            d.set_item("split", inst.split.as_str())?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn normalize_answer(raw: &str, categories: Vec<String>) -> Option<usize> {
    graphtext::normalize_answer(raw, &categories)
}

/// Accuracy of JSONL predictions against a JSONL dataset:
/// `(accuracy, n, unmatched_count)`.
#[pyfunction]
fn accuracy(predictions_jsonl: &str, gold_jsonl: &str, categories: Vec<String>) -> PyResult<(f64, usize, usize)> {
    let gold = read_jsonl(gold_jsonl).map_err(err)?;
    let preds = read_predictions(predictions_jsonl).map_err(err)?;
    let m = graphtext::accuracy(&preds, &gold, &categories).map_err(err)?;
    Ok((m.accuracy, m.n, m.unmatched_count))
}

#[pymodule]
fn pygraphtext(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPromptSpec>()?;
    m.add_function(wrap_pyfunction!(prompt_family, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(verify_roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(count_tokens, m)?)?;
    m.add_function(wrap_pyfunction!(build_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_answer, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add("SPLITS", Split::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
    Ok(())
}
