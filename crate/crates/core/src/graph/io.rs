//! On-disk graph tables.
//!
//! A graph directory holds `nodes.csv` (`id,label,text`), `edges.csv`
//! (`src,dst[,text]`), `features.glmf` or `features.csv`, an optional
//! `categories.txt` (one name per line, line index = category id) and an
//! optional `splits.csv` (`id,split`).

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{Graph, GraphParts, LoadReport, NodeId, Split};
use crate::error::{Error, Result};

const GLMF_MAGIC: &[u8; 4] = b"GLMF";

#[derive(Debug, Clone)]
pub struct GraphFiles {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub features: PathBuf,
    pub categories: Option<PathBuf>,
    pub splits: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub directed: bool,
}

impl GraphFiles {
    /// Standard file names inside `dir`; optional files only if present.
    pub fn in_dir(dir: impl AsRef<Path>) -> GraphFiles {
        let dir = dir.as_ref();
        let glmf = dir.join("features.glmf");
        let features = if glmf.exists() {
            glmf
        } else {
            dir.join("features.csv")
        };
        let optional = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        GraphFiles {
            nodes: dir.join("nodes.csv"),
            edges: dir.join("edges.csv"),
            features,
            categories: optional("categories.txt"),
            splits: optional("splits.csv"),
        }
    }

    pub fn load(&self, options: LoadOptions) -> Result<(Graph, LoadReport)> {
        let categories = match &self.categories {
            Some(p) => read_categories(p)?,
            None => Vec::new(),
        };
        let (num_nodes, labels, texts) = read_nodes(&self.nodes, &categories)?;
        let edges = read_edges(&self.edges, num_nodes)?;
        let (rows, dim, features) = read_features(&self.features)?;
        if rows != num_nodes {
            return Err(Error::DimensionMismatch(format!(
                "{}: {rows} feature rows for {num_nodes} nodes",
                self.features.display()
            )));
        }
        let splits = match &self.splits {
            Some(p) => read_splits(p, num_nodes)?,
            None => Vec::new(),
        };
        Graph::from_parts(GraphParts {
            num_nodes,
            directed: options.directed,
            edges,
            features,
            dim,
            texts,
            labels,
            categories,
            splits,
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(open(path)?))
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

fn parse_id(path: &Path, line: u64, field: &str) -> Result<NodeId> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid node id {field:?}")))
}

pub(crate) fn read_categories(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

type NodeTable = (usize, Vec<Option<usize>>, Vec<Option<String>>);

fn read_nodes(path: &Path, categories: &[String]) -> Result<NodeTable> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id").ok_or_else(|| parse_err(path, 1, "missing `id` column"))?;
    let label_col = col("label");
    let text_col = col("text");
    let by_name: HashMap<&str, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut rows: Vec<(NodeId, Option<usize>, Option<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = parse_id(path, line, record.get(id_col).unwrap_or(""))?;
        let label = match label_col.and_then(|c| record.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(name) => Some(
                *by_name
                    .get(name)
                    .ok_or_else(|| Error::UnknownCategory(name.to_string()))?,
            ),
        };
        let text = text_col
            .and_then(|c| record.get(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string);
        rows.push((id, label, text));
    }

    let n = rows.len();
    let mut labels = vec![None; n];
    let mut texts = vec![None; n];
    let mut seen = vec![false; n];
    for (i, (id, label, text)) in rows.into_iter().enumerate() {
        if id >= n || seen[id] {
            return Err(parse_err(
                path,
                i as u64 + 2,
                format!("node ids must be unique and cover 0..{n}, got {id}"),
            ));
        }
        seen[id] = true;
        labels[id] = label;
        texts[id] = text;
    }
    Ok((n, labels, texts))
}

fn read_edges(path: &Path, num_nodes: usize) -> Result<Vec<(NodeId, NodeId, Option<String>)>> {
    let mut reader = csv_reader(path)?;
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() < 2 {
            return Err(parse_err(path, line, "expected `src,dst`"));
        }
        let src = parse_id(path, line, &record[0])?;
        let dst = parse_id(path, line, &record[1])?;
        for node in [src, dst] {
            if node >= num_nodes {
                return Err(Error::UnknownNode(format!(
                    "{node} ({}:{line})",
                    path.display()
                )));
            }
        }
        let text = record
            .get(2)
            .filter(|t| !t.is_empty())
            .map(str::to_string);
        edges.push((src, dst, text));
    }
    Ok(edges)
}

fn read_splits(path: &Path, num_nodes: usize) -> Result<Vec<Split>> {
    let mut reader = csv_reader(path)?;
    let mut splits = vec![Split::Unassigned; num_nodes];
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() < 2 {
            return Err(parse_err(path, line, "expected `id,split`"));
        }
        let id = parse_id(path, line, &record[0])?;
        if id >= num_nodes {
            return Err(Error::UnknownNode(format!("{id} ({}:{line})", path.display())));
        }
        splits[id] = record[1]
            .parse()
            .map_err(|e: Error| parse_err(path, line, e.to_string()))?;
    }
    Ok(splits)
}

/// Returns `(rows, dim, values)`. Dispatches on the GLMF magic.
pub(crate) fn read_features(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let mut head = [0u8; 4];
    let is_glmf = {
        let mut f = open(path)?;
        f.read(&mut head).map_err(|e| Error::io(path, e))? == 4 && &head == GLMF_MAGIC
    };
    if is_glmf {
        return read_glmf(path);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut rows = 0;
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let v: f32 = field.trim().parse().map_err(|_| {
                parse_err(path, i as u64 + 1, format!("invalid number {field:?}"))
            })?;
            values.push(v);
        }
        let width = values.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::DimensionMismatch(format!(
                    "{}:{}: row has {width} values, expected {d}",
                    path.display(),
                    i + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    Ok((rows, dim.unwrap_or(0), values))
}

/// Reads a GLMF matrix: magic, u32 LE rows, u32 LE cols, f32 LE row-major.
pub fn read_glmf(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f32>)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    BufReader::new(open(path)?)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != GLMF_MAGIC {
        return Err(parse_err(path, 0, "missing GLMF header"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != rows * cols * 4 {
        return Err(Error::DimensionMismatch(format!(
            "{}: header says {rows}x{cols} but body holds {} bytes",
            path.display(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

pub fn write_glmf(path: impl AsRef<Path>, rows: usize, cols: usize, values: &[f32]) -> Result<()> {
    let path = path.as_ref();
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {rows}x{cols} matrix",
            values.len()
        )));
    }
    let too_big = |n: usize| u32::try_from(n).map_err(|_| Error::Config(format!("{n} exceeds u32")));
    let mut buf = Vec::with_capacity(12 + values.len() * 4);
    buf.extend_from_slice(GLMF_MAGIC);
    buf.extend_from_slice(&too_big(rows)?.to_le_bytes());
    buf.extend_from_slice(&too_big(cols)?.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    crate::config::write_atomic(path, &buf)
}

impl Graph {
    /// Writes the graph as a directory in the layout [`GraphFiles::in_dir`] reads.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut nodes = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(e.to_string());
        nodes.write_record(["id", "label", "text"]).map_err(io)?;
        for v in 0..self.num_nodes() {
            let label = self.label(v).map(|l| self.categories()[l].as_str());
            nodes
                .write_record([
                    v.to_string().as_str(),
                    label.unwrap_or(""),
                    self.text(v).unwrap_or(""),
                ])
                .map_err(io)?;
        }
        crate::config::write_atomic(dir.join("nodes.csv"), &nodes.into_inner().unwrap())?;

        let mut edges = csv::Writer::from_writer(Vec::new());
        let with_text = self.has_edge_texts();
        if with_text {
            edges.write_record(["src", "dst", "text"]).map_err(io)?;
        } else {
            edges.write_record(["src", "dst"]).map_err(io)?;
        }
        for &(u, v) in self.edges() {
            let (a, b) = (u.to_string(), v.to_string());
            if with_text {
                edges
                    .write_record([a.as_str(), b.as_str(), self.edge_text(u, v).unwrap_or("")])
                    .map_err(io)?;
            } else {
                edges.write_record([a.as_str(), b.as_str()]).map_err(io)?;
            }
        }
        crate::config::write_atomic(dir.join("edges.csv"), &edges.into_inner().unwrap())?;

        let stale_csv = dir.join("features.csv");
        if stale_csv.exists() {
            fs::remove_file(&stale_csv).map_err(|e| Error::io(&stale_csv, e))?;
        }
        write_glmf(
            dir.join("features.glmf"),
            self.num_nodes(),
            self.feature_dim(),
            self.features(),
        )?;

        let mut cats = String::new();
        for c in self.categories() {
            cats.push_str(c);
            cats.push('\n');
        }
        crate::config::write_atomic(dir.join("categories.txt"), cats.as_bytes())?;
        self.save_splits(dir.join("splits.csv"))
    }

    pub fn save_splits(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(Vec::new());
        writeln!(out, "id,split").unwrap();
        for (v, s) in self.splits().iter().enumerate() {
            writeln!(out, "{v},{s}").unwrap();
        }
        crate::config::write_atomic(path, &out.into_inner().unwrap())
    }
}
