//! Node-token vocabulary extension: one new token per node, initialised
//! from the node's feature row through a trainable projection.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::write_atomic;
use crate::error::{Error, Result};
use crate::graph::{write_glmf, Graph, NodeId};

pub const DEFAULT_TOKEN_FORMAT: &str = "<node_{id}>";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EMBEDDING_FILE: &str = "embeddings.glmf";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub input_dim: usize,
    /// Symbolic: resolved against the target model's hidden size.
    pub output_dim: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub trainable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabManifest {
    pub tokens: Vec<String>,
    pub node_ids: Vec<NodeId>,
    pub embedding_dim: usize,
    pub embedding_file: String,
    pub projection: Projection,
}

pub fn build_vocab_manifest(g: &Graph, token_format: &str) -> Result<VocabManifest> {
    if !token_format.contains("{id}") {
        return Err(Error::MissingPlaceholder(token_format.to_string()));
    }
    let node_ids: Vec<NodeId> = (0..g.num_nodes()).collect();
    Ok(VocabManifest {
        tokens: node_ids
            .iter()
            .map(|id| token_format.replace("{id}", &id.to_string()))
            .collect(),
        node_ids,
        embedding_dim: g.feature_dim(),
        embedding_file: EMBEDDING_FILE.to_string(),
        projection: Projection {
            input_dim: g.feature_dim(),
            output_dim: "model_dim".to_string(),
            kind: "mlp".to_string(),
            trainable: true,
        },
    })
}

/// Writes `manifest.json` and the embedding matrix (row i = feature row of
/// `node_ids[i]`) into `dir`.
pub fn write_vocab(g: &Graph, manifest: &VocabManifest, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::with_capacity(manifest.node_ids.len() * manifest.embedding_dim);
    for &id in &manifest.node_ids {
        g.check_node(id)?;
        rows.extend_from_slice(g.feature_row(id));
    }
    write_glmf(
        dir.join(&manifest.embedding_file),
        manifest.node_ids.len(),
        manifest.embedding_dim,
        &rows,
    )?;
    let mut json = serde_json::to_vec_pretty(manifest)?;
    json.push(b'\n');
    write_atomic(dir.join(MANIFEST_FILE), &json)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<VocabManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
