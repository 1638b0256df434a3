//! Compile attributed graphs into natural-language instruction datasets.
//!
//! The pipeline: load a [`Graph`], pick a point in the prompt family
//! ([`PromptSpec`]), draw a budget-constrained [`NeighborhoodSample`],
//! render it with [`render_structure`], and wrap it into an [`Instance`]
//! with a task prefix and query. [`parse_structure`] inverts the rendering
//! so every emitted prompt can be checked against the graph it came from.

pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod instance;
pub mod parser;
pub mod prompt;
pub mod sampler;
pub mod seed;
pub mod tokens;
pub mod vocab;

pub use error::{Error, Result};
pub use eval::{accuracy, normalize_answer, oracle_classify, Metrics, OracleConfig, TrainLabels};
pub use graph::{Graph, LoadReport, Neighborhood, NodeId, PathSet, Split, SplitPolicy};
pub use instance::{build_dataset, DatasetConfig, Instance};
pub use parser::{parse_structure, verify_roundtrip, ParsedNeighborhood, RoundtripReport};
pub use prompt::{enumerate_family, render_structure, PromptId, PromptSpec, Task};
pub use sampler::{sample_neighborhood, NeighborhoodSample, SampleContext};
pub use tokens::TokenCounter;
pub use vocab::{build_vocab_manifest, VocabManifest};
