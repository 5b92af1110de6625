//! Corpus-to-influence-graph analytics for verse corpora.
//!
//! The pipeline runs in stages: ingest a poet corpus, normalize and filter
//! it, extract numeric features (embeddings, stylistic statistics, TF-IDF,
//! meter profiles), compute five poet-by-poet similarity matrices, fuse them
//! into a single weighted undirected influence graph, and analyze that graph
//! (five centrality measures, Louvain communities, structural statistics).
//!
//! Everything is deterministic: identical inputs, configuration, and seed
//! produce bitwise-identical outputs.

pub mod community;
pub mod corpus;
pub mod features;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod similarity;
pub mod util;

pub use corpus::{Corpus, PoemRecord, PoetRecord};
pub use graph::InfluenceGraph;
pub use pipeline::{NetworkReport, PipelineConfig};
pub use similarity::SimilarityMatrix;
