//! Geometric-transformation embeddings of syntactic dependency graphs.
//!
//! Words are entities and dependency labels (plus their inverses) are
//! relations. [`ingest`] turns parsed corpora into `(head, relation, tail)`
//! triples, [`models`] scores triples with DM, MuRE, RotE, RefE or AttE,
//! [`trainer`] fits them with negative sampling, [`compose`] builds phrase
//! vectors, and [`eval`] measures word similarity, phrase similarity and
//! link prediction.

mod binfmt;
pub mod checkpoint;
pub mod compose;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod ingest;
pub mod models;
pub mod rng;
pub mod trainer;
pub mod triple;
pub mod vocab;

pub use checkpoint::Checkpoint;
pub use compose::{PhraseAnalysis, PhraseType, RelationMapping, Strategy};
pub use error::{Error, Result};
pub use ingest::{DependencyArc, NegTable, TripleDataset};
pub use models::{count_params, ModelParams};
pub use rng::Rng;
pub use trainer::{train, LossMode, Optimizer, TrainConfig, TrainMetrics};
pub use triple::{ModelKind, Triple};
pub use vocab::{RelationVocab, Vocab};
