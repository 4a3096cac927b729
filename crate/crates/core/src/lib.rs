//! Democratic co-training for hierarchical offensive-language labeling.
//!
//! A small gold seed set trains a diverse ensemble ([`models`]); the ensemble
//! scores an unlabeled corpus ([`corpus`]) through a three-level cascade
//! ([`cotrain`]) whose per-level aggregate confidences are then curated into
//! training material ([`select`]) and evaluated ([`eval`]).

pub mod corpus;
pub mod cotrain;
pub mod error;
pub mod eval;
pub mod label;
pub mod models;
pub mod select;

pub use error::{Error, Result};
pub use label::{ClassLabel, HierLabel, Level};

/// Default seed used by every seeded operation (size of the OLID training set).
pub const DEFAULT_SEED: u64 = 13241;
