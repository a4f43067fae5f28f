//! Semantic topological mapping with an online relevance-weighted
//! categorizer for place recognition.

pub mod error;
pub mod export;
pub mod hexfloat;
pub mod ingest;
pub mod lhs;
pub mod metrics;
pub mod olarfdssom;
pub mod pipeline;
pub mod semmap;
pub mod snapshot;
pub mod synth;

pub use error::{Error, Result};
