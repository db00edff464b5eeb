//! Source-reliability signals from collaborative-wiki edit histories.
//!
//! The pipeline reads revision corpora, turns citations into domain-level
//! add/remove events, builds per-domain features, and trains a weighted
//! boosted-stump classifier against community reliability labels.

pub mod boost;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod extractor;
pub mod features;
#[cfg(feature = "fetch")]
pub mod fetch;
pub mod labels;
pub mod pipeline;
pub mod synth;
pub mod timeline;
