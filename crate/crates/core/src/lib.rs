//! Verification pipeline for concept-feature norms.
//!
//! The library covers five stages:
//!
//! * [`dataset`] — concept/feature inventories, rater counts, and the
//!   human-coverage mask, with CSV ingestion and a canonical JSON dump.
//! * [`binary`] — 0/1 concept×feature matrices, threshold binarization
//!   of the human counts, and target/distractor labeling.
//! * [`probe`] — probe planning, prompt rendering, a yes/no oracle driver
//!   with a persistent answer cache, and assembly of the machine-verified
//!   matrix.
//! * [`detection`] — hit/miss/false-alarm/correct-rejection tallies, rate
//!   correction, the normal quantile, and d' scoring with a threshold
//!   sensitivity sweep.
//! * [`space`] — cosine-distance matrices over concepts and the combined
//!   human+machine matrix.
//! * [`triplet`] — triplet generation over category/domain conditions,
//!   choice prediction from a distance matrix, and agreement scoring
//!   against human votes.
//!
//! [`synth`] provides seeded generators for exercising the pipeline
//! without real norm data.

pub mod binary;
pub mod dataset;
pub mod detection;
pub mod probe;
pub mod space;
pub mod synth;
pub mod triplet;

pub use binary::{BinaryFeatureMatrix, CellLabel, CellLabelMatrix, Provenance};
pub use dataset::{Concept, ConceptId, Domain, Feature, FeatureId, NormDataset};
