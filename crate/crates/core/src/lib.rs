//! Multi-label sentiment analysis of newspaper coverage.
//!
//! The pipeline ingests an article dump ([`corpus`]), cleans and tokenises
//! text ([`textprep`]), counts n-grams ([`ngram`]), fine-tunes a transformer
//! encoder on labelled tweets ([`senwave`], [`model`]), scores it
//! ([`metrics`]) and aggregates article predictions into polarity, quarterly
//! and co-occurrence tables ([`analytics`]) that [`report`] renders.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod labels;
pub mod metrics;
pub mod model;
pub mod ngram;
pub mod prediction;
pub mod report;
pub mod senwave;
pub mod synth;
pub mod textprep;

pub use error::{Error, ErrorCategory, Result};
pub use labels::{LabelVector, ScoreVector, SentimentLabel, NUM_LABELS};
pub use prediction::Prediction;
