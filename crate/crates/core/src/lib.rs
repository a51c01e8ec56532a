//! Restaurant rating disparity analysis.
//!
//! The pipeline ingests Yelp-format JSON-lines dumps, flattens business
//! attributes into canonical feature flags, ranks restaurants by feature
//! count, builds per-star TF-IDF topic profiles scored against a valence
//! lexicon, and compares pairs of restaurants on weighted feature deficiency
//! and per-star sentiment.

pub mod cli;
pub mod disparity;
pub mod ingest;
pub mod taxonomy;
pub mod text;
pub mod weight;
pub mod workspace;

pub use disparity::{compare_features, sentiment_delta, verdict, DisparityReport, Verdict};
pub use ingest::{
    flatten_features, normalize_flag, parse_attribute_value, AttributeValue, BusinessReader,
    BusinessRecord, Presence, ReviewReader, ReviewRecord,
};
pub use taxonomy::{FeatureTaxonomy, RankedEntry, RankedList};
pub use text::{
    cohort_scores, sentiment_score, tfidf, tokenize, top_terms, CohortScores, CorpusStats,
    SentimentLexicon, StarDocument, TopicProfile,
};
pub use weight::Weight;

/// Canonical feature names, sorted alphabetically.
pub type FeatureSet = std::collections::BTreeSet<String>;
