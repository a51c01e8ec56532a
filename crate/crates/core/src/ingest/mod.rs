//! Streaming ingestion of Yelp-format JSON-lines files.

mod attributes;
mod records;

pub use attributes::{
    flatten_features, flatten_features_counted, normalize_flag, parse_attribute_value,
    try_parse_attribute_value, AttributeValue, FlattenStats, Presence, GROUPED_ATTRIBUTES,
    MAX_MAP_DEPTH,
};
pub use records::{
    is_valid_overall_stars, BusinessCounters, BusinessReader, BusinessRecord, ReviewCounters,
    ReviewReader, ReviewRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input at line {line}: {source}")]
    Read {
        line: u64,
        #[source]
        source: std::io::Error,
    },
}
