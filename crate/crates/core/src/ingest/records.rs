use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::attributes::{flatten_features_counted, FlattenStats};
use super::IngestError;
use crate::FeatureSet;

/// One business from the business file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusinessRecord {
    pub business_id: String,
    pub name: String,
    pub overall_stars: f64,
    pub review_count: u64,
    pub raw_attributes: BTreeMap<String, String>,
    pub features: FeatureSet,
    pub is_restaurant: bool,
}

/// One review from the review file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub business_id: String,
    pub user_id: String,
    pub stars: u8,
    pub text: String,
    pub date: String,
}

/// Overall ratings run from 1.0 to 5.0 in half-star steps.
pub fn is_valid_overall_stars(stars: f64) -> bool {
    (1.0..=5.0).contains(&stars) && (stars * 2.0).fract() == 0.0
}

#[derive(Deserialize)]
struct RawBusiness {
    business_id: String,
    #[serde(default)]
    name: Option<String>,
    stars: f64,
    #[serde(default)]
    review_count: Option<u64>,
    #[serde(default)]
    attributes: Option<BTreeMap<String, Value>>,
    #[serde(default)]
    categories: Option<Value>,
}

#[derive(Deserialize)]
struct RawReview {
    #[serde(default)]
    review_id: Option<String>,
    business_id: String,
    #[serde(default)]
    user_id: Option<String>,
    stars: f64,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    date: Option<String>,
}

/// Line counters for one business-file pass.
///
/// `parsed + skipped_malformed + skipped_non_restaurant + skipped_duplicate == lines`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessCounters {
    pub lines: u64,
    pub parsed: u64,
    pub skipped_malformed: u64,
    pub skipped_non_restaurant: u64,
    pub skipped_duplicate: u64,
    pub ignored_attribute_names: u64,
    pub attribute_parse_fallbacks: u64,
}

/// Line counters for one review-file pass.
///
/// `parsed + skipped_malformed + skipped_bad_stars + skipped_unknown_business == lines`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewCounters {
    pub lines: u64,
    pub parsed: u64,
    pub skipped_malformed: u64,
    pub skipped_bad_stars: u64,
    pub skipped_unknown_business: u64,
    pub missing_text: u64,
}

/// Reads lines without holding more than one line in memory.
struct LineSource<R> {
    reader: R,
    buf: Vec<u8>,
    line: u64,
}

impl<R: BufRead> LineSource<R> {
    fn new(reader: R) -> Self {
        LineSource {
            reader,
            buf: Vec::new(),
            line: 0,
        }
    }

    /// Next line with the terminator stripped. Invalid UTF-8 yields `Some(None)`.
    fn next_line(&mut self) -> Option<Result<Option<&str>, IngestError>> {
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line += 1;
                let mut end = self.buf.len();
                while end > 0 && matches!(self.buf[end - 1], b'\n' | b'\r') {
                    end -= 1;
                }
                Some(Ok(std::str::from_utf8(&self.buf[..end]).ok()))
            }
            Err(source) => Some(Err(IngestError::Read {
                line: self.line + 1,
                source,
            })),
        }
    }
}

/// Streaming parser over a business file, one record per line.
///
/// Malformed lines are counted and skipped. By default only restaurants
/// are yielded; see [`BusinessReader::all_businesses`].
pub struct BusinessReader<R> {
    source: LineSource<R>,
    counters: BusinessCounters,
    restaurants_only: bool,
    seen: HashSet<String>,
}

impl<R: BufRead> BusinessReader<R> {
    pub fn new(reader: R) -> Self {
        BusinessReader {
            source: LineSource::new(reader),
            counters: BusinessCounters::default(),
            restaurants_only: true,
            seen: HashSet::new(),
        }
    }

    /// Yields non-restaurant businesses too, counting them as parsed.
    pub fn all_businesses(mut self) -> Self {
        self.restaurants_only = false;
        self
    }

    pub fn counters(&self) -> BusinessCounters {
        self.counters
    }
}

impl<R: BufRead> Iterator for BusinessReader<R> {
    type Item = Result<BusinessRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.source.next_line()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e)),
            };
            self.counters.lines += 1;
            let mut stats = FlattenStats::default();
            let Some(record) = line.and_then(|l| business_from_line(l, &mut stats)) else {
                self.counters.skipped_malformed += 1;
                continue;
            };
            if self.restaurants_only && !record.is_restaurant {
                self.counters.skipped_non_restaurant += 1;
                continue;
            }
            if !self.seen.insert(record.business_id.clone()) {
                self.counters.skipped_duplicate += 1;
                continue;
            }
            self.counters.ignored_attribute_names += stats.ignored_names;
            self.counters.attribute_parse_fallbacks += stats.parse_fallbacks;
            self.counters.parsed += 1;
            return Some(Ok(record));
        }
    }
}

fn business_from_line(line: &str, stats: &mut FlattenStats) -> Option<BusinessRecord> {
    let raw: RawBusiness = serde_json::from_str(line).ok()?;
    if raw.business_id.is_empty() || !is_valid_overall_stars(raw.stars) {
        return None;
    }
    let raw_attributes: BTreeMap<String, String> = raw
        .attributes
        .unwrap_or_default()
        .into_iter()
        .map(|(k, v)| (k, attribute_to_raw(&v)))
        .collect();
    let features = flatten_features_counted(&raw_attributes, stats);
    Some(BusinessRecord {
        business_id: raw.business_id,
        name: raw.name.unwrap_or_default(),
        overall_stars: raw.stars,
        review_count: raw.review_count.unwrap_or(0),
        raw_attributes,
        features,
        is_restaurant: raw.categories.as_ref().is_some_and(has_restaurant_category),
    })
}

/// Categories arrive as a comma-separated string (current dumps) or an array (older dumps).
fn has_restaurant_category(categories: &Value) -> bool {
    let is_match = |c: &str| c.trim().eq_ignore_ascii_case("restaurants");
    match categories {
        Value::String(s) => s.split(',').any(is_match),
        Value::Array(items) => items.iter().filter_map(Value::as_str).any(is_match),
        _ => false,
    }
}

/// Renders a JSON attribute value in the literal syntax the attribute parser reads.
fn attribute_to_raw(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => "None".to_string(),
        Value::Bool(true) => "True".to_string(),
        Value::Bool(false) => "False".to_string(),
        Value::Number(n) => n.to_string(),
        Value::Object(map) => {
            let inner: Vec<String> = map
                .iter()
                .map(|(k, v)| {
                    let rendered = match v {
                        Value::String(s) => quote(s),
                        other => attribute_to_raw(other),
                    };
                    format!("{}: {}", quote(k), rendered)
                })
                .collect();
            format!("{{{}}}", inner.join(", "))
        }
        Value::Array(_) => value.to_string(),
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
}

/// Streaming parser over a review file. Reviews whose business is not in
/// `known_business_ids` are dropped and counted.
pub struct ReviewReader<'a, R> {
    source: LineSource<R>,
    counters: ReviewCounters,
    known_business_ids: &'a HashSet<String>,
}

impl<'a, R: BufRead> ReviewReader<'a, R> {
    pub fn new(reader: R, known_business_ids: &'a HashSet<String>) -> Self {
        ReviewReader {
            source: LineSource::new(reader),
            counters: ReviewCounters::default(),
            known_business_ids,
        }
    }

    pub fn counters(&self) -> ReviewCounters {
        self.counters
    }
}

impl<R: BufRead> Iterator for ReviewReader<'_, R> {
    type Item = Result<ReviewRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.source.next_line()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e)),
            };
            self.counters.lines += 1;
            let Some(raw) = line.and_then(|l| serde_json::from_str::<RawReview>(l).ok()) else {
                self.counters.skipped_malformed += 1;
                continue;
            };
            if !(1.0..=5.0).contains(&raw.stars) || raw.stars.fract() != 0.0 {
                self.counters.skipped_bad_stars += 1;
                continue;
            }
            if !self.known_business_ids.contains(&raw.business_id) {
                self.counters.skipped_unknown_business += 1;
                continue;
            }
            if raw.text.is_none() {
                self.counters.missing_text += 1;
            }
            self.counters.parsed += 1;
            return Some(Ok(ReviewRecord {
                review_id: raw.review_id.unwrap_or_default(),
                business_id: raw.business_id,
                user_id: raw.user_id.unwrap_or_default(),
                stars: raw.stars as u8,
                text: raw.text.unwrap_or_default(),
                date: raw.date.unwrap_or_default(),
            }));
        }
    }
}
