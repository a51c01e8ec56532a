//! Parsing of Yelp attribute values and flattening into canonical features.
//!
//! Yelp stores attribute values as strings holding Python literals:
//! `"True"`, `"u'free'"`, `"2"`, or for grouped attributes a dict such as
//! `"{'garage': False, 'lot': True}"`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::taxonomy::is_universe_feature;
use crate::FeatureSet;

/// Maximum number of nested map levels accepted by the literal parser.
pub const MAX_MAP_DEPTH: usize = 2;

/// Attributes whose value is a map of canonical sub-features.
pub const GROUPED_ATTRIBUTES: [&str; 3] = ["businessparking", "goodformeal", "ambience"];

/// Attributes with an enumerated value set, present unless the value says otherwise.
const ENUMERATED_ATTRIBUTES: [&str; 4] = ["wifi", "alcohol", "noiselevel", "restaurantsattire"];

const PRICE_RANGE_ATTRIBUTE: &str = "restaurantspricerange2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Bool(bool),
    Int(i64),
    Str(String),
    Map(BTreeMap<String, AttributeValue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presence {
    Present,
    Absent,
}

impl Presence {
    pub fn is_present(self) -> bool {
        self == Presence::Present
    }

    fn from_bool(present: bool) -> Self {
        if present {
            Presence::Present
        } else {
            Presence::Absent
        }
    }
}

/// Parses a raw attribute string. Anything that is not a recognizable
/// literal comes back as an opaque string token holding the trimmed input.
pub fn parse_attribute_value(raw: &str) -> AttributeValue {
    try_parse_attribute_value(raw).unwrap_or_else(|| AttributeValue::Str(raw.trim().to_string()))
}

/// Like [`parse_attribute_value`] but reports unrecognizable input as `None`.
pub fn try_parse_attribute_value(raw: &str) -> Option<AttributeValue> {
    let mut parser = LiteralParser {
        input: raw.as_bytes(),
        pos: 0,
    };
    let value = parser.value(0)?;
    parser.skip_ws();
    if parser.pos == parser.input.len() {
        Some(value)
    } else {
        None
    }
}

struct LiteralParser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl LiteralParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn value(&mut self, depth: usize) -> Option<AttributeValue> {
        self.skip_ws();
        match self.peek()? {
            b'{' => self.map(depth + 1),
            b'\'' | b'"' => self.quoted().map(AttributeValue::Str),
            b'u' | b'U' if matches!(self.input.get(self.pos + 1), Some(b'\'' | b'"')) => {
                self.pos += 1;
                self.quoted().map(AttributeValue::Str)
            }
            _ => {
                let token = self.bare_token();
                match token {
                    "True" => Some(AttributeValue::Bool(true)),
                    "False" => Some(AttributeValue::Bool(false)),
                    "None" => Some(AttributeValue::Str("None".to_string())),
                    _ => token.parse::<i64>().ok().map(AttributeValue::Int),
                }
            }
        }
    }

    fn bare_token(&mut self) -> &str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'+')
        {
            self.pos += 1;
        }
        // Only ASCII bytes were consumed.
        std::str::from_utf8(&self.input[start..self.pos]).unwrap_or("")
    }

    fn quoted(&mut self) -> Option<String> {
        let quote = self.peek()?;
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            let b = self.peek()?;
            self.pos += 1;
            match b {
                b'\\' => {
                    out.push(self.peek()?);
                    self.pos += 1;
                }
                _ if b == quote => break,
                _ => out.push(b),
            }
        }
        String::from_utf8(out).ok()
    }

    fn map(&mut self, depth: usize) -> Option<AttributeValue> {
        if depth > MAX_MAP_DEPTH {
            return None;
        }
        self.pos += 1;
        let mut entries = BTreeMap::new();
        loop {
            self.skip_ws();
            if self.peek()? == b'}' {
                self.pos += 1;
                return Some(AttributeValue::Map(entries));
            }
            let key = match self.peek()? {
                b'\'' | b'"' => self.quoted()?,
                _ => {
                    let token = self.bare_token();
                    if token.is_empty() {
                        return None;
                    }
                    token.to_string()
                }
            };
            self.skip_ws();
            if self.peek()? != b':' {
                return None;
            }
            self.pos += 1;
            let value = self.value(depth)?;
            entries.insert(key, value);
            self.skip_ws();
            match self.peek()? {
                b',' => self.pos += 1,
                b'}' => {}
                _ => return None,
            }
        }
    }
}

/// Decides whether a leaf attribute value marks its feature as offered.
pub fn normalize_flag(value: &AttributeValue, attribute_name: &str) -> Presence {
    let name = attribute_name.to_ascii_lowercase();
    let present = match value {
        AttributeValue::Bool(b) => *b,
        AttributeValue::Int(i) if name == PRICE_RANGE_ATTRIBUTE => *i >= 1,
        AttributeValue::Int(i) => *i == 1,
        AttributeValue::Str(s) => {
            let s = s.trim().to_ascii_lowercase();
            if ENUMERATED_ATTRIBUTES.contains(&name.as_str()) {
                !matches!(s.as_str(), "no" | "none" | "")
            } else {
                matches!(s.as_str(), "yes" | "true" | "1")
            }
        }
        AttributeValue::Map(_) => false,
    };
    Presence::from_bool(present)
}

/// Side counts gathered while flattening attributes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FlattenStats {
    /// Attribute or sub-attribute names outside the feature universe.
    pub ignored_names: u64,
    /// Raw values that were not recognizable literals.
    pub parse_fallbacks: u64,
}

/// Flattens raw attributes into the set of canonical features present.
pub fn flatten_features(raw_attributes: &BTreeMap<String, String>) -> FeatureSet {
    flatten_features_counted(raw_attributes, &mut FlattenStats::default())
}

pub fn flatten_features_counted(
    raw_attributes: &BTreeMap<String, String>,
    stats: &mut FlattenStats,
) -> FeatureSet {
    let mut features = FeatureSet::new();
    for (name, raw) in raw_attributes {
        let canonical = name.to_ascii_lowercase();
        let value = match try_parse_attribute_value(raw) {
            Some(value) => value,
            None => {
                stats.parse_fallbacks += 1;
                AttributeValue::Str(raw.trim().to_string())
            }
        };
        if GROUPED_ATTRIBUTES.contains(&canonical.as_str()) {
            if let AttributeValue::Map(entries) = &value {
                for (inner, inner_value) in entries {
                    let inner = inner.to_ascii_lowercase();
                    if !is_universe_feature(&inner) {
                        stats.ignored_names += 1;
                    } else if normalize_flag(inner_value, &inner).is_present() {
                        features.insert(inner);
                    }
                }
            }
            continue;
        }
        if !is_universe_feature(&canonical) {
            stats.ignored_names += 1;
        } else if normalize_flag(&value, &canonical).is_present() {
            features.insert(canonical);
        }
    }
    features
}
