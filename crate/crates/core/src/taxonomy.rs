//! Four-category feature taxonomy, weighted scores, ranking and frequency tables.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::BusinessRecord;
use crate::weight::Weight;
use crate::FeatureSet;

/// Every canonical feature name the pipeline knows about.
pub const FEATURE_UNIVERSE: [&str; 36] = [
    // parking
    "bikeparking",
    "garage",
    "street",
    "validated",
    "lot",
    "valet",
    // food
    "dessert",
    "latenight",
    "lunch",
    "dinner",
    "breakfast",
    "brunch",
    "restaurantspricerange2",
    "alcohol",
    // amenities
    "hastv",
    "outdoorseating",
    "businessacceptscreditcards",
    "restaurantsdelivery",
    "restaurantstakeout",
    "wifi",
    "restaurantstableservice",
    "restaurantscounterservice",
    "caters",
    "restaurantsreservations",
    // qualities
    "restaurantsgoodforgroups",
    "noiselevel",
    "restaurantsattire",
    "goodforkids",
    "classy",
    "romantic",
    "intimate",
    "hipster",
    "touristy",
    "trendy",
    "upscale",
    "casual",
];

pub fn is_universe_feature(name: &str) -> bool {
    FEATURE_UNIVERSE.contains(&name)
}

/// The embedded default taxonomy configuration.
pub const DEFAULT_TAXONOMY_TOML: &str = include_str!("../config/taxonomy_default.toml");

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("invalid taxonomy config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to read taxonomy config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("category `{category}` has an invalid weight {weight} (must be non-negative with at most 6 decimals)")]
    InvalidWeight { category: String, weight: f64 },
    #[error("feature `{feature}` is listed under both `{first}` and `{second}`")]
    DuplicateFeature {
        feature: String,
        first: String,
        second: String,
    },
    #[error("taxonomy does not cover features: {}", .0.join(", "))]
    Incomplete(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryConfig {
    weight: f64,
    features: Vec<String>,
}

/// Category → features plus per-category weights. Categories partition the
/// feature universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTaxonomy {
    categories: BTreeMap<String, FeatureSet>,
    weights: BTreeMap<String, Weight>,
    owner: HashMap<String, String>,
}

impl Default for FeatureTaxonomy {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_TAXONOMY_TOML).expect("embedded taxonomy is valid")
    }
}

impl FeatureTaxonomy {
    pub fn from_toml_str(input: &str) -> Result<Self, TaxonomyError> {
        let raw: BTreeMap<String, CategoryConfig> = toml::from_str(input)?;
        let mut categories = BTreeMap::new();
        let mut weights = BTreeMap::new();
        let mut owner: HashMap<String, String> = HashMap::new();
        for (category, config) in raw {
            let weight =
                Weight::from_f64(config.weight).ok_or_else(|| TaxonomyError::InvalidWeight {
                    category: category.clone(),
                    weight: config.weight,
                })?;
            let mut features = FeatureSet::new();
            for feature in config.features {
                let feature = feature.to_ascii_lowercase();
                if !is_universe_feature(&feature) {
                    return Err(TaxonomyError::UnknownFeature(feature));
                }
                if let Some(first) = owner.get(&feature) {
                    return Err(TaxonomyError::DuplicateFeature {
                        feature,
                        first: first.clone(),
                        second: category,
                    });
                }
                owner.insert(feature.clone(), category.clone());
                features.insert(feature);
            }
            weights.insert(category.clone(), weight);
            categories.insert(category, features);
        }
        let missing: Vec<String> = FEATURE_UNIVERSE
            .iter()
            .filter(|f| !owner.contains_key(**f))
            .map(|f| f.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(TaxonomyError::Incomplete(missing));
        }
        Ok(FeatureTaxonomy {
            categories,
            weights,
            owner,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn categories(&self) -> &BTreeMap<String, FeatureSet> {
        &self.categories
    }

    pub fn weight(&self, category: &str) -> Option<Weight> {
        self.weights.get(category).copied()
    }

    /// Canonical TOML rendering; equal taxonomies render identically.
    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        for (category, features) in &self.categories {
            let list: Vec<String> = features.iter().map(|f| format!("\"{f}\"")).collect();
            out.push_str(&format!(
                "[{category}]\nweight = {}\nfeatures = [{}]\n\n",
                self.weights[category],
                list.join(", ")
            ));
        }
        out
    }

    /// Hex SHA-256 of the canonical rendering.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn classify_feature(&self, name: &str) -> Result<&str, TaxonomyError> {
        self.owner
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| TaxonomyError::UnknownFeature(name.to_string()))
    }

    pub fn feature_weight(&self, name: &str) -> Result<Weight, TaxonomyError> {
        let category = self.classify_feature(name)?;
        Ok(self.weights[category])
    }

    /// Sum of owning-category weights over `features`.
    pub fn weighted_feature_score<'a, I>(&self, features: I) -> Result<Weight, TaxonomyError>
    where
        I: IntoIterator<Item = &'a String>,
    {
        features.into_iter().map(|f| self.feature_weight(f)).sum()
    }
}

/// One row of a [`RankedList`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedEntry {
    pub business_id: String,
    pub feature_count: u32,
    pub weighted_score: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
    /// Requested cutoff; 0 keeps every restaurant.
    pub cutoff: usize,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.business_id.as_str())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["business_id", "feature_count", "weighted_score"])?;
        for entry in &self.entries {
            out.write_record([
                entry.business_id.clone(),
                entry.feature_count.to_string(),
                entry.weighted_score.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, cutoff: usize) -> Result<Self, csv::Error> {
        #[derive(Deserialize)]
        struct Row {
            business_id: String,
            feature_count: u32,
            weighted_score: f64,
        }
        let mut entries = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: Row = row?;
            entries.push(RankedEntry {
                business_id: row.business_id,
                feature_count: row.feature_count,
                weighted_score: Weight::from_f64(row.weighted_score).unwrap_or_default(),
            });
        }
        Ok(RankedList { entries, cutoff })
    }
}

/// Ranks restaurants by feature count descending, then business id ascending,
/// keeping the first `cutoff` entries (all when `cutoff` is 0).
pub fn rank_restaurants(
    businesses: &[BusinessRecord],
    taxonomy: &FeatureTaxonomy,
    cutoff: usize,
) -> Result<RankedList, TaxonomyError> {
    let mut entries = businesses
        .iter()
        .filter(|b| b.is_restaurant)
        .map(|b| {
            Ok(RankedEntry {
                business_id: b.business_id.clone(),
                feature_count: b.features.len() as u32,
                weighted_score: taxonomy.weighted_feature_score(&b.features)?,
            })
        })
        .collect::<Result<Vec<_>, TaxonomyError>>()?;
    entries.sort_by(|a, b| {
        b.feature_count
            .cmp(&a.feature_count)
            .then_with(|| a.business_id.cmp(&b.business_id))
    });
    if cutoff > 0 {
        entries.truncate(cutoff);
    }
    Ok(RankedList { entries, cutoff })
}

/// Number of ranked businesses possessing each universe feature.
pub fn feature_frequency(
    ranked: &RankedList,
    businesses: &[BusinessRecord],
) -> BTreeMap<String, u64> {
    let by_id: HashMap<&str, &BusinessRecord> = businesses
        .iter()
        .map(|b| (b.business_id.as_str(), b))
        .collect();
    let mut counts: BTreeMap<String, u64> =
        FEATURE_UNIVERSE.iter().map(|f| (f.to_string(), 0)).collect();
    for id in ranked.ids() {
        if let Some(business) = by_id.get(id) {
            for feature in &business.features {
                if let Some(count) = counts.get_mut(feature) {
                    *count += 1;
                }
            }
        }
    }
    counts
}

/// Frequency rows ordered by count descending, then name ascending.
pub fn frequency_table(frequency: &BTreeMap<String, u64>) -> Vec<(&str, u64)> {
    let mut rows: Vec<(&str, u64)> = frequency.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    rows
}

pub fn write_frequency_csv<W: Write>(
    frequency: &BTreeMap<String, u64>,
    writer: W,
) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["feature", "frequency"])?;
    for (feature, count) in frequency_table(frequency) {
        out.write_record([feature, &count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
