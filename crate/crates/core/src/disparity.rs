//! Pairwise restaurant comparison on features and per-star sentiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::ingest::BusinessRecord;
use crate::taxonomy::{FeatureTaxonomy, TaxonomyError};
use crate::text::TopicProfile;
use crate::weight::Weight;
use crate::FeatureSet;

pub const STAR_LEVELS: [u8; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FavoredA,
    FavoredB,
    Inconclusive,
}

impl Verdict {
    /// The verdict of the same comparison with the arguments swapped.
    pub fn mirrored(self) -> Self {
        match self {
            Verdict::FavoredA => Verdict::FavoredB,
            Verdict::FavoredB => Verdict::FavoredA,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FavoredA => "favored_a",
            Verdict::FavoredB => "favored_b",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Comparison of restaurant `a` against restaurant `b`.
///
/// `missing_a` holds features `b` has and `a` lacks. `sentiment_a` and
/// `sentiment_b` only contain star levels the restaurant has reviews for;
/// `delta` covers all five levels, reading a missing level as 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisparityReport {
    pub id_a: String,
    pub id_b: String,
    pub stars_a: f64,
    pub stars_b: f64,
    pub common: FeatureSet,
    pub missing_a: FeatureSet,
    pub missing_b: FeatureSet,
    pub deficiency_a: Weight,
    pub deficiency_b: Weight,
    pub sentiment_a: BTreeMap<u8, i64>,
    pub sentiment_b: BTreeMap<u8, i64>,
    pub delta: BTreeMap<u8, i64>,
    pub net: i64,
    pub verdict: Verdict,
}

/// Returns `(common, missing_a, missing_b)`.
pub fn compare_features(
    a: &FeatureSet,
    b: &FeatureSet,
) -> (FeatureSet, FeatureSet, FeatureSet) {
    let common = a.intersection(b).cloned().collect();
    let missing_a = b.difference(a).cloned().collect();
    let missing_b = a.difference(b).cloned().collect();
    (common, missing_a, missing_b)
}

/// Sum of category weights over the missing features.
pub fn weighted_deficiency(
    missing: &FeatureSet,
    taxonomy: &FeatureTaxonomy,
) -> Result<Weight, TaxonomyError> {
    taxonomy.weighted_feature_score(missing)
}

/// Per-star sentiment scores of one restaurant's profiles.
pub fn sentiment_by_star(profiles: &[TopicProfile]) -> BTreeMap<u8, i64> {
    profiles
        .iter()
        .map(|p| (p.stars, p.sentiment_score))
        .collect()
}

/// `score_a[s] - score_b[s]` for every star level, plus their sum.
pub fn sentiment_delta(
    score_a: &BTreeMap<u8, i64>,
    score_b: &BTreeMap<u8, i64>,
) -> (BTreeMap<u8, i64>, i64) {
    let delta: BTreeMap<u8, i64> = STAR_LEVELS
        .iter()
        .map(|s| {
            let a = score_a.get(s).copied().unwrap_or(0);
            let b = score_b.get(s).copied().unwrap_or(0);
            (*s, a - b)
        })
        .collect();
    let net = delta.values().sum();
    (delta, net)
}

/// A restaurant is favored only when it is less deficient and ahead on net sentiment.
pub fn verdict(deficiency_a: Weight, deficiency_b: Weight, net: i64) -> Verdict {
    if deficiency_a < deficiency_b && net > 0 {
        Verdict::FavoredA
    } else if deficiency_a > deficiency_b && net < 0 {
        Verdict::FavoredB
    } else {
        Verdict::Inconclusive
    }
}

impl DisparityReport {
    pub fn build(
        a: &BusinessRecord,
        b: &BusinessRecord,
        profiles_a: &[TopicProfile],
        profiles_b: &[TopicProfile],
        taxonomy: &FeatureTaxonomy,
    ) -> Result<Self, TaxonomyError> {
        let (common, missing_a, missing_b) = compare_features(&a.features, &b.features);
        let deficiency_a = weighted_deficiency(&missing_a, taxonomy)?;
        let deficiency_b = weighted_deficiency(&missing_b, taxonomy)?;
        let sentiment_a = sentiment_by_star(profiles_a);
        let sentiment_b = sentiment_by_star(profiles_b);
        let (delta, net) = sentiment_delta(&sentiment_a, &sentiment_b);
        Ok(DisparityReport {
            id_a: a.business_id.clone(),
            id_b: b.business_id.clone(),
            stars_a: a.overall_stars,
            stars_b: b.overall_stars,
            common,
            missing_a,
            missing_b,
            deficiency_a,
            deficiency_b,
            sentiment_a,
            sentiment_b,
            delta,
            net,
            verdict: verdict(deficiency_a, deficiency_b, net),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned two-column rendering for terminals.
    pub fn to_text(&self) -> String {
        let join = |set: &FeatureSet| {
            if set.is_empty() {
                "-".to_string()
            } else {
                set.iter().cloned().collect::<Vec<_>>().join(", ")
            }
        };
        let score = |map: &BTreeMap<u8, i64>, s: u8| {
            map.get(&s).map_or_else(|| "-".to_string(), |v| v.to_string())
        };
        let mut out = String::new();
        let rows = [
            ("id_a", self.id_a.clone()),
            ("id_b", self.id_b.clone()),
            ("stars_a", format!("{:.1}", self.stars_a)),
            ("stars_b", format!("{:.1}", self.stars_b)),
            ("common", format!("({}) {}", self.common.len(), join(&self.common))),
            ("missing_a", format!("({}) {}", self.missing_a.len(), join(&self.missing_a))),
            ("missing_b", format!("({}) {}", self.missing_b.len(), join(&self.missing_b))),
            ("deficiency_a", self.deficiency_a.to_string()),
            ("deficiency_b", self.deficiency_b.to_string()),
        ];
        for (label, value) in rows {
            let _ = writeln!(out, "{label:<14}{value}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<8}{:>12}{:>12}{:>8}", "stars", "sentiment_a", "sentiment_b", "delta");
        for s in STAR_LEVELS {
            let _ = writeln!(
                out,
                "{:<8}{:>12}{:>12}{:>8}",
                s,
                score(&self.sentiment_a, s),
                score(&self.sentiment_b, s),
                self.delta[&s]
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<14}{}", "net", self.net);
        let _ = writeln!(out, "{:<14}{}", "verdict", self.verdict.as_str());
        out
    }
}
