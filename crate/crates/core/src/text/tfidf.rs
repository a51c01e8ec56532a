use std::collections::{BTreeMap, HashMap, HashSet};

use crate::ingest::ReviewRecord;

use super::tokenize;

/// All of one business's review text at one star level, as term counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarDocument {
    pub business_id: String,
    pub stars: u8,
    pub term_counts: BTreeMap<String, u32>,
}

impl StarDocument {
    pub fn term_count(&self, term: &str) -> u32 {
        self.term_counts.get(term).copied().unwrap_or(0)
    }
}

/// Accumulates reviews into star documents without keeping review text.
#[derive(Debug, Default)]
pub struct StarDocumentBuilder {
    documents: BTreeMap<(String, u8), BTreeMap<String, u32>>,
}

impl StarDocumentBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, review: &ReviewRecord) {
        let counts = self
            .documents
            .entry((review.business_id.clone(), review.stars))
            .or_default();
        for term in tokenize(&review.text) {
            *counts.entry(term).or_insert(0) += 1;
        }
    }

    /// Documents ordered by business id, then stars.
    pub fn finish(self) -> Vec<StarDocument> {
        self.documents
            .into_iter()
            .map(|((business_id, stars), term_counts)| StarDocument {
                business_id,
                stars,
                term_counts,
            })
            .collect()
    }
}

/// One document per (business, star) with at least one review, restricted to `cohort_ids`.
pub fn build_star_documents<'a, I>(reviews: I, cohort_ids: &HashSet<String>) -> Vec<StarDocument>
where
    I: IntoIterator<Item = &'a ReviewRecord>,
{
    let mut builder = StarDocumentBuilder::new();
    for review in reviews {
        if cohort_ids.contains(&review.business_id) {
            builder.add(review);
        }
    }
    builder.finish()
}

fn weight(tf: u32, documents: usize, df: u32) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    f64::from(tf) * (documents as f64 / f64::from(df)).ln()
}

/// Raw-count tf times `ln(N / df)`, computed by scanning `corpus`.
pub fn tfidf(term: &str, doc: &StarDocument, corpus: &[StarDocument]) -> f64 {
    let tf = doc.term_count(term);
    if tf == 0 {
        return 0.0;
    }
    let df = corpus
        .iter()
        .filter(|d| d.term_counts.contains_key(term))
        .count() as u32;
    weight(tf, corpus.len(), df.max(1))
}

/// Highest-weighted terms of `doc` over `corpus`.
pub fn top_terms(doc: &StarDocument, corpus: &[StarDocument], k: usize) -> Vec<(String, f64)> {
    CorpusStats::from_documents(corpus).top_terms(doc, k)
}

/// Frozen document frequencies of a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    documents: usize,
    document_frequency: HashMap<String, u32>,
}

impl CorpusStats {
    pub fn from_documents(corpus: &[StarDocument]) -> Self {
        let mut document_frequency: HashMap<String, u32> = HashMap::new();
        for doc in corpus {
            for term in doc.term_counts.keys() {
                *document_frequency.entry(term.clone()).or_insert(0) += 1;
            }
        }
        CorpusStats {
            documents: corpus.len(),
            document_frequency,
        }
    }

    pub fn from_parts(documents: usize, document_frequency: HashMap<String, u32>) -> Self {
        CorpusStats {
            documents,
            document_frequency,
        }
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn document_frequency(&self, term: &str) -> u32 {
        self.document_frequency.get(term).copied().unwrap_or(0)
    }

    /// Document frequencies sorted by term.
    pub fn frequencies(&self) -> BTreeMap<&str, u32> {
        self.document_frequency
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect()
    }

    /// TF-IDF of `term` in `doc`. A term the frozen corpus has never seen
    /// (only possible for documents outside it) is weighted as if df were 1.
    pub fn tfidf(&self, term: &str, doc: &StarDocument) -> f64 {
        let tf = doc.term_count(term);
        if tf == 0 {
            return 0.0;
        }
        weight(tf, self.documents.max(1), self.document_frequency(term).max(1))
    }

    /// Up to `k` positive-weight terms, by weight descending then term ascending.
    pub fn top_terms(&self, doc: &StarDocument, k: usize) -> Vec<(String, f64)> {
        let mut scored: Vec<(String, f64)> = doc
            .term_counts
            .keys()
            .map(|term| (term.clone(), self.tfidf(term, doc)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, stars: u8, terms: &[(&str, u32)]) -> StarDocument {
        StarDocument {
            business_id: id.to_string(),
            stars,
            term_counts: terms.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
        }
    }

    fn review(id: &str, stars: u8, text: &str) -> ReviewRecord {
        ReviewRecord {
            review_id: String::new(),
            business_id: id.to_string(),
            user_id: String::new(),
            stars,
            text: text.to_string(),
            date: String::new(),
        }
    }

    #[test]
    fn documents_per_business_star() {
        let reviews = [
            review("a", 5, "tasty noodles"),
            review("a", 5, "noodles tonight"),
            review("a", 1, "cold soup"),
            review("z", 3, "outside cohort"),
        ];
        let cohort: HashSet<String> = ["a".to_string()].into();
        let docs = build_star_documents(&reviews, &cohort);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].stars, 1);
        assert_eq!(docs[1].term_count("noodles"), 2);
        assert_eq!(docs[1].term_count("tonight"), 1);
    }

    #[test]
    fn empty_review_still_makes_a_document() {
        let cohort: HashSet<String> = ["a".to_string()].into();
        let docs = build_star_documents(&[review("a", 4, "")], &cohort);
        assert_eq!(docs.len(), 1);
        assert!(docs[0].term_counts.is_empty());
    }

    #[test]
    fn tfidf_values() {
        let corpus = vec![
            doc("a", 1, &[("pizza", 2), ("common", 1)]),
            doc("b", 1, &[("common", 3)]),
            doc("c", 1, &[("common", 1), ("salad", 1)]),
        ];
        assert_eq!(tfidf("common", &corpus[1], &corpus), 0.0);
        assert_eq!(tfidf("salad", &corpus[0], &corpus), 0.0);
        let expected = 2.0 * 3f64.ln();
        assert!((tfidf("pizza", &corpus[0], &corpus) - expected).abs() < 1e-12);
        assert!((expected - 2.1972).abs() < 1e-4);
        let stats = CorpusStats::from_documents(&corpus);
        assert_eq!(stats.tfidf("pizza", &corpus[0]), tfidf("pizza", &corpus[0], &corpus));
    }

    #[test]
    fn top_terms_order_and_limits() {
        let corpus = vec![
            doc("a", 1, &[("beta", 1), ("alpha", 1), ("gamma", 3), ("shared", 1)]),
            doc("b", 1, &[("shared", 2)]),
        ];
        let top = top_terms(&corpus[0], &corpus, 50);
        let names: Vec<&str> = top.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["gamma", "alpha", "beta"]);
        assert_eq!(top_terms(&corpus[0], &corpus, 1).len(), 1);
    }

    #[test]
    fn unseen_term_outside_corpus() {
        let corpus = vec![doc("a", 1, &[("x1", 1)]), doc("b", 1, &[("x1", 1), ("y2", 1)])];
        let stats = CorpusStats::from_documents(&corpus);
        let outsider = doc("z", 1, &[("novel", 2), ("x1", 1)]);
        assert!((stats.tfidf("novel", &outsider) - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(stats.tfidf("x1", &outsider), 0.0);
    }
}
