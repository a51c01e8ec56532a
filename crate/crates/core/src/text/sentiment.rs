use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use super::tfidf::{CorpusStats, StarDocument};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon: {0}")]
    Read(#[from] std::io::Error),
    #[error("lexicon line {line}: expected `term<TAB>valence`")]
    Malformed { line: usize },
    #[error("lexicon line {line}: valence {valence} outside [-5, 5]")]
    OutOfRange { line: usize, valence: i64 },
    #[error("lexicon line {line}: duplicate term `{term}`")]
    Duplicate { line: usize, term: String },
}

/// Term → integer valence in [-5, 5], read from `term<TAB>valence` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    entries: HashMap<String, i8>,
    skipped_multiword: usize,
}

impl SentimentLexicon {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut entries = HashMap::new();
        let mut skipped_multiword = 0;
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            let number = index + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (term, valence) = line
                .rsplit_once('\t')
                .ok_or(LexiconError::Malformed { line: number })?;
            let valence: i64 = valence
                .trim()
                .parse()
                .map_err(|_| LexiconError::Malformed { line: number })?;
            if !(-5..=5).contains(&valence) {
                return Err(LexiconError::OutOfRange {
                    line: number,
                    valence,
                });
            }
            let term = term.trim().to_lowercase();
            if term.is_empty() {
                return Err(LexiconError::Malformed { line: number });
            }
            if term.contains(char::is_whitespace) {
                skipped_multiword += 1;
                continue;
            }
            if entries.contains_key(&term) {
                return Err(LexiconError::Duplicate { line: number, term });
            }
            entries.insert(term, valence as i8);
        }
        Ok(SentimentLexicon {
            entries,
            skipped_multiword,
        })
    }

    pub fn from_entries<I: IntoIterator<Item = (String, i8)>>(entries: I) -> Self {
        SentimentLexicon {
            entries: entries.into_iter().collect(),
            skipped_multiword: 0,
        }
    }

    pub fn valence(&self, term: &str) -> Option<i8> {
        self.entries.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multi-word entries dropped while loading.
    pub fn skipped_multiword(&self) -> usize {
        self.skipped_multiword
    }
}

/// Sum of valences over the distinct terms; unknown terms count 0.
pub fn sentiment_score<'a, I>(terms: I, lexicon: &SentimentLexicon) -> i64
where
    I: IntoIterator<Item = &'a str>,
{
    let distinct: BTreeSet<&str> = terms.into_iter().collect();
    distinct
        .into_iter()
        .filter_map(|t| lexicon.valence(t))
        .map(i64::from)
        .sum()
}

/// Top TF-IDF terms of one (business, star) document and their sentiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicProfile {
    pub business_id: String,
    pub stars: u8,
    pub topics: Vec<(String, f64)>,
    pub sentiment_score: i64,
}

impl TopicProfile {
    pub fn build(
        doc: &StarDocument,
        stats: &CorpusStats,
        lexicon: &SentimentLexicon,
        k: usize,
    ) -> Self {
        let topics = stats.top_terms(doc, k);
        let sentiment_score = sentiment_score(topics.iter().map(|(t, _)| t.as_str()), lexicon);
        TopicProfile {
            business_id: doc.business_id.clone(),
            stars: doc.stars,
            topics,
            sentiment_score,
        }
    }
}

pub fn build_profiles(
    documents: &[StarDocument],
    stats: &CorpusStats,
    lexicon: &SentimentLexicon,
    k: usize,
) -> Vec<TopicProfile> {
    documents
        .iter()
        .map(|d| TopicProfile::build(d, stats, lexicon, k))
        .collect()
}

/// `business_id, stars, rank, term, tfidf_weight` rows, rank starting at 1.
pub fn write_topics_tsv<W: Write>(profiles: &[TopicProfile], writer: W) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(writer);
    out.write_record(["business_id", "stars", "rank", "term", "tfidf_weight"])?;
    for profile in profiles {
        for (rank, (term, weight)) in profile.topics.iter().enumerate() {
            out.write_record([
                profile.business_id.as_str(),
                &profile.stars.to_string(),
                &(rank + 1).to_string(),
                term,
                &format!("{weight:.6}"),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-star sentiment totals over a cohort of profiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CohortScores {
    pub combined: BTreeMap<u8, i64>,
    pub average: BTreeMap<u8, f64>,
    pub populated_counts: BTreeMap<u8, u64>,
}

impl CohortScores {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["stars", "combined", "average", "populated_count"])?;
        for (stars, combined) in &self.combined {
            out.write_record([
                stars.to_string(),
                combined.to_string(),
                format!("{:.6}", self.average[stars]),
                self.populated_counts[stars].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn cohort_scores(profiles: &[TopicProfile]) -> CohortScores {
    let mut scores = CohortScores::default();
    for profile in profiles {
        *scores.combined.entry(profile.stars).or_insert(0) += profile.sentiment_score;
        *scores.populated_counts.entry(profile.stars).or_insert(0) += 1;
    }
    scores.average = scores
        .combined
        .iter()
        .map(|(s, c)| (*s, *c as f64 / scores.populated_counts[s] as f64))
        .collect();
    scores
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon(entries: &[(&str, i8)]) -> SentimentLexicon {
        SentimentLexicon::from_entries(entries.iter().map(|(t, v)| (t.to_string(), *v)))
    }

    fn profile(stars: u8, score: i64) -> TopicProfile {
        TopicProfile {
            business_id: format!("b{score}"),
            stars,
            topics: Vec::new(),
            sentiment_score: score,
        }
    }

    #[test]
    fn lexicon_parsing() {
        let input = "good\t3\nbad\t-3\n\nnot good\t-2\nExcellent\t3\r\n";
        let lex = SentimentLexicon::from_reader(input.as_bytes()).unwrap();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex.valence("excellent"), Some(3));
        assert_eq!(lex.skipped_multiword(), 1);
    }

    #[test]
    fn lexicon_errors() {
        assert!(matches!(
            SentimentLexicon::from_reader("good 3\n".as_bytes()),
            Err(LexiconError::Malformed { line: 1 })
        ));
        assert!(matches!(
            SentimentLexicon::from_reader("ok\t1\ngood\t9\n".as_bytes()),
            Err(LexiconError::OutOfRange { line: 2, valence: 9 })
        ));
        assert!(matches!(
            SentimentLexicon::from_reader("ok\t1\nok\t2\n".as_bytes()),
            Err(LexiconError::Duplicate { line: 2, .. })
        ));
    }

    #[test]
    fn scores() {
        let lex = lexicon(&[("good", 3), ("bad", -3), ("delicious", 4)]);
        assert_eq!(sentiment_score([], &lex), 0);
        assert_eq!(sentiment_score(["good", "bad"], &lex), 0);
        assert_eq!(sentiment_score(["delicious", "delicious"], &lex), 4);
        assert_eq!(sentiment_score(["delicious", "table"], &lex), 4);
    }

    #[test]
    fn cohort_arithmetic() {
        let scores = cohort_scores(&[profile(5, 10), profile(5, 20), profile(1, -3)]);
        assert_eq!(scores.combined[&5], 30);
        assert_eq!(scores.average[&5], 15.0);
        assert_eq!(scores.populated_counts[&5], 2);
        assert_eq!(scores.combined[&1], -3);
        assert!(!scores.combined.contains_key(&3));
        let mut buf = Vec::new();
        scores.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "stars,combined,average,populated_count\n1,-3,-3.000000,1\n5,30,15.000000,2\n"
        );
    }

    #[test]
    fn topics_tsv_layout() {
        let p = TopicProfile {
            business_id: "b1".into(),
            stars: 4,
            topics: vec![("noodles".into(), 2.197224577), ("soup".into(), 1.0)],
            sentiment_score: 0,
        };
        let mut buf = Vec::new();
        write_topics_tsv(&[p], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "business_id\tstars\trank\tterm\ttfidf_weight\nb1\t4\t1\tnoodles\t2.197225\nb1\t4\t2\tsoup\t1.000000\n"
        );
    }
}
