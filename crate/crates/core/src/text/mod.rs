//! Review tokenization, per-star TF-IDF topics and lexicon sentiment.

mod sentiment;
mod tfidf;
mod tokenize;

pub use sentiment::{
    build_profiles, cohort_scores, sentiment_score, write_topics_tsv, CohortScores, LexiconError,
    SentimentLexicon, TopicProfile,
};
pub use tfidf::{build_star_documents, tfidf, top_terms, CorpusStats, StarDocument, StarDocumentBuilder};
pub use tokenize::{is_stopword, tokenize, STOPWORDS_TXT};

/// Topic count used when none is given.
pub const DEFAULT_TOPIC_COUNT: usize = 50;
