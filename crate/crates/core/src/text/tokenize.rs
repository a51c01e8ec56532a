use std::collections::HashSet;
use std::sync::OnceLock;

/// English function words removed before TF-IDF. Frozen; changing it
/// changes every topic profile.
pub const STOPWORDS_TXT: &str = include_str!("../../data/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(term: &str) -> bool {
    stopwords().contains(term)
}

/// Lowercases, splits on every non-alphanumeric character, and drops
/// one-character tokens and stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(str::to_lowercase)
        .filter(|token| token.chars().count() >= 2 && !is_stopword(token))
        .collect()
}
