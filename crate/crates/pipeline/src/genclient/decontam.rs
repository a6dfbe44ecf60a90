//! Token 10-gram overlap screen against benchmark text.

use std::collections::HashSet;

pub const DEFAULT_NGRAM: usize = 10;

fn tokens(text: &str) -> Vec<&str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone)]
pub struct NgramIndex {
    n: usize,
    grams: HashSet<Vec<String>>,
}

impl NgramIndex {
    pub fn new(n: usize) -> Self {
        Self {
            n: n.max(1),
            grams: HashSet::new(),
        }
    }

    pub fn add(&mut self, text: &str) {
        let toks: Vec<String> = tokens(text).into_iter().map(str::to_lowercase).collect();
        for w in toks.windows(self.n) {
            self.grams.insert(w.to_vec());
        }
    }

    pub fn from_text(text: &str, n: usize) -> Self {
        let mut idx = Self::new(n);
        idx.add(text);
        idx
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    /// True when `text` shares at least one n-gram with the index.
    pub fn overlaps(&self, text: &str) -> bool {
        let toks: Vec<String> = tokens(text).into_iter().map(str::to_lowercase).collect();
        toks.windows(self.n).any(|w| self.grams.contains(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCH: &str =
        "Return the number of vowels in the given string, counting y only at the end.";

    #[test]
    fn shared_ten_gram_is_flagged() {
        let idx = NgramIndex::from_text(BENCH, DEFAULT_NGRAM);
        assert!(
            idx.overlaps("Task: return the NUMBER of vowels in the given string, counting y only.")
        );
    }

    #[test]
    fn nine_shared_tokens_are_not() {
        let idx = NgramIndex::from_text(BENCH, DEFAULT_NGRAM);
        assert!(!idx.overlaps("return the number of vowels in the given string"));
        assert!(!idx.overlaps("Sort a list of integers in place."));
    }

    #[test]
    fn short_benchmark_yields_empty_index() {
        assert!(NgramIndex::from_text("too short", DEFAULT_NGRAM).is_empty());
    }
}
