use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::Arc;

use super::distribution::PredictionDistribution;
use crate::cleaning::NounLemmatizer;
use crate::corpus::PredictionContext;
use crate::Result;

const STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Reads a word-per-line file, skipping blank lines and `#` comments.
pub fn load_word_list(path: &Path) -> Result<HashSet<String>> {
    Ok(parse_word_list(&crate::fsutil::read_to_string(path)?))
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_word_list(STOPWORDS)
}

/// Post-processing applied to raw model predictions: stopword and non-noun
/// removal, lemmatization, and censoring of items already produced.
#[derive(Debug, Clone)]
pub struct PredictionFilter {
    stopwords: HashSet<String>,
    nouns: Option<HashSet<String>>,
    lemmatizer: NounLemmatizer,
}

impl Default for PredictionFilter {
    fn default() -> Self {
        PredictionFilter::new(default_stopwords(), None, NounLemmatizer::default())
    }
}

impl PredictionFilter {
    /// With `nouns = None` every non-stopword counts as a noun.
    pub fn new(stopwords: HashSet<String>, nouns: Option<HashSet<String>>, lemmatizer: NounLemmatizer) -> Self {
        PredictionFilter {
            stopwords,
            nouns,
            lemmatizer,
        }
    }

    pub fn lemmatizer(&self) -> &NounLemmatizer {
        &self.lemmatizer
    }

    /// The lemma a raw prediction maps to, or `None` when it is dropped.
    /// A word passes the noun check if it or its lemma is a listed noun.
    pub fn admit(&self, word: &str) -> Option<String> {
        if word.is_empty() || self.stopwords.contains(word) {
            return None;
        }
        let lemma = self.lemmatizer.lemmatize(word);
        if let Some(nouns) = &self.nouns {
            if !nouns.contains(word) && !nouns.contains(&lemma) {
                return None;
            }
        }
        if self.stopwords.contains(&lemma) {
            return None;
        }
        Some(lemma)
    }

    /// Admitted lemmas of a vocabulary.
    pub fn vocabulary<'a, I: IntoIterator<Item = &'a String>>(&self, words: I) -> HashSet<String> {
        words.into_iter().filter_map(|w| self.admit(w)).collect()
    }

    /// Filters a ranked distribution. Mass of words sharing a lemma is
    /// summed; words whose surface form or lemma was already used are
    /// dropped; the rest is renormalized. Coverage becomes the admitted
    /// lemmas of the input coverage.
    pub fn apply(&self, dist: &PredictionDistribution, ctx: &PredictionContext) -> PredictionDistribution {
        let coverage = Arc::new(self.vocabulary(dist.coverage().iter()));
        self.apply_with_coverage(dist, &ctx.used_items, coverage, usize::MAX)
    }

    pub(crate) fn apply_with_coverage(
        &self,
        dist: &PredictionDistribution,
        used: &BTreeSet<String>,
        coverage: Arc<HashSet<String>>,
        limit: usize,
    ) -> PredictionDistribution {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for c in dist.candidates() {
            if used.contains(&c.word) {
                continue;
            }
            if let Some(lemma) = self.admit(&c.word) {
                if !used.contains(&lemma) {
                    *merged.entry(lemma).or_insert(0.0) += c.probability;
                }
            }
        }
        PredictionDistribution::from_weights(merged, coverage, limit)
    }
}

/// Filters `dist` with an explicit noun list and stopword set.
pub fn filter_predictions(
    dist: &PredictionDistribution,
    nouns: &HashSet<String>,
    stopwords: &HashSet<String>,
    lemmatizer: &NounLemmatizer,
    ctx: &PredictionContext,
) -> PredictionDistribution {
    PredictionFilter::new(stopwords.clone(), Some(nouns.clone()), lemmatizer.clone()).apply(dist, ctx)
}
