use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::{Error, Result};

const IRREGULAR: &str = include_str!("../../data/noun_irregular.tsv");
const INVARIANT: &str = include_str!("../../data/noun_invariant.txt");

/// Plural-to-singular noun lemmatizer backed by suffix rules, an irregular
/// plural table and a list of nouns that must be left alone.
///
/// When a vocabulary is attached, a rule-derived singular is accepted only if
/// the vocabulary contains it; irregular entries are always accepted.
#[derive(Debug, Clone)]
pub struct NounLemmatizer {
    irregular: HashMap<String, String>,
    invariant: HashSet<String>,
    vocabulary: Option<HashSet<String>>,
}

impl Default for NounLemmatizer {
    fn default() -> Self {
        let irregular = IRREGULAR
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .filter_map(|l| {
                let mut parts = l.split('\t');
                Some((parts.next()?.trim().to_string(), parts.next()?.trim().to_string()))
            })
            .collect();
        let invariant = INVARIANT
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| l.trim().to_string())
            .collect();
        NounLemmatizer {
            irregular,
            invariant,
            vocabulary: None,
        }
    }
}

impl NounLemmatizer {
    pub fn with_vocabulary(mut self, vocabulary: HashSet<String>) -> Self {
        self.vocabulary = Some(vocabulary);
        self
    }

    /// Adds irregular plurals from a `plural<TAB>singular` file.
    pub fn extend_irregular_from(mut self, path: &Path) -> Result<Self> {
        let text = crate::fsutil::read_to_string(path)?;
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next()) {
                (Some(p), Some(s)) => {
                    self.irregular.insert(p.trim().to_lowercase(), s.trim().to_lowercase());
                }
                _ => return Err(Error::parse(path, i + 1, "expected plural<TAB>singular")),
            }
        }
        Ok(self)
    }

    /// Singular form of `word`. Multi-word terms are lemmatized on their last
    /// word only. Idempotent.
    pub fn lemmatize(&self, word: &str) -> String {
        match word.rsplit_once(' ') {
            Some((head, last)) => match self.lemmatize_word(last) {
                Some(l) => format!("{head} {l}"),
                None => word.to_string(),
            },
            None => self.lemmatize_word(word).unwrap_or_else(|| word.to_string()),
        }
    }

    fn lemmatize_word(&self, word: &str) -> Option<String> {
        if self.invariant.contains(word) {
            return None;
        }
        if let Some(singular) = self.irregular.get(word) {
            return Some(singular.clone());
        }
        let candidate = suffix_rule(word)?;
        match &self.vocabulary {
            Some(vocab) if !vocab.contains(&candidate) => None,
            _ => Some(candidate),
        }
    }
}

/// Regular English plural stripping. Every output either ends in a letter
/// other than `s` or in `ss`/`us`, so applying the rule twice changes nothing.
fn suffix_rule(word: &str) -> Option<String> {
    let len = word.chars().count();
    if len < 4 || !word.ends_with('s') {
        return None;
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return None;
    }
    if len >= 5 && word.ends_with("ies") {
        return Some(format!("{}y", &word[..word.len() - 3]));
    }
    if ["sses", "ches", "shes", "xes"].iter().any(|s| word.ends_with(s)) {
        return Some(word[..word.len() - 2].to_string());
    }
    Some(word[..word.len() - 1].to_string())
}

/// Lemmatizes a lowercase noun with `morphology`.
pub fn lemmatize_noun(word: &str, morphology: &NounLemmatizer) -> String {
    morphology.lemmatize(word)
}
