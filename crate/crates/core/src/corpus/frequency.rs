use std::collections::HashMap;
use std::path::Path;

use crate::{Error, Result};

/// Corpus counts for single words and two-word terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<(String, String), u64>,
    total_unigrams: u64,
    total_bigrams: u64,
}

impl FrequencyTable {
    /// Adds `count` occurrences of a one- or two-word term. Terms of three
    /// or more words are rejected.
    pub fn add(&mut self, term: &str, count: u64) -> Result<()> {
        if count == 0 {
            return Err(Error::Validation(format!("count for {term:?} must be positive")));
        }
        let words: Vec<&str> = term.split_whitespace().collect();
        match words.as_slice() {
            [w] => {
                *self.unigrams.entry(w.to_string()).or_insert(0) += count;
                self.total_unigrams += count;
            }
            [a, b] => {
                *self.bigrams.entry((a.to_string(), b.to_string())).or_insert(0) += count;
                self.total_bigrams += count;
            }
            _ => return Err(Error::Validation(format!("term {term:?} is not a unigram or bigram"))),
        }
        Ok(())
    }

    pub fn total_unigrams(&self) -> u64 {
        self.total_unigrams
    }

    pub fn total_bigrams(&self) -> u64 {
        self.total_bigrams
    }

    pub fn total(&self) -> u64 {
        self.total_unigrams + self.total_bigrams
    }

    pub fn unigram(&self, word: &str) -> Option<u64> {
        self.unigrams.get(word).copied()
    }

    pub fn bigram(&self, first: &str, second: &str) -> Option<u64> {
        self.bigrams.get(&(first.to_string(), second.to_string())).copied()
    }

    /// Count for a space-joined term of one or two words.
    pub fn count(&self, term: &str) -> Option<u64> {
        let words: Vec<&str> = term.split_whitespace().collect();
        match words.as_slice() {
            [w] => self.unigram(w),
            [a, b] => self.bigram(a, b),
            _ => None,
        }
    }

    pub fn relative_frequency(&self, term: &str) -> Option<f64> {
        self.count(term).map(|c| c as f64 / self.total() as f64)
    }

    /// Smallest relative frequency of any stored term.
    pub fn min_relative_frequency(&self) -> Option<f64> {
        self.unigrams
            .values()
            .chain(self.bigrams.values())
            .min()
            .map(|&c| c as f64 / self.total() as f64)
    }

    pub fn len(&self) -> usize {
        self.unigrams.len() + self.bigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All terms with their counts, bigrams space-joined, sorted by term.
    pub fn terms(&self) -> Vec<(String, u64)> {
        let mut out: Vec<(String, u64)> = self
            .unigrams
            .iter()
            .map(|(w, c)| (w.clone(), *c))
            .chain(self.bigrams.iter().map(|((a, b), c)| (format!("{a} {b}"), *c)))
            .collect();
        out.sort();
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,count\n");
        for (term, count) in self.terms() {
            out.push_str(&format!("{term},{count}\n"));
        }
        out
    }
}

/// Reads (term, count) rows. A first row with a non-integer count is a
/// header. Rows with three or more words are skipped with a warning.
pub fn load_frequency_table(path: &Path) -> Result<FrequencyTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut table = FrequencyTable::default();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::parse(path, line, "expected term and count"));
        }
        let term = record[0].trim().to_lowercase();
        let raw = record[1].trim();
        let count: u64 = match raw.parse() {
            Ok(c) => c,
            Err(_) if line == 1 => continue,
            Err(_) => return Err(Error::parse(path, line, format!("count {raw:?} is not an integer"))),
        };
        if term.split_whitespace().count() > 2 {
            log::warn!(
                "{}:{line}: skipping {term:?}, only unigrams and bigrams are used",
                path.display()
            );
            continue;
        }
        table
            .add(&term, count)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    Ok(table)
}
