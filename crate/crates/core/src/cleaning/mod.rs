//! Data cleaning for raw fluency lists: underscore normalization, correction
//! of misspellings and run-together words against a category lexicon, and
//! plural lemmatization.
//!
//! Steps run in a fixed order for every item: lowercase and trim, replace
//! underscores, correct against the lexicon, lemmatize.

mod lemma;
mod levenshtein;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{CategoryLexicon, FluencyList};
use crate::{Error, Result};

pub use lemma::{lemmatize_noun, NounLemmatizer};
pub use levenshtein::levenshtein;

/// What happened to one raw item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub original: String,
    pub cleaned: String,
    pub correction_applied: bool,
    /// Distance to the chosen lexicon instance; 0 when no correction was made.
    pub edit_distance: usize,
    pub lemma_changed: bool,
    pub underscores_replaced: bool,
    /// No usable lexicon was available for the item's category.
    pub lexicon_missing: bool,
    /// A nearest instance existed but lay beyond the distance cap.
    pub correction_capped: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CleaningOptions {
    pub lemmatizer: NounLemmatizer,
    /// Largest edit distance accepted for a correction; unlimited when `None`.
    pub max_distance: Option<usize>,
}

/// Precomputed lookup for one lexicon. An item counts as an exact match
/// when it equals an instance or the lemma of one, so already-cleaned output
/// is never pulled toward a different instance.
struct LexiconMatcher {
    instances: Vec<(String, Vec<char>)>,
    known: HashSet<String>,
}

impl LexiconMatcher {
    fn new(lexicon: &CategoryLexicon, lemmatizer: &NounLemmatizer) -> Self {
        let mut known = HashSet::new();
        let instances = lexicon
            .instances
            .iter()
            .map(|s| {
                known.insert(s.clone());
                known.insert(lemmatizer.lemmatize(s));
                (s.clone(), s.chars().collect())
            })
            .collect();
        LexiconMatcher { instances, known }
    }

    /// Nearest instance by edit distance; equal distances resolve to the
    /// lexicographically smallest instance.
    fn nearest(&self, word: &str) -> Option<(&str, usize)> {
        let chars: Vec<char> = word.chars().collect();
        let mut best: Option<(&str, usize)> = None;
        for (inst, inst_chars) in &self.instances {
            let bound = chars.len().abs_diff(inst_chars.len());
            if best.is_some_and(|(_, d)| bound >= d) {
                continue;
            }
            let d = levenshtein::levenshtein_chars(&chars, inst_chars);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((inst, d));
            }
        }
        best
    }
}

/// Cleans items category by category, reusing one matcher per lexicon.
pub struct Cleaner<'a> {
    options: &'a CleaningOptions,
    matchers: BTreeMap<String, LexiconMatcher>,
}

impl<'a> Cleaner<'a> {
    pub fn new(lexicons: &BTreeMap<String, CategoryLexicon>, options: &'a CleaningOptions) -> Self {
        let matchers = lexicons
            .iter()
            .filter(|(_, lex)| !lex.is_empty())
            .map(|(cat, lex)| (cat.clone(), LexiconMatcher::new(lex, &options.lemmatizer)))
            .collect();
        Cleaner { options, matchers }
    }

    pub fn clean(&self, category: &str, raw: &str) -> Result<CleaningReport> {
        clean_with(raw, self.matchers.get(category), self.options)
    }
}

fn clean_with(raw: &str, matcher: Option<&LexiconMatcher>, options: &CleaningOptions) -> Result<CleaningReport> {
    let lowered = raw.trim().to_lowercase();
    let spaced = lowered
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    if spaced.is_empty() {
        return Err(Error::Validation(format!("empty item {raw:?}")));
    }
    let underscores_replaced = lowered.contains('_');

    let mut report = CleaningReport {
        original: raw.to_string(),
        cleaned: String::new(),
        correction_applied: false,
        edit_distance: 0,
        lemma_changed: false,
        underscores_replaced,
        lexicon_missing: matcher.is_none(),
        correction_capped: false,
    };

    let mut corrected = spaced.clone();
    if let Some(m) = matcher {
        if !m.known.contains(&spaced) {
            if let Some((inst, d)) = m.nearest(&spaced) {
                if options.max_distance.is_some_and(|cap| d > cap) {
                    report.correction_capped = true;
                } else {
                    corrected = inst.to_string();
                    report.correction_applied = true;
                    report.edit_distance = d;
                }
            }
        }
    }
    let lemma = options.lemmatizer.lemmatize(&corrected);
    report.lemma_changed = lemma != corrected;
    report.cleaned = lemma;
    Ok(report)
}

/// Cleans a single raw item against `lexicon`. An absent or empty lexicon
/// skips correction; normalization and lemmatization still apply.
pub fn clean_item(raw: &str, lexicon: Option<&CategoryLexicon>, options: &CleaningOptions) -> Result<CleaningReport> {
    let matcher = lexicon
        .filter(|l| !l.is_empty())
        .map(|l| LexiconMatcher::new(l, &options.lemmatizer));
    clean_with(raw, matcher.as_ref(), options)
}

/// One entry of the audit log produced by [`clean_dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningRecord {
    pub list_id: String,
    /// 1-based position in the raw list.
    pub position: usize,
    pub report: CleaningReport,
    pub dropped_duplicate: bool,
}

impl CleaningRecord {
    pub fn flags(&self) -> Vec<&'static str> {
        let r = &self.report;
        let mut flags = Vec::new();
        if r.underscores_replaced {
            flags.push("underscores");
        }
        if r.correction_applied {
            flags.push("corrected");
        }
        if r.correction_capped {
            flags.push("distance_capped");
        }
        if r.lemma_changed {
            flags.push("lemmatized");
        }
        if r.lexicon_missing {
            flags.push("no_lexicon");
        }
        if self.dropped_duplicate {
            flags.push("duplicate_dropped");
        }
        flags
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanedDataset {
    pub lists: Vec<FluencyList>,
    /// Records for every item that changed, was dropped or was flagged.
    pub reports: Vec<CleaningRecord>,
    /// For each input list and raw position, the kept cleaned item, or
    /// `None` if it was dropped as a duplicate.
    pub alignment: Vec<Vec<Option<String>>>,
}

/// Cleans every list with its category's lexicon and drops items that
/// duplicate an earlier item of the same list once cleaned.
pub fn clean_dataset(
    lists: &[FluencyList],
    lexicons: &BTreeMap<String, CategoryLexicon>,
    options: &CleaningOptions,
) -> Result<CleanedDataset> {
    let cleaner = Cleaner::new(lexicons, options);
    let mut out = CleanedDataset {
        lists: Vec::with_capacity(lists.len()),
        reports: Vec::new(),
        alignment: Vec::with_capacity(lists.len()),
    };
    for list in lists {
        let mut seen = HashSet::new();
        let mut items = Vec::with_capacity(list.items.len());
        let mut aligned = Vec::with_capacity(list.items.len());
        for (i, raw) in list.items.iter().enumerate() {
            let report = cleaner
                .clean(&list.category, raw)
                .map_err(|e| e.context(format!("list {} item {}", list.id(), i + 1)))?;
            let duplicate = !seen.insert(report.cleaned.clone());
            let changed = report.cleaned != *raw || report.lexicon_missing || report.correction_capped;
            if duplicate {
                aligned.push(None);
            } else {
                items.push(report.cleaned.clone());
                aligned.push(Some(report.cleaned.clone()));
            }
            if changed || duplicate {
                out.reports.push(CleaningRecord {
                    list_id: list.id(),
                    position: i + 1,
                    report,
                    dropped_duplicate: duplicate,
                });
            }
        }
        out.lists.push(FluencyList { items, ..list.clone() });
        out.alignment.push(aligned);
    }
    Ok(out)
}

/// Audit CSV: one row per record with the original and cleaned strings, the
/// correction distance and `|`-joined flags.
pub fn reports_to_csv(records: &[CleaningRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::Validation(e.to_string());
    w.write_record(["list", "position", "original", "cleaned", "distance", "flags"])
        .map_err(err)?;
    for r in records {
        w.write_record([
            r.list_id.as_str(),
            &r.position.to_string(),
            &r.report.original,
            &r.report.cleaned,
            &r.report.edit_distance.to_string(),
            &r.flags().join("|"),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Validation(e.to_string()))
}
