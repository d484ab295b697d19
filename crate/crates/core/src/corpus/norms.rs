use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

/// Free-association norms: for each cue, the responses it elicited and their
/// strengths (counts, proportions, or any positive weights).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationNorms {
    entries: BTreeMap<String, Vec<(String, f64)>>,
    totals: BTreeMap<String, f64>,
}

impl AssociationNorms {
    /// Builds norms from (cue, response, strength) triples. Repeated
    /// (cue, response) pairs have their strengths summed.
    pub fn from_triples<I, S>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: AsRef<str>,
    {
        let mut grouped: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (cue, response, strength) in triples {
            if !(strength.is_finite() && strength > 0.0) {
                return Err(Error::Validation(format!(
                    "strength for ({}, {}) must be positive, got {strength}",
                    cue.as_ref(),
                    response.as_ref()
                )));
            }
            *grouped
                .entry(cue.as_ref().to_string())
                .or_default()
                .entry(response.as_ref().to_string())
                .or_insert(0.0) += strength;
        }
        let mut entries = BTreeMap::new();
        let mut totals = BTreeMap::new();
        for (cue, responses) in grouped {
            let list: Vec<(String, f64)> = responses.into_iter().collect();
            totals.insert(cue.clone(), list.iter().map(|(_, s)| s).sum());
            entries.insert(cue, list);
        }
        Ok(AssociationNorms { entries, totals })
    }

    /// Responses to `cue`, sorted by response word.
    pub fn responses(&self, cue: &str) -> Option<&[(String, f64)]> {
        self.entries.get(cue).map(Vec::as_slice)
    }

    pub fn total(&self, cue: &str) -> Option<f64> {
        self.totals.get(cue).copied()
    }

    pub fn cues(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains_cue(&self, cue: &str) -> bool {
        self.entries.contains_key(cue)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tab-separated (cue, response, strength) rows with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("cue\tresponse\tstrength\n");
        for (cue, responses) in &self.entries {
            for (response, strength) in responses {
                out.push_str(&format!("{cue}\t{response}\t{strength}\n"));
            }
        }
        out
    }
}

/// Reads a TSV or CSV file of (cue, response, strength) rows. The delimiter
/// is a tab when the file name ends in `.tsv` or the first line contains a
/// tab; otherwise a comma. A first line whose strength field is not numeric
/// is treated as a header.
pub fn load_association_norms(path: &Path) -> Result<AssociationNorms> {
    let text = crate::fsutil::read_to_string(path)?;
    let tab = path.extension().is_some_and(|e| e == "tsv") || text.lines().next().is_some_and(|l| l.contains('\t'));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(if tab { b'\t' } else { b',' })
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut triples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() < 3 {
            return Err(Error::parse(path, line, "expected cue, response and strength"));
        }
        let raw = record[2].trim();
        let strength: f64 = match raw.parse() {
            Ok(v) => v,
            Err(_) if line == 1 => continue,
            Err(_) => return Err(Error::parse(path, line, format!("strength {raw:?} is not a number"))),
        };
        if !(strength.is_finite() && strength > 0.0) {
            return Err(Error::Validation(format!(
                "{}:{line}: strength must be positive, got {raw}",
                path.display()
            )));
        }
        triples.push((
            record[0].trim().to_lowercase(),
            record[1].trim().to_lowercase(),
            strength,
        ));
    }
    AssociationNorms::from_triples(triples)
}
