use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::conceptnet::{category_concept, english_term, EdgeSource};
use crate::cleaning::NounLemmatizer;
use crate::{Error, Result};

/// Known instances of a category, used as the correction target set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CategoryLexicon {
    pub category: String,
    pub instances: BTreeSet<String>,
    pub source_relations: BTreeSet<String>,
}

impl CategoryLexicon {
    /// Builds a lexicon from raw strings, normalizing each to lowercase with
    /// underscores turned into spaces. Blank entries are dropped.
    pub fn new<I, S>(category: &str, instances: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        CategoryLexicon {
            category: category.to_lowercase(),
            instances: instances
                .into_iter()
                .map(|s| normalize_instance(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
            source_relations: BTreeSet::new(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.instances.contains(word)
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }
}

fn normalize_instance(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Collects every English term linked to the category concept through one
/// of `relations`, following pagination until each relation is exhausted.
pub fn fetch_category_lexicon(category: &str, relations: &[&str], source: &dyn EdgeSource) -> Result<CategoryLexicon> {
    if relations.is_empty() {
        return Err(Error::Validation("at least one relation is required".into()));
    }
    let lemmatizer = NounLemmatizer::default();
    let concept = category_concept(category, &lemmatizer);
    let own_term = english_term(&concept);
    let mut instances = BTreeSet::new();
    for relation in relations {
        let mut offset = 0;
        loop {
            let page = source.edges_into(&concept, relation, offset, source.page_size())?;
            for edge in &page.edges {
                if let Some(term) = english_term(&edge.start) {
                    if Some(&term) != own_term.as_ref() {
                        instances.insert(normalize_instance(&term));
                    }
                }
            }
            match page.next_offset {
                Some(next) if next > offset => offset = next,
                _ => break,
            }
        }
    }
    if instances.is_empty() {
        log::info!("no instances found for category {category:?}");
    }
    Ok(CategoryLexicon {
        category: category.to_lowercase(),
        instances,
        source_relations: relations.iter().map(|r| r.to_string()).collect(),
    })
}

/// Reads a lexicon cache: a JSON object mapping category to an instance array.
pub fn load_lexicon_cache(path: &Path) -> Result<BTreeMap<String, CategoryLexicon>> {
    let text = crate::fsutil::read_to_string(path)?;
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    Ok(raw
        .into_iter()
        .map(|(cat, items)| {
            let lex = CategoryLexicon::new(&cat, items);
            (lex.category.clone(), lex)
        })
        .collect())
}

/// Writes lexicons as category -> sorted instance array, keys sorted.
pub fn save_lexicon_cache(path: &Path, lexicons: &BTreeMap<String, CategoryLexicon>) -> Result<()> {
    let raw: BTreeMap<&str, Vec<&str>> = lexicons
        .iter()
        .map(|(cat, lex)| (cat.as_str(), lex.instances.iter().map(String::as_str).collect()))
        .collect();
    let mut text = serde_json::to_string_pretty(&raw).expect("string maps serialize");
    text.push('\n');
    crate::fsutil::write_atomic(path, text.as_bytes())
}

/// Returns the cached lexicon for `category` when present; otherwise
/// fetches it from `source` and adds it to the cache file.
pub fn lexicon_with_cache(
    category: &str,
    relations: &[&str],
    source: Option<&dyn EdgeSource>,
    cache: &Path,
) -> Result<CategoryLexicon> {
    let mut all = if cache.exists() {
        load_lexicon_cache(cache)?
    } else {
        BTreeMap::new()
    };
    let key = category.to_lowercase();
    if let Some(lex) = all.get(&key) {
        return Ok(lex.clone());
    }
    let source =
        source.ok_or_else(|| Error::Retrieval(format!("no cached lexicon for {category:?} and no edge source")))?;
    let lex = fetch_category_lexicon(category, relations, source)?;
    all.insert(key, lex.clone());
    save_lexicon_cache(cache, &all)?;
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Edge, RecordedEdgeSource};

    fn fixture() -> RecordedEdgeSource {
        let e = |s: &str, r: &str| Edge {
            start: format!("/c/en/{s}"),
            end: "/c/en/fruit".into(),
            relation: format!("/r/{r}"),
        };
        RecordedEdgeSource::from_edges(vec![e("apple", "IsA"), e("banana/n", "IsA"), e("seed", "PartOf")])
    }

    #[test]
    fn all_relations() {
        let lex = fetch_category_lexicon("fruits", &crate::corpus::DEFAULT_RELATIONS, &fixture()).unwrap();
        let got: Vec<&str> = lex.instances.iter().map(String::as_str).collect();
        assert_eq!(got, vec!["apple", "banana", "seed"]);
    }

    #[test]
    fn relation_filter() {
        let lex = fetch_category_lexicon("fruits", &["/r/IsA"], &fixture()).unwrap();
        let got: Vec<&str> = lex.instances.iter().map(String::as_str).collect();
        assert_eq!(got, vec!["apple", "banana"]);
    }

    #[test]
    fn underscores_become_spaces() {
        let lex = CategoryLexicon::new("animals", ["Polar_Bear", " ", "dog"]);
        assert!(lex.contains("polar bear"));
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn warm_cache_serves_offline() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("lexicons.json");
        let online = lexicon_with_cache("fruits", &crate::corpus::DEFAULT_RELATIONS, Some(&fixture()), &cache).unwrap();
        let offline = lexicon_with_cache("fruits", &crate::corpus::DEFAULT_RELATIONS, None, &cache).unwrap();
        assert_eq!(online.instances, offline.instances);
        assert!(matches!(
            lexicon_with_cache("tools", &crate::corpus::DEFAULT_RELATIONS, None, &cache),
            Err(Error::Retrieval(_))
        ));
    }
}
