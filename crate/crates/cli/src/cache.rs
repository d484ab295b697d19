//! On-disk cache of per-item outcomes, one file per function.
//!
//! A file is reused only when its fingerprint matches the function's
//! current spec, settings and resource digests; within a file, a list entry
//! is reused only when the list's items are unchanged.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::ItemOutcome;
use fluency_core::{Error, FluencyList, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// File-name-safe rendering of a label.
pub fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

/// Digest of a list's category and items.
pub fn items_hash(list: &FluencyList) -> String {
    let mut h = Sha256::new();
    h.update(list.category.as_bytes());
    for item in &list.items {
        h.update([0u8]);
        h.update(item.as_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedList {
    list_id: String,
    items_hash: String,
    outcomes: Vec<ItemOutcome>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    function: String,
    fingerprint: String,
    lists: Vec<CachedList>,
}

pub struct OutcomeCache {
    dir: PathBuf,
}

impl OutcomeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        OutcomeCache { dir: dir.into() }
    }

    /// Labels that differ only in unsafe characters still get distinct
    /// files through the hash suffix.
    pub fn path(&self, label: &str) -> PathBuf {
        self.dir
            .join(format!("{}-{}.json", sanitize(label), short_hash(label.as_bytes())))
    }

    /// Cached outcomes by list id, keeping only entries whose items hash
    /// still matches. A stale or unreadable file yields nothing.
    pub fn load(&self, label: &str, fingerprint: &str, lists: &[FluencyList]) -> HashMap<String, Vec<ItemOutcome>> {
        let path = self.path(label);
        let Some(file) = read_file(&path) else {
            return HashMap::new();
        };
        if file.function != label || file.fingerprint != fingerprint {
            log::info!("{}: fingerprint changed, recomputing {label}", path.display());
            return HashMap::new();
        }
        let current: HashMap<String, String> = lists.iter().map(|l| (l.id(), items_hash(l))).collect();
        file.lists
            .into_iter()
            .filter(|c| current.get(&c.list_id) == Some(&c.items_hash))
            .map(|c| (c.list_id, c.outcomes))
            .collect()
    }

    pub fn store(
        &self,
        label: &str,
        fingerprint: &str,
        lists: &[FluencyList],
        outcomes: &[Vec<ItemOutcome>],
    ) -> Result<()> {
        if lists.len() != outcomes.len() {
            return Err(Error::Validation(format!("cache for {label}: outcome count mismatch")));
        }
        let file = CacheFile {
            function: label.to_string(),
            fingerprint: fingerprint.to_string(),
            lists: lists
                .iter()
                .zip(outcomes)
                .map(|(l, o)| CachedList {
                    list_id: l.id(),
                    items_hash: items_hash(l),
                    outcomes: o.clone(),
                })
                .collect(),
        };
        let mut bytes = serde_json::to_vec(&file).expect("cache serializes");
        bytes.push(b'\n');
        write_atomic(&self.path(label), &bytes)
    }
}

fn read_file(path: &Path) -> Option<CacheFile> {
    let text = std::fs::read_to_string(path).ok()?;
    match serde_json::from_str(&text) {
        Ok(f) => Some(f),
        Err(e) => {
            log::warn!("{}: ignoring unreadable cache ({e})", path.display());
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(items: &[&str]) -> FluencyList {
        FluencyList {
            participant: "p".into(),
            list_index: 0,
            category: "animals".into(),
            items: items.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn outcome(p: Option<f64>) -> ItemOutcome {
        ItemOutcome {
            position: 1,
            in_coverage: p.is_some(),
            probability: p,
            rank: p.map(|_| 3),
        }
    }

    #[test]
    fn round_trip_is_exact_and_checks_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OutcomeCache::new(dir.path());
        let lists = vec![
            list(&["dog"]),
            FluencyList {
                list_index: 1,
                ..list(&["cat"])
            },
        ];
        let outcomes = vec![vec![outcome(Some(0.1 + 0.2))], vec![outcome(None)]];
        cache.store("glove/ct3", "fp", &lists, &outcomes).unwrap();
        let got = cache.load("glove/ct3", "fp", &lists);
        assert_eq!(got[&lists[0].id()], outcomes[0]);
        assert_eq!(got[&lists[1].id()], outcomes[1]);
        assert!(cache.load("glove/ct3", "other", &lists).is_empty());

        let changed = vec![list(&["dog", "cat"]), lists[1].clone()];
        let got = cache.load("glove/ct3", "fp", &changed);
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn file_names_are_safe_and_distinct() {
        let cache = OutcomeCache::new("/x");
        let a = cache.path("m/p1-ct0");
        let b = cache.path("m_p1-ct0");
        assert_ne!(a, b);
        assert!(a.file_name().unwrap().to_str().unwrap().starts_with("m_p1-ct0-"));
    }
}
