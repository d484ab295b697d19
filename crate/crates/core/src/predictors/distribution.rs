use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub word: String,
    pub probability: f64,
}

/// Ranking order: higher probability first, then lexicographic.
pub(crate) fn rank_order(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// The set of words a function could emit in a context.
pub type Coverage = Arc<HashSet<String>>;

/// A positive weight per word, pre-ranked, from which censored distributions
/// can be drawn without re-sorting.
#[derive(Debug)]
pub struct WeightedVocabulary {
    ranked: Vec<(String, f64)>,
    weights: HashMap<String, f64>,
    total: f64,
    coverage: Coverage,
}

impl WeightedVocabulary {
    /// Duplicate words have their weights summed; non-positive weights are
    /// dropped.
    pub fn new<I: IntoIterator<Item = (String, f64)>>(weights: I) -> Self {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for (w, x) in weights {
            if x > 0.0 && x.is_finite() {
                *merged.entry(w).or_insert(0.0) += x;
            }
        }
        let total = merged.values().sum();
        let mut ranked: Vec<(String, f64)> = merged.into_iter().collect();
        ranked.sort_by(|a, b| rank_order((&a.0, a.1), (&b.0, b.1)));
        let weights: HashMap<String, f64> = ranked.iter().cloned().collect();
        let coverage = Arc::new(weights.keys().cloned().collect());
        WeightedVocabulary {
            ranked,
            weights,
            total,
            coverage,
        }
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn weight(&self, word: &str) -> Option<f64> {
        self.weights.get(word).copied()
    }

    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    /// Distribution with `used` words removed and the remaining mass
    /// renormalized. The ranked list is cut at `limit`, but probabilities of
    /// words past the cut stay available through
    /// [`PredictionDistribution::probability`].
    pub fn censored(self: &Arc<Self>, used: &BTreeSet<String>, limit: usize) -> PredictionDistribution {
        let removed: f64 = used.iter().filter_map(|u| self.weights.get(u)).sum();
        let normalizer = self.total - removed;
        let mut candidates = Vec::with_capacity(limit.min(self.ranked.len()));
        if normalizer > 0.0 {
            for (w, x) in &self.ranked {
                if candidates.len() >= limit {
                    break;
                }
                if !used.contains(w) {
                    candidates.push(Candidate {
                        word: w.clone(),
                        probability: x / normalizer,
                    });
                }
            }
        }
        PredictionDistribution {
            candidates,
            coverage: self.coverage.clone(),
            tail: (normalizer > 0.0).then(|| Tail {
                vocabulary: self.clone(),
                normalizer,
                censored: used.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
struct Tail {
    vocabulary: Arc<WeightedVocabulary>,
    normalizer: f64,
    censored: BTreeSet<String>,
}

/// Ranked next-item candidates with their probabilities, together with the
/// coverage vocabulary of the function that produced them.
#[derive(Debug, Clone)]
pub struct PredictionDistribution {
    candidates: Vec<Candidate>,
    coverage: Coverage,
    tail: Option<Tail>,
}

impl PredictionDistribution {
    pub fn empty() -> Self {
        PredictionDistribution {
            candidates: Vec::new(),
            coverage: Arc::new(HashSet::new()),
            tail: None,
        }
    }

    /// Ranks words by weight, normalizing by the total weight of all of them
    /// and keeping the top `limit`. Duplicate words have weights summed.
    pub fn from_weights<I>(weights: I, coverage: Coverage, limit: usize) -> Self
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for (w, x) in weights {
            if x > 0.0 && x.is_finite() {
                *merged.entry(w).or_insert(0.0) += x;
            }
        }
        let total: f64 = merged.values().sum();
        let mut candidates: Vec<Candidate> = merged
            .into_iter()
            .map(|(word, x)| Candidate {
                word,
                probability: x / total,
            })
            .collect();
        candidates.sort_by(|a, b| rank_order((&a.word, a.probability), (&b.word, b.probability)));
        candidates.truncate(limit);
        PredictionDistribution {
            candidates,
            coverage,
            tail: None,
        }
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn covers(&self, word: &str) -> bool {
        self.coverage.contains(word)
    }

    /// Probability of `word`, including words ranked past the kept
    /// candidates when the source retains them.
    pub fn probability(&self, word: &str) -> Option<f64> {
        if let Some(tail) = &self.tail {
            if tail.censored.contains(word) {
                return None;
            }
            return tail.vocabulary.weight(word).map(|x| x / tail.normalizer);
        }
        self.candidates.iter().find(|c| c.word == word).map(|c| c.probability)
    }

    /// 1-based rank among the kept candidates.
    pub fn rank(&self, word: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.word == word).map(|i| i + 1)
    }

    pub fn total_mass(&self) -> f64 {
        self.candidates.iter().map(|c| c.probability).sum()
    }

    /// Removes `words` and renormalizes the kept candidates.
    pub fn censor(&self, words: &BTreeSet<String>) -> Self {
        let weights = self
            .candidates
            .iter()
            .filter(|c| !words.contains(&c.word))
            .map(|c| (c.word.clone(), c.probability));
        PredictionDistribution::from_weights(weights, self.coverage.clone(), usize::MAX)
    }

    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.candidates.iter().take(k).map(|c| c.word.as_str())
    }
}
