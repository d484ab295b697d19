use std::sync::Arc;

use super::distribution::{PredictionDistribution, WeightedVocabulary};
use super::filter::PredictionFilter;
use crate::corpus::{FrequencyTable, PredictionContext};

/// Context-free predictor drawing terms in proportion to corpus frequency.
#[derive(Debug)]
pub struct FrequencyBaseline {
    vocabulary: Arc<WeightedVocabulary>,
}

impl FrequencyBaseline {
    /// With a filter, terms are mapped to their admitted lemma up front;
    /// censoring commutes with that mapping, so filtering once is enough.
    pub fn new(freq: &FrequencyTable, filter: Option<&PredictionFilter>) -> Self {
        let terms = freq.terms().into_iter();
        let weights: Vec<(String, f64)> = match filter {
            None => terms.map(|(t, c)| (t, c as f64)).collect(),
            Some(f) => terms.filter_map(|(t, c)| f.admit(&t).map(|l| (l, c as f64))).collect(),
        };
        FrequencyBaseline {
            vocabulary: Arc::new(WeightedVocabulary::new(weights)),
        }
    }

    pub fn predict(&self, ctx: &PredictionContext, limit: usize) -> PredictionDistribution {
        self.vocabulary.censored(&ctx.used_items, limit)
    }
}

/// p(t) = count(t) / (unigram total + bigram total), censored by the used
/// items. Bigrams are emitted space-joined.
pub fn predict_random_baseline(ctx: &PredictionContext, freq: &FrequencyTable, limit: usize) -> PredictionDistribution {
    FrequencyBaseline::new(freq, None).predict(ctx, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(&str, u64)]) -> FrequencyTable {
        let mut t = FrequencyTable::default();
        for (w, c) in pairs {
            t.add(w, *c).unwrap();
        }
        t
    }

    fn ctx(used: &[&str], category: &str) -> PredictionContext {
        let history: Vec<String> = used.iter().map(|s| s.to_string()).collect();
        PredictionContext::from_history(category, &history, 1)
    }

    #[test]
    fn ranks_by_count() {
        let t = table(&[("the", 100), ("dog", 50), ("cat", 50)]);
        let d = predict_random_baseline(&ctx(&[], "animals"), &t, 10);
        let words: Vec<&str> = d.top(3).collect();
        assert_eq!(words, vec!["the", "cat", "dog"]);
    }

    #[test]
    fn relative_frequency() {
        let t = table(&[("a", 3), ("b", 1)]);
        let d = predict_random_baseline(&ctx(&[], "x"), &t, 10);
        assert_eq!(d.probability("a"), Some(0.75));
        let d = predict_random_baseline(&ctx(&["a"], "x"), &t, 10);
        assert_eq!(d.probability("b"), Some(1.0));
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn context_independent() {
        let t = table(&[("a", 3), ("b", 1), ("c d", 2)]);
        let mut c1 = ctx(&["a"], "x");
        let mut c2 = ctx(&["a"], "y");
        c1.preceding_items = vec!["q".into()];
        c2.preceding_items.clear();
        let d1 = predict_random_baseline(&c1, &t, 10);
        let d2 = predict_random_baseline(&c2, &t, 10);
        assert_eq!(d1.candidates(), d2.candidates());
        assert_eq!(d1.probability("c d"), Some(2.0 / 3.0));
    }

    #[test]
    fn filtered_baseline_drops_stopwords() {
        let t = table(&[("the", 100), ("dogs", 30), ("dog", 20)]);
        let b = FrequencyBaseline::new(&t, Some(&PredictionFilter::default()));
        let d = b.predict(&ctx(&[], "animals"), 10);
        assert_eq!(d.len(), 1);
        assert_eq!(d.probability("dog"), Some(1.0));
    }
}
