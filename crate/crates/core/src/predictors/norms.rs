use std::collections::HashMap;
use std::sync::Arc;

use super::distribution::{PredictionDistribution, WeightedVocabulary};
use super::filter::PredictionFilter;
use crate::cleaning::NounLemmatizer;
use crate::corpus::{AssociationNorms, PredictionContext};

/// Category-conditioned association predictor: p(w | C) is the strength of
/// response w to cue C over the total strength of C's responses.
#[derive(Debug)]
pub struct NormsWalk {
    cues: HashMap<String, Arc<WeightedVocabulary>>,
    lemmatizer: NounLemmatizer,
}

impl NormsWalk {
    pub fn new(norms: &AssociationNorms, filter: Option<&PredictionFilter>) -> Self {
        let cues = norms
            .cues()
            .map(|cue| {
                let responses = norms.responses(cue).unwrap_or_default().iter();
                let weights: Vec<(String, f64)> = match filter {
                    None => responses.cloned().collect(),
                    Some(f) => responses.filter_map(|(w, s)| f.admit(w).map(|l| (l, *s))).collect(),
                };
                (cue.to_string(), Arc::new(WeightedVocabulary::new(weights)))
            })
            .collect();
        let lemmatizer = filter.map(|f| f.lemmatizer().clone()).unwrap_or_default();
        NormsWalk { cues, lemmatizer }
    }

    /// Responses for the category, looked up as given and then as its
    /// singular form.
    fn cue(&self, category: &str) -> Option<&Arc<WeightedVocabulary>> {
        self.cues
            .get(category)
            .or_else(|| self.cues.get(&self.lemmatizer.lemmatize(category)))
    }

    pub fn predict(&self, ctx: &PredictionContext, limit: usize) -> PredictionDistribution {
        match self.cue(&ctx.category) {
            Some(v) => v.censored(&ctx.used_items, limit),
            None => PredictionDistribution::empty(),
        }
    }
}

pub fn predict_norms_walk(ctx: &PredictionContext, norms: &AssociationNorms, limit: usize) -> PredictionDistribution {
    NormsWalk::new(norms, None).predict(ctx, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms() -> AssociationNorms {
        AssociationNorms::from_triples(vec![("animal", "dog", 3.0), ("animal", "cat", 1.0)]).unwrap()
    }

    fn ctx(category: &str, used: &[&str]) -> PredictionContext {
        let history: Vec<String> = used.iter().map(|s| s.to_string()).collect();
        PredictionContext::from_history(category, &history, 0)
    }

    #[test]
    fn strength_ratios() {
        let d = predict_norms_walk(&ctx("animal", &[]), &norms(), 10);
        assert_eq!(d.probability("dog"), Some(0.75));
        assert_eq!(d.probability("cat"), Some(0.25));
        assert!(d.covers("cat"));
    }

    #[test]
    fn censoring() {
        let d = predict_norms_walk(&ctx("animal", &["dog"]), &norms(), 10);
        assert_eq!(d.probability("cat"), Some(1.0));
        let d = predict_norms_walk(&ctx("animal", &["dog", "cat"]), &norms(), 10);
        assert!(d.is_empty());
    }

    #[test]
    fn unknown_category_has_no_coverage() {
        let d = predict_norms_walk(&ctx("tool", &[]), &norms(), 10);
        assert!(d.is_empty());
        assert!(d.coverage().is_empty());
    }

    #[test]
    fn plural_category_falls_back_to_singular_cue() {
        let d = predict_norms_walk(&ctx("animals", &[]), &norms(), 10);
        assert_eq!(d.probability("dog"), Some(0.75));
    }
}
