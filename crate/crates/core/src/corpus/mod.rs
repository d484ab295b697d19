//! Data model and loaders for fluency datasets and the lexical resources the
//! predictors draw on.
//!
//! Every loaded artifact is immutable after construction and can be shared
//! across worker threads behind an `Arc`.

mod conceptnet;
mod embedding;
mod fluency;
mod frequency;
mod lexicon;
mod norms;

use std::collections::BTreeSet;

pub use conceptnet::{
    category_concept, Edge, EdgePage, EdgeSource, HttpEdgeSource, RecordedEdgeSource, DEFAULT_RELATIONS,
};
pub use embedding::{cosine, load_embeddings, EmbeddingTable};
pub use fluency::{
    load_fluency_dataset, write_fluency_dataset, ColumnMap, DatasetFormat, FluencyList, RawDataset, RowPosition,
};
pub use frequency::{load_frequency_table, FrequencyTable};
pub use lexicon::{
    fetch_category_lexicon, lexicon_with_cache, load_lexicon_cache, save_lexicon_cache, CategoryLexicon,
};
pub use norms::{load_association_norms, AssociationNorms};

/// What a predictor sees before guessing item `n`: the category cue, the
/// most recent preceding items (oldest first) and every item produced so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionContext {
    pub category: String,
    pub preceding_items: Vec<String>,
    pub used_items: BTreeSet<String>,
}

impl PredictionContext {
    /// Context for the item following `history`, keeping at most `window`
    /// preceding items.
    pub fn from_history(category: &str, history: &[String], window: usize) -> Self {
        let start = history.len().saturating_sub(window);
        PredictionContext {
            category: category.to_string(),
            preceding_items: history[start..].to_vec(),
            used_items: history.iter().cloned().collect(),
        }
    }

    pub fn is_used(&self, word: &str) -> bool {
        self.used_items.contains(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_window_is_a_suffix() {
        let history: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let ctx = PredictionContext::from_history("x", &history, 2);
        assert_eq!(ctx.preceding_items, vec!["c", "d"]);
        assert_eq!(ctx.used_items.len(), 4);

        let ctx = PredictionContext::from_history("x", &history, 0);
        assert!(ctx.preceding_items.is_empty());
        assert!(ctx.is_used("a"));

        let ctx = PredictionContext::from_history("x", &history, 10);
        assert_eq!(ctx.preceding_items.len(), 4);
    }
}
