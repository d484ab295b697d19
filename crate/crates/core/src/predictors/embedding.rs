use std::collections::HashSet;
use std::sync::Arc;

use super::distribution::{rank_order, PredictionDistribution};
use super::filter::PredictionFilter;
use crate::cleaning::NounLemmatizer;
use crate::corpus::{EmbeddingTable, PredictionContext};

/// Ranks vocabulary words by their mean cosine similarity to the category
/// and the most recent items.
#[derive(Debug)]
pub struct EmbeddingSimilarity {
    table: Arc<EmbeddingTable>,
    context_size: usize,
    candidate_rows: usize,
    coverage: Arc<HashSet<String>>,
    filter: Option<Arc<PredictionFilter>>,
    lemmatizer: NounLemmatizer,
}

impl EmbeddingSimilarity {
    /// `max_candidates` keeps only the first rows of the table as candidates
    /// (embedding files are usually sorted by frequency).
    pub fn new(
        table: Arc<EmbeddingTable>,
        context_size: usize,
        max_candidates: Option<usize>,
        filter: Option<Arc<PredictionFilter>>,
    ) -> Self {
        let candidate_rows = max_candidates.unwrap_or(usize::MAX).min(table.len());
        let words = &table.words()[..candidate_rows];
        let coverage = match &filter {
            Some(f) => f.vocabulary(words),
            None => words.iter().cloned().collect(),
        };
        let lemmatizer = filter.as_ref().map(|f| f.lemmatizer().clone()).unwrap_or_default();
        EmbeddingSimilarity {
            table,
            context_size,
            candidate_rows,
            coverage: Arc::new(coverage),
            filter,
            lemmatizer,
        }
    }

    /// Category row first, then the last `context_size` preceding items that
    /// have vectors.
    fn query_rows(&self, ctx: &PredictionContext) -> Vec<usize> {
        let mut rows = Vec::new();
        let category = self
            .table
            .row(&ctx.category)
            .or_else(|| self.table.row(&self.lemmatizer.lemmatize(&ctx.category)));
        rows.extend(category);
        let start = ctx.preceding_items.len().saturating_sub(self.context_size);
        for item in &ctx.preceding_items[start..] {
            if let Some(r) = self.table.row(item) {
                if !rows.contains(&r) {
                    rows.push(r);
                }
            }
        }
        rows
    }

    /// Mean cosine of every eligible candidate, ranked.
    pub fn scores(&self, ctx: &PredictionContext) -> Vec<(usize, f64)> {
        let query = self.query_rows(ctx);
        if query.is_empty() {
            return Vec::new();
        }
        let words = self.table.words();
        let mut scored: Vec<(usize, f64)> = (0..self.candidate_rows)
            .filter(|r| !query.contains(r) && !ctx.used_items.contains(&words[*r]))
            .map(|r| {
                let sum: f64 = query.iter().map(|&q| self.table.row_cosine(r, q)).sum();
                (r, sum / query.len() as f64)
            })
            .collect();
        scored.sort_by(|a, b| rank_order((&words[a.0], a.1), (&words[b.0], b.1)));
        scored
    }

    pub fn predict(&self, ctx: &PredictionContext, limit: usize) -> PredictionDistribution {
        let mut scored = self.scores(ctx);
        if scored.is_empty() {
            return PredictionDistribution::empty();
        }
        scored.truncate(limit);
        let max = scored[0].1;
        let words = self.table.words();
        let weights = scored.iter().map(|&(r, s)| (words[r].clone(), (s - max).exp()));
        match &self.filter {
            None => PredictionDistribution::from_weights(weights, self.coverage.clone(), limit),
            Some(f) => {
                let raw = PredictionDistribution::from_weights(weights, self.coverage.clone(), limit);
                f.apply_with_coverage(&raw, &ctx.used_items, self.coverage.clone(), limit)
            }
        }
    }
}

pub fn predict_embedding(
    ctx: &PredictionContext,
    table: &Arc<EmbeddingTable>,
    context_size: usize,
    limit: usize,
) -> PredictionDistribution {
    EmbeddingSimilarity::new(table.clone(), context_size, None, None).predict(ctx, limit)
}
