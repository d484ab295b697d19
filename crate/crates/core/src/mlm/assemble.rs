use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use super::decode::DecodedCandidate;
use crate::corpus::FrequencyTable;
use crate::predictors::PredictionDistribution;

/// Maximum kept candidates for one to four masks.
pub const BUDGETS: [usize; 4] = [3000, 1500, 400, 100];

/// Merges the per-mask-count groups into one distribution. Each candidate
/// is weighted by the relative corpus frequency of its word (the smallest
/// observed relative frequency for unseen words); a word found in several
/// groups keeps its largest weight; the result is renormalized.
pub fn assemble_prediction_set(groups: &[Vec<DecodedCandidate>], freq: &FrequencyTable) -> PredictionDistribution {
    let floor = freq.min_relative_frequency().unwrap_or(1.0);
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for c in groups.iter().flatten() {
        if c.word.is_empty() {
            continue;
        }
        let w = c.probability * freq.relative_frequency(&c.word).unwrap_or(floor);
        let slot = weights.entry(c.word.clone()).or_insert(0.0);
        if w > *slot {
            *slot = w;
        }
    }
    let coverage: HashSet<String> = weights.keys().cloned().collect();
    PredictionDistribution::from_weights(weights, Arc::new(coverage), usize::MAX)
}
