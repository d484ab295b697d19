//! Masked-language-model predictor: prompt templates, multi-mask greedy
//! decoding over a pluggable scoring backend, frequency rescaling and
//! prediction filtering.

mod assemble;
mod backend;
mod decode;
mod prompt;

use std::sync::Arc;

pub use assemble::{assemble_prediction_set, BUDGETS};
pub use backend::{
    validate_rankings, BoundedBackend, CachedBackend, FixtureBackend, FixtureFile, Health, MaskRankings,
    MaskScoringBackend, ServiceBackend, TokenScore, WIRE_VERSION,
};
pub use decode::{
    default_widths, detokenize, fill_masks_beam, fill_masks_greedy, substitute, surface, DecodedCandidate,
    FIRST_MASK_WIDTH, NEXT_MASK_WIDTH,
};
pub use prompt::{build_prompt, pluralize, MAX_MASKS, TEMPLATE_IDS};

use crate::corpus::{FrequencyTable, PredictionContext};
use crate::predictors::{PredictionDistribution, PredictionFilter};
use crate::Result;

/// Decoding limits for masked-LM functions.
#[derive(Debug, Clone, PartialEq)]
pub struct MlmSettings {
    /// Kept candidates per mask count.
    pub budgets: [usize; MAX_MASKS],
    pub first_width: usize,
    pub next_width: usize,
    /// Largest mask count queried.
    pub max_masks: usize,
    /// Prune partial sequences to the group budget between steps. Exact
    /// enumeration multiplies backend calls by the beam widths.
    pub beam_prune: bool,
}

impl Default for MlmSettings {
    fn default() -> Self {
        MlmSettings {
            budgets: BUDGETS,
            first_width: FIRST_MASK_WIDTH,
            next_width: NEXT_MASK_WIDTH,
            max_masks: MAX_MASKS,
            beam_prune: true,
        }
    }
}

impl MlmSettings {
    pub fn widths(&self, mask_count: usize) -> Vec<usize> {
        if mask_count == 1 {
            return vec![self.budgets[0]];
        }
        let mut w = vec![self.first_width];
        w.resize(mask_count, self.next_width);
        w
    }
}

/// Raw decoded groups for mask counts `1..=settings.max_masks`, each cut to
/// its budget.
pub fn decode_groups(
    backend: &dyn MaskScoringBackend,
    template_id: u8,
    ctx: &PredictionContext,
    context_size: usize,
    settings: &MlmSettings,
) -> Result<Vec<Vec<DecodedCandidate>>> {
    let start = ctx.preceding_items.len().saturating_sub(context_size);
    let context = &ctx.preceding_items[start..];
    let mut groups = Vec::with_capacity(settings.max_masks);
    for m in 1..=settings.max_masks.min(MAX_MASKS) {
        let prompt = build_prompt(template_id, &ctx.category, context, m, backend.mask_token())?;
        let budget = settings.budgets[m - 1];
        let widths = settings.widths(m);
        let mut group = if settings.beam_prune {
            fill_masks_beam(backend, &prompt, m, &widths, budget)?
        } else {
            fill_masks_greedy(backend, &prompt, m, &widths)?
        };
        group.truncate(budget);
        groups.push(group);
    }
    Ok(groups)
}

/// Full masked-LM prediction for one context: decode every mask count,
/// rescale by frequency, merge, filter, and keep the top `limit`.
#[allow(clippy::too_many_arguments)]
pub fn predict_mlm(
    backend: &dyn MaskScoringBackend,
    template_id: u8,
    context_size: usize,
    ctx: &PredictionContext,
    freq: &FrequencyTable,
    filter: &PredictionFilter,
    settings: &MlmSettings,
    limit: usize,
) -> Result<PredictionDistribution> {
    let groups = decode_groups(backend, template_id, ctx, context_size, settings)?;
    let merged = assemble_prediction_set(&groups, freq);
    let coverage = Arc::new(filter.vocabulary(merged.coverage().iter()));
    Ok(filter.apply_with_coverage(&merged, &ctx.used_items, coverage, limit))
}

/// A masked-LM function bound to its backend and resources.
pub struct MlmPredictor {
    pub(crate) backend: Arc<dyn MaskScoringBackend>,
    pub(crate) template_id: u8,
    pub(crate) context_size: usize,
    pub(crate) freq: Arc<FrequencyTable>,
    pub(crate) filter: Arc<PredictionFilter>,
    pub(crate) settings: MlmSettings,
}

impl MlmPredictor {
    pub fn predict(&self, ctx: &PredictionContext, limit: usize) -> Result<PredictionDistribution> {
        predict_mlm(
            self.backend.as_ref(),
            self.template_id,
            self.context_size,
            ctx,
            &self.freq,
            &self.filter,
            &self.settings,
            limit,
        )
    }
}
