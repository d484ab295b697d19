use std::cmp::Ordering;

use super::backend::MaskScoringBackend;
use crate::{Error, Result};

pub const FIRST_MASK_WIDTH: usize = 100;
pub const NEXT_MASK_WIDTH: usize = 15;

/// A fully resolved multi-mask prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedCandidate {
    pub word: String,
    pub pieces: Vec<String>,
    /// Product of the per-step renormalized probabilities.
    pub probability: f64,
    pub mask_count: usize,
}

/// Joins subword pieces as they would read in running text. `##` pieces
/// continue the previous one; pieces carrying a word-start marker (`Ġ` or
/// `▁`) begin a new word except at the very start.
pub fn surface(pieces: &[String]) -> String {
    let mut out = String::new();
    for (i, piece) in pieces.iter().enumerate() {
        if let Some(rest) = piece.strip_prefix("##") {
            out.push_str(rest);
        } else if let Some(rest) = piece.strip_prefix('Ġ').or_else(|| piece.strip_prefix('▁')) {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(rest);
        } else {
            out.push_str(piece);
        }
    }
    out
}

pub fn detokenize(pieces: &[String]) -> String {
    surface(pieces).trim().to_lowercase()
}

/// `prompt` with the first `pieces.len()` of its `mask_count` adjacent masks
/// replaced by the pieces' surface text.
pub fn substitute(prompt: &str, mask_token: &str, mask_count: usize, pieces: &[String]) -> Result<String> {
    let run = mask_token.repeat(mask_count);
    let at = prompt
        .find(&run)
        .ok_or_else(|| Error::Validation(format!("prompt {prompt:?} lacks {mask_count} adjacent masks")))?;
    let remaining = mask_count
        .checked_sub(pieces.len())
        .ok_or_else(|| Error::Validation(format!("{} pieces for {mask_count} masks", pieces.len())))?;
    Ok(format!(
        "{}{}{}{}",
        &prompt[..at],
        surface(pieces),
        mask_token.repeat(remaining),
        &prompt[at + run.len()..]
    ))
}

/// Default per-step beam widths: 100 for the first mask and 15 for each
/// later one; a single mask is read out to its whole budget.
pub fn default_widths(mask_count: usize, single_mask_budget: usize) -> Vec<usize> {
    if mask_count == 1 {
        return vec![single_mask_budget];
    }
    let mut widths = vec![FIRST_MASK_WIDTH];
    widths.resize(mask_count, NEXT_MASK_WIDTH);
    widths
}

pub(crate) fn candidate_order(a: &DecodedCandidate, b: &DecodedCandidate) -> Ordering {
    b.probability
        .total_cmp(&a.probability)
        .then_with(|| a.word.cmp(&b.word))
        .then_with(|| a.pieces.cmp(&b.pieces))
}

/// Greedy multi-mask decoding. At every step each partial sequence is
/// substituted into the prompt, the next mask's top `widths[step]` tokens
/// are renormalized to sum to 1, and probabilities chain by product.
/// Returns every resolved sequence, ranked.
pub fn fill_masks_greedy(
    backend: &dyn MaskScoringBackend,
    prompt: &str,
    mask_count: usize,
    widths: &[usize],
) -> Result<Vec<DecodedCandidate>> {
    decode(backend, prompt, mask_count, widths, None)
}

/// As [`fill_masks_greedy`], but keeps only the `beam` most probable partial
/// sequences between steps.
pub fn fill_masks_beam(
    backend: &dyn MaskScoringBackend,
    prompt: &str,
    mask_count: usize,
    widths: &[usize],
    beam: usize,
) -> Result<Vec<DecodedCandidate>> {
    decode(backend, prompt, mask_count, widths, Some(beam))
}

fn decode(
    backend: &dyn MaskScoringBackend,
    prompt: &str,
    mask_count: usize,
    widths: &[usize],
    beam: Option<usize>,
) -> Result<Vec<DecodedCandidate>> {
    if widths.len() != mask_count || mask_count == 0 {
        return Err(Error::Validation(format!(
            "need one width per mask: {} widths for {mask_count} masks",
            widths.len()
        )));
    }
    let mask = backend.mask_token();
    let mut partials: Vec<DecodedCandidate> = vec![DecodedCandidate {
        word: String::new(),
        pieces: Vec::new(),
        probability: 1.0,
        mask_count,
    }];
    for (step, &width) in widths.iter().enumerate() {
        let mut next = Vec::with_capacity(partials.len() * width);
        for partial in &partials {
            let query = substitute(prompt, mask, mask_count, &partial.pieces)?;
            let rankings = backend.fill_mask(&query, width)?;
            let ranking = rankings.first().ok_or_else(|| Error::Backend {
                prompt: query.clone(),
                message: "no mask ranking returned".into(),
            })?;
            let kept = &ranking[..width.min(ranking.len())];
            let mass: f64 = kept.iter().map(|t| t.probability).sum();
            if mass <= 0.0 {
                continue;
            }
            for t in kept {
                let mut pieces = partial.pieces.clone();
                pieces.push(t.token.clone());
                next.push(DecodedCandidate {
                    word: detokenize(&pieces),
                    pieces,
                    probability: partial.probability * (t.probability / mass),
                    mask_count,
                });
            }
        }
        partials = next;
        if let Some(b) = beam {
            if step + 1 < mask_count && partials.len() > b {
                partials.sort_by(candidate_order);
                partials.truncate(b);
            }
        }
    }
    partials.sort_by(candidate_order);
    Ok(partials)
}
