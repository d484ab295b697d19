use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{FluencyList, PredictionContext};
use crate::predictors::{Predict, PredictionDistribution};
use crate::{Error, Result};

/// Probability assigned to in-coverage items that received no mass.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// How one list item fared under one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    /// 1-based position in the list.
    pub position: usize,
    pub in_coverage: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub probability: Option<f64>,
    /// 1-based rank among the predicted candidates.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rank: Option<usize>,
}

impl ItemOutcome {
    pub fn from_distribution(dist: &PredictionDistribution, word: &str, position: usize) -> Self {
        let rank = dist.rank(word);
        let probability = dist.probability(word);
        ItemOutcome {
            position,
            in_coverage: dist.covers(word) || rank.is_some() || probability.is_some(),
            probability,
            rank,
        }
    }

    pub fn hit(&self, k: usize) -> bool {
        self.rank.is_some_and(|r| r <= k)
    }

    /// Natural-log probability with the floor applied; `None` outside
    /// coverage.
    pub fn log_probability(&self) -> Option<f64> {
        self.in_coverage
            .then(|| self.probability.unwrap_or(0.0).max(PROBABILITY_FLOOR).ln())
    }
}

/// Scores `predictor` on every item of `list`, feeding it the true
/// preceding items.
pub fn score_list(predictor: &dyn Predict, list: &FluencyList, limit: usize) -> Result<Vec<ItemOutcome>> {
    let window = predictor.spec().window();
    let mut outcomes = Vec::with_capacity(list.items.len());
    for (i, word) in list.items.iter().enumerate() {
        let ctx = PredictionContext::from_history(&list.category, &list.items[..i], window);
        let dist = predictor.predict(&ctx, limit).map_err(|e| {
            e.context(format!(
                "function {} on list {} position {}",
                predictor.spec().label,
                list.id(),
                i + 1
            ))
        })?;
        outcomes.push(ItemOutcome::from_distribution(&dist, word, i + 1));
    }
    Ok(outcomes)
}

/// |L ∩ W_f| / |L|.
pub fn coverage(outcomes: &[ItemOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.in_coverage).count() as f64 / outcomes.len() as f64
}

/// Mean natural-log probability over in-coverage items. A list with no
/// in-coverage item scores the log of the probability floor.
pub fn scaled_log_likelihood(outcomes: &[ItemOutcome]) -> f64 {
    // Incremental mean: exact when every term is equal.
    let mut mean = 0.0;
    let mut n = 0u32;
    for lp in outcomes.iter().filter_map(ItemOutcome::log_probability) {
        n += 1;
        mean += (lp - mean) / f64::from(n);
    }
    if n == 0 {
        PROBABILITY_FLOOR.ln()
    } else {
        mean
    }
}

/// Fraction of items ranked within the top `k`.
pub fn top_k_accuracy(outcomes: &[ItemOutcome], k: usize) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.hit(k)).count() as f64 / outcomes.len() as f64
}

/// Per-list score a matrix can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Coverage,
    ScaledLl,
    TopK(usize),
}

impl Metric {
    pub fn evaluate(self, outcomes: &[ItemOutcome]) -> f64 {
        match self {
            Metric::Coverage => coverage(outcomes),
            Metric::ScaledLl => scaled_log_likelihood(outcomes),
            Metric::TopK(k) => top_k_accuracy(outcomes, k),
        }
    }

    /// Every metric for the given k values: coverage, scaled LL, then top-k
    /// in ascending k.
    pub fn all(k_values: &[usize]) -> Vec<Metric> {
        let mut ks = k_values.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let mut out = vec![Metric::Coverage, Metric::ScaledLl];
        out.extend(ks.into_iter().map(Metric::TopK));
        out
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Coverage => f.write_str("coverage"),
            Metric::ScaledLl => f.write_str("scaled_ll"),
            Metric::TopK(k) => write!(f, "top_{k}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coverage" => Ok(Metric::Coverage),
            "scaled_ll" => Ok(Metric::ScaledLl),
            _ => s
                .strip_prefix("top_")
                .and_then(|k| k.parse().ok())
                .filter(|k| *k > 0)
                .map(Metric::TopK)
                .ok_or_else(|| Error::Validation(format!("unknown metric {s:?}"))),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All metrics of one (function, list) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ListSummary {
    pub items: usize,
    #[serde(serialize_with = "super::format::serialize_fixed6")]
    pub coverage: f64,
    #[serde(serialize_with = "super::format::serialize_fixed6")]
    pub scaled_ll: f64,
    #[serde(serialize_with = "super::format::serialize_fixed6_map")]
    pub top_k: BTreeMap<String, f64>,
}

impl ListSummary {
    pub fn new(outcomes: &[ItemOutcome], k_values: &[usize]) -> Self {
        ListSummary {
            items: outcomes.len(),
            coverage: coverage(outcomes),
            scaled_ll: scaled_log_likelihood(outcomes),
            top_k: k_values
                .iter()
                .map(|&k| (k.to_string(), top_k_accuracy(outcomes, k)))
                .collect(),
        }
    }
}
