//! Serialized shapes of the files the commands exchange.

use fluency_core::metrics::format::serialize_fixed6;
use fluency_core::metrics::{AggregateReport, Metric};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub report: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: String,
    pub functions: Vec<String>,
    pub metrics: Vec<MetricReport>,
}

/// `evaluate/aggregate.json`, and one entry of the per-category file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateFile {
    pub lists: usize,
    pub overall: Vec<MetricReport>,
    pub groups: Vec<GroupReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub category: String,
    #[serde(flatten)]
    pub aggregate: AggregateFile,
}

/// `evaluate/aggregate_by_category.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFile {
    pub categories: Vec<CategoryReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub window_size: usize,
    #[serde(serialize_with = "fluency_core::metrics::format::serialize_fixed6_opt")]
    pub atc: Option<f64>,
    #[serde(serialize_with = "fluency_core::metrics::format::serialize_fixed6_opt")]
    pub ca: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub group: String,
    #[serde(serialize_with = "serialize_fixed6")]
    pub atc: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub ca: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverPair {
    pub bo: Option<usize>,
    pub bi: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub window_size: usize,
    #[serde(serialize_with = "serialize_fixed6")]
    pub value: f64,
}

/// Adaptive results for one evaluation k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptK {
    pub k: usize,
    pub selection: String,
    #[serde(serialize_with = "serialize_fixed6")]
    pub bo: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub bi: f64,
    pub bo_function: String,
    pub atc_best: Option<BestPoint>,
    pub ca_best: Option<BestPoint>,
    pub atc_crossover: CrossoverPair,
    pub ca_crossover: CrossoverPair,
    /// CA switch rate over every window size, in percent.
    #[serde(serialize_with = "fluency_core::metrics::format::serialize_fixed6_opt")]
    pub ca_switch_rate: Option<f64>,
    pub curve: Vec<CurveRow>,
    pub choice_share: Vec<Share>,
}

/// `adapt/summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptFile {
    pub window_sizes: Vec<usize>,
    pub results: Vec<AdaptK>,
}
