//! Per-list scoring (coverage, scaled log-likelihood, top-k accuracy),
//! Avg/BO/BI aggregation, and the analyses run on adaptive traces.

mod aggregate;
mod analysis;
pub mod format;
mod matrix;
mod outcome;

pub use aggregate::{aggregate, per_category_breakdown, AggregateReport};
pub use analysis::{choice_share, crossover_points, switch_rate, Crossover};
pub use matrix::{MatrixSidecar, ScoreMatrix};
pub use outcome::{
    coverage, scaled_log_likelihood, score_list, top_k_accuracy, ItemOutcome, ListSummary, Metric, PROBABILITY_FLOOR,
};
