//! Next-item prediction models, scoring metrics and adaptive function
//! selection for semantic fluency lists.

pub mod adaptive;
pub mod cleaning;
pub mod corpus;
mod error;
pub mod fsutil;
pub mod metrics;
pub mod mlm;
pub mod predictors;

pub use adaptive::{AdaptiveConfig, AdaptiveTrace, SelectionMetric};
pub use cleaning::{CleaningReport, NounLemmatizer};
pub use corpus::{AssociationNorms, CategoryLexicon, EmbeddingTable, FluencyList, FrequencyTable, PredictionContext};
pub use error::{Error, ErrorClass, Result};
pub use metrics::{AggregateReport, ItemOutcome, Metric, ScoreMatrix};
pub use predictors::{Approach, FunctionSpec, PredictionDistribution};
