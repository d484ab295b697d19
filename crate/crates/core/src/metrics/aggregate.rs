use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::format::serialize_fixed6;
use super::matrix::ScoreMatrix;
use crate::{Error, Result};

/// Avg, BO and BI of a score matrix, with the functions attaining them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    #[serde(serialize_with = "serialize_fixed6")]
    pub avg: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub bo: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub bi: f64,
    pub bo_function: String,
    /// Per-list best function, in column order.
    pub bi_functions: Vec<String>,
}

/// Avg is the mean of all cells; BO the largest per-function mean; BI the
/// mean over lists of the per-list best. Ties go to the earliest function.
pub fn aggregate(matrix: &ScoreMatrix) -> Result<AggregateReport> {
    if matrix.is_empty() {
        return Err(Error::Validation(format!(
            "cannot aggregate an empty {} matrix",
            matrix.metric
        )));
    }
    let cells = matrix.cells();
    let n_functions = matrix.functions.len() as f64;
    let n_lists = matrix.lists.len() as f64;

    let total: f64 = cells.iter().flatten().sum();
    let avg = total / (n_functions * n_lists);

    let mut bo_row = 0;
    let mut bo = f64::NEG_INFINITY;
    for (f, row) in cells.iter().enumerate() {
        let mean = row.iter().sum::<f64>() / n_lists;
        if mean > bo {
            bo = mean;
            bo_row = f;
        }
    }

    let mut best_sum = 0.0;
    let mut bi_functions = Vec::with_capacity(matrix.lists.len());
    for l in 0..matrix.lists.len() {
        let mut best = 0;
        for f in 1..cells.len() {
            if cells[f][l] > cells[best][l] {
                best = f;
            }
        }
        best_sum += cells[best][l];
        bi_functions.push(matrix.functions[best].clone());
    }
    let bi = best_sum / n_lists;

    Ok(AggregateReport {
        // avg <= bo holds exactly; the clamp only absorbs rounding in the
        // grand sum.
        avg: avg.min(bo),
        bo,
        bi,
        bo_function: matrix.functions[bo_row].clone(),
        bi_functions,
    })
}

/// Aggregates each category's lists separately. Lists without a category
/// are left out.
pub fn per_category_breakdown<F>(matrix: &ScoreMatrix, category_of: F) -> Result<BTreeMap<String, AggregateReport>>
where
    F: Fn(&str) -> Option<String>,
{
    let mut columns: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (c, list) in matrix.lists.iter().enumerate() {
        if let Some(cat) = category_of(list) {
            columns.entry(cat).or_default().push(c);
        }
    }
    let rows: Vec<usize> = (0..matrix.functions.len()).collect();
    columns
        .into_iter()
        .map(|(cat, cols)| Ok((cat, aggregate(&matrix.select(&rows, &cols))?)))
        .collect()
}
