use serde::{Deserialize, Serialize};

use super::format::fixed6;
use super::outcome::Metric;
use crate::{Error, Result};

/// Dense per-(function, list) scores for one metric. Rows follow registry
/// order, columns dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub metric: Metric,
    pub functions: Vec<String>,
    pub lists: Vec<String>,
    cells: Vec<Vec<f64>>,
}

/// Metadata written next to a matrix CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub metric: Metric,
    pub rows: usize,
    pub columns: usize,
    pub functions: Vec<String>,
    pub lists: Vec<String>,
    pub float_format: String,
}

impl ScoreMatrix {
    pub fn new(metric: Metric, functions: Vec<String>, lists: Vec<String>, cells: Vec<Vec<f64>>) -> Result<Self> {
        if cells.len() != functions.len() || cells.iter().any(|r| r.len() != lists.len()) {
            return Err(Error::Validation(format!(
                "matrix for {metric} is not {}x{}",
                functions.len(),
                lists.len()
            )));
        }
        if let Some(x) = cells.iter().flatten().find(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("matrix for {metric} holds {x}")));
        }
        Ok(ScoreMatrix {
            metric,
            functions,
            lists,
            cells,
        })
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn get(&self, function: usize, list: usize) -> f64 {
        self.cells[function][list]
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty() || self.lists.is_empty()
    }

    /// Sub-matrix over the given row and column indices, in the given order.
    pub fn select(&self, rows: &[usize], columns: &[usize]) -> ScoreMatrix {
        ScoreMatrix {
            metric: self.metric,
            functions: rows.iter().map(|&r| self.functions[r].clone()).collect(),
            lists: columns.iter().map(|&c| self.lists[c].clone()).collect(),
            cells: rows
                .iter()
                .map(|&r| columns.iter().map(|&c| self.cells[r][c]).collect())
                .collect(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> ScoreMatrix {
        let columns: Vec<usize> = (0..self.lists.len()).collect();
        self.select(rows, &columns)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = std::iter::once("function").chain(self.lists.iter().map(String::as_str));
        w.write_record(header).map_err(csv_error)?;
        for (label, row) in self.functions.iter().zip(&self.cells) {
            let values = row.iter().map(|x| fixed6(*x));
            w.write_record(std::iter::once(label.clone()).chain(values))
                .map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn from_csv(metric: Metric, bytes: &[u8]) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let header = r.headers().map_err(csv_error)?.clone();
        if header.get(0) != Some("function") {
            return Err(Error::Validation(
                "matrix CSV must start with a `function` column".into(),
            ));
        }
        let lists: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut functions = Vec::new();
        let mut cells = Vec::new();
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            functions.push(record.get(0).unwrap_or_default().to_string());
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad matrix cell {v:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            cells.push(row);
        }
        ScoreMatrix::new(metric, functions, lists, cells)
    }

    pub fn sidecar(&self) -> MatrixSidecar {
        MatrixSidecar {
            metric: self.metric,
            rows: self.functions.len(),
            columns: self.lists.len(),
            functions: self.functions.clone(),
            lists: self.lists.clone(),
            float_format: "fixed, 6 decimal places".into(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Validation(format!("matrix CSV: {e}"))
}
