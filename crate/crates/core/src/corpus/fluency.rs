use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One participant's ordered list for a category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluencyList {
    pub participant: String,
    pub list_index: u32,
    pub category: String,
    pub items: Vec<String>,
}

impl FluencyList {
    /// Stable identifier used as a column key in score matrices.
    pub fn id(&self) -> String {
        format!("{}/{}/{}", self.participant, self.list_index, self.category)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Checks the post-cleaning invariants: non-empty, no duplicates, and
    /// every item lowercase without underscores.
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::Validation(format!("list {} is empty", self.id())));
        }
        let mut seen = BTreeSet::new();
        for item in &self.items {
            if item.is_empty() || item.contains('_') || item.to_lowercase() != *item {
                return Err(Error::Validation(format!(
                    "list {}: malformed item {item:?}",
                    self.id()
                )));
            }
            if !seen.insert(item.as_str()) {
                return Err(Error::Validation(format!(
                    "list {}: duplicate item {item:?}",
                    self.id()
                )));
            }
        }
        Ok(())
    }
}

/// Header names for the four columns the loader needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub participant: String,
    pub list: String,
    pub category: String,
    pub item: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            participant: "id".into(),
            list: "listnum".into(),
            category: "category".into(),
            item: "item".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFormat {
    pub columns: ColumnMap,
    pub delimiter: u8,
}

impl Default for DatasetFormat {
    fn default() -> Self {
        DatasetFormat {
            columns: ColumnMap::default(),
            delimiter: b',',
        }
    }
}

/// (list index, 0-based position in that list) of one dataset row.
pub type RowPosition = (usize, usize);

/// A fluency CSV kept row-for-row, so it can be written back with the
/// original schema after items are rewritten.
#[derive(Debug, Clone)]
pub struct RawDataset {
    path: PathBuf,
    delimiter: u8,
    headers: csv::StringRecord,
    rows: Vec<(usize, csv::StringRecord)>,
    participant_col: usize,
    list_col: usize,
    category_col: usize,
    item_col: usize,
}

impl RawDataset {
    pub fn read(path: &Path, format: &DatasetFormat) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(format.delimiter)
            .has_headers(true)
            .from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?
            .clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::EmptyDataset { path: path.into() });
        }
        let find = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema {
                    path: path.into(),
                    column: name.to_string(),
                })
        };
        let participant_col = find(&format.columns.participant)?;
        let list_col = find(&format.columns.list)?;
        let category_col = find(&format.columns.category)?;
        let item_col = find(&format.columns.item)?;

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::parse(path, line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push((line, record));
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset { path: path.into() });
        }
        Ok(RawDataset {
            path: path.into(),
            delimiter: format.delimiter,
            headers,
            rows,
            participant_col,
            list_col,
            category_col,
            item_col,
        })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Groups rows into lists keyed by (participant, list index, category),
    /// in order of first appearance. Also returns, for each row, the index of
    /// its list and its 0-based position within that list.
    pub fn group(&self) -> Result<(Vec<FluencyList>, Vec<RowPosition>)> {
        self.group_with(|item| item.trim().to_lowercase())
    }

    /// As [`RawDataset::group`], but items are kept exactly as written so
    /// cleaning can report the original text.
    pub fn group_verbatim(&self) -> Result<(Vec<FluencyList>, Vec<RowPosition>)> {
        self.group_with(str::to_string)
    }

    fn group_with(&self, item_text: impl Fn(&str) -> String) -> Result<(Vec<FluencyList>, Vec<RowPosition>)> {
        let mut lists: Vec<FluencyList> = Vec::new();
        let mut by_key: HashMap<(String, u32, String), usize> = HashMap::new();
        let mut assignment = Vec::with_capacity(self.rows.len());
        for (line, row) in &self.rows {
            let participant = row[self.participant_col].trim().to_string();
            let list_index: u32 = row[self.list_col].trim().parse().map_err(|_| {
                Error::parse(
                    &self.path,
                    *line,
                    format!("list index {:?} is not a non-negative integer", &row[self.list_col]),
                )
            })?;
            let category = row[self.category_col].trim().to_lowercase();
            let item = item_text(&row[self.item_col]);
            if item.trim().is_empty() {
                return Err(Error::parse(&self.path, *line, "empty item"));
            }
            let key = (participant.clone(), list_index, category.clone());
            let idx = *by_key.entry(key).or_insert_with(|| {
                lists.push(FluencyList {
                    participant,
                    list_index,
                    category,
                    items: Vec::new(),
                });
                lists.len() - 1
            });
            assignment.push((idx, lists[idx].items.len()));
            lists[idx].items.push(item);
        }
        Ok((lists, assignment))
    }

    /// Writes the dataset with the same headers and columns, replacing the
    /// item column by `item_for(row)` and dropping rows for which it returns
    /// `None`.
    pub fn write_with_items(&self, mut item_for: impl FnMut(usize) -> Option<String>) -> Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new()
            .delimiter(self.delimiter)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(&self.headers)
            .map_err(|e| Error::Validation(e.to_string()))?;
        for (i, (_, row)) in self.rows.iter().enumerate() {
            let Some(item) = item_for(i) else { continue };
            let fields: Vec<&str> = row
                .iter()
                .enumerate()
                .map(|(c, f)| if c == self.item_col { item.as_str() } else { f })
                .collect();
            writer
                .write_record(&fields)
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        writer.into_inner().map_err(|e| Error::Validation(e.to_string()))
    }
}

/// Loads a delimited fluency dataset and groups it into lists.
pub fn load_fluency_dataset(path: &Path, format: &DatasetFormat) -> Result<Vec<FluencyList>> {
    Ok(RawDataset::read(path, format)?.group()?.0)
}

/// Writes lists in the four-column layout named by `format`.
pub fn write_fluency_dataset(lists: &[FluencyList], format: &DatasetFormat) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(format.delimiter)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let c = &format.columns;
    let err = |e: csv::Error| Error::Validation(e.to_string());
    writer
        .write_record([&c.participant, &c.list, &c.category, &c.item])
        .map_err(err)?;
    for list in lists {
        let index = list.list_index.to_string();
        for item in &list.items {
            writer
                .write_record([&list.participant, &index, &list.category, item])
                .map_err(err)?;
        }
    }
    writer.into_inner().map_err(|e| Error::Validation(e.to_string()))
}
