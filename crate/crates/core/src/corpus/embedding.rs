use std::collections::HashMap;
use std::path::Path;

use crate::{Error, Result};

/// Word vectors of a fixed dimension, stored row-major with precomputed
/// Euclidean norms.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    norms: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
        }
    }

    /// Inserts or replaces a vector. Returns `true` when the word was
    /// already present.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::Validation(format!(
                "vector for {word:?} has {} entries, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation(format!("vector for {word:?} is degenerate")));
        }
        if let Some(&row) = self.index.get(word) {
            self.data[row * self.dimension..(row + 1) * self.dimension].copy_from_slice(vector);
            self.norms[row] = norm;
            return Ok(true);
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.data.extend_from_slice(vector);
        self.norms.push(norm);
        Ok(false)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn row(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.row(word).map(|r| self.row_vector(r))
    }

    pub fn row_vector(&self, row: usize) -> &[f32] {
        &self.data[row * self.dimension..(row + 1) * self.dimension]
    }

    /// Cosine similarity between two stored rows.
    pub fn row_cosine(&self, a: usize, b: usize) -> f64 {
        let dot: f64 = self
            .row_vector(a)
            .iter()
            .zip(self.row_vector(b))
            .map(|(x, y)| f64::from(*x) * f64::from(*y))
            .sum();
        dot / (f64::from(self.norms[a]) * f64::from(self.norms[b]))
    }

    /// Plain-text serialization with a `count dimension` header line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dimension);
        for (row, word) in self.words.iter().enumerate() {
            out.push_str(word);
            for v in self.row_vector(row) {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Cosine similarity of two equal-length vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Reads the whitespace-separated word-vector text format, with or without a
/// leading `count dimension` line. Later duplicates replace earlier ones.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let text = crate::fsutil::read_to_string(path)?;
    let mut table: Option<EmbeddingTable> = None;
    let mut buf: Vec<f32> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if table.is_none() && rest.len() == 1 {
            if let (Ok(_), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if dim == 0 {
                    return Err(Error::parse(path, line_no, "dimension must be positive"));
                }
                table = Some(EmbeddingTable::new(dim));
                continue;
            }
        }
        buf.clear();
        for f in &rest {
            let v: f32 = f
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("{f:?} is not a number")))?;
            buf.push(v);
        }
        if buf.is_empty() {
            return Err(Error::parse(path, line_no, format!("no vector for {word:?}")));
        }
        let t = table.get_or_insert_with(|| EmbeddingTable::new(buf.len()));
        if buf.len() != t.dimension() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} values, found {}", t.dimension(), buf.len()),
            ));
        }
        match t.insert(word, &buf) {
            Ok(true) => log::warn!(
                "{}:{line_no}: duplicate word {word:?}, keeping the later vector",
                path.display()
            ),
            Ok(false) => {}
            Err(e) => return Err(Error::parse(path, line_no, e.to_string())),
        }
    }
    table.ok_or_else(|| Error::EmptyDataset { path: path.into() })
}
