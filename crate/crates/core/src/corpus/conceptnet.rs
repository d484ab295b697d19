//! Edge retrieval from a ConceptNet-style semantic network.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cleaning::NounLemmatizer;
use crate::{Error, Result};

/// Relations whose edges into a category concept count as instances.
pub const DEFAULT_RELATIONS: [&str; 7] = [
    "/r/AtLocation",
    "/r/DefinedAs",
    "/r/FormOf",
    "/r/InstanceOf",
    "/r/IsA",
    "/r/MannerOf",
    "/r/PartOf",
];

/// Environment variable overriding the HTTP base URL.
pub const BASE_URL_ENV: &str = "CONCEPTNET_URL";
const DEFAULT_BASE_URL: &str = "https://api.conceptnet.io";
const PAGE_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub start: String,
    pub end: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePage {
    pub edges: Vec<Edge>,
    pub next_offset: Option<usize>,
}

/// A source of edges pointing at a concept through one relation.
pub trait EdgeSource {
    fn edges_into(&self, concept: &str, relation: &str, offset: usize, limit: usize) -> Result<EdgePage>;

    fn page_size(&self) -> usize {
        PAGE_SIZE
    }
}

#[derive(Deserialize)]
struct WireNode {
    #[serde(rename = "@id")]
    id: String,
}

#[derive(Deserialize)]
struct WireEdge {
    start: WireNode,
    end: WireNode,
    rel: WireNode,
}

#[derive(Deserialize, Default)]
struct WireView {
    #[serde(rename = "nextPage")]
    next_page: Option<String>,
}

#[derive(Deserialize)]
struct WireResponse {
    #[serde(default)]
    edges: Vec<WireEdge>,
    #[serde(default)]
    view: Option<WireView>,
}

impl From<WireEdge> for Edge {
    fn from(e: WireEdge) -> Self {
        Edge {
            start: e.start.id,
            end: e.end.id,
            relation: e.rel.id,
        }
    }
}

/// Concept URI for a category word: English, lemmatized on its final word,
/// spaces as underscores (`"supermarket items"` -> `/c/en/supermarket_item`).
pub fn category_concept(category: &str, lemmatizer: &NounLemmatizer) -> String {
    let lemma = lemmatizer.lemmatize(&category.trim().to_lowercase());
    format!("/c/en/{}", lemma.split_whitespace().collect::<Vec<_>>().join("_"))
}

/// Surface term of an English concept URI (`/c/en/polar_bear/n` ->
/// `polar bear`); `None` for other languages.
pub fn english_term(uri: &str) -> Option<String> {
    let mut parts = uri.split('/');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(""), Some("c"), Some("en"), Some(term)) if !term.is_empty() => {
            Some(term.replace('_', " ").to_lowercase())
        }
        _ => None,
    }
}

/// Queries the public HTTP API. Response bodies may be cached verbatim in a
/// directory, keyed by a hash of the request URL; cached bodies are served
/// without touching the network.
pub struct HttpEdgeSource {
    base_url: String,
    agent: ureq::Agent,
    response_cache: Option<PathBuf>,
}

impl HttpEdgeSource {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpEdgeSource {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new().timeout(Duration::from_secs(30)).build(),
            response_cache: None,
        }
    }

    /// Base URL from `CONCEPTNET_URL`, falling back to the public API.
    pub fn from_env() -> Self {
        Self::new(std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string()))
    }

    pub fn with_response_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.response_cache = Some(dir.into());
        self
    }

    fn cache_path(&self, url: &str) -> Option<PathBuf> {
        let dir = self.response_cache.as_ref()?;
        let digest = Sha256::digest(url.as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(digest))))
    }

    fn get(&self, url: &str) -> Result<String> {
        let cached = self.cache_path(url);
        if let Some(path) = cached.as_deref().filter(|p| p.exists()) {
            return crate::fsutil::read_to_string(path);
        }
        let body = self
            .agent
            .get(url)
            .call()
            .map_err(|e| Error::Retrieval(format!("GET {url}: {e}")))?
            .into_string()
            .map_err(|e| Error::Retrieval(format!("GET {url}: {e}")))?;
        if let Some(path) = cached {
            crate::fsutil::write_atomic(&path, body.as_bytes())?;
        }
        Ok(body)
    }
}

impl EdgeSource for HttpEdgeSource {
    fn edges_into(&self, concept: &str, relation: &str, offset: usize, limit: usize) -> Result<EdgePage> {
        let url = format!(
            "{}/query?end={concept}&rel={relation}&offset={offset}&limit={limit}",
            self.base_url
        );
        let body = self.get(&url)?;
        let wire: WireResponse =
            serde_json::from_str(&body).map_err(|e| Error::Retrieval(format!("GET {url}: malformed response: {e}")))?;
        let has_next = wire.view.and_then(|v| v.next_page).is_some();
        let edges: Vec<Edge> = wire.edges.into_iter().map(Edge::from).collect();
        Ok(EdgePage {
            next_offset: (has_next && !edges.is_empty()).then(|| offset + limit),
            edges,
        })
    }
}

/// Replays a recorded edge dump (`{"edges": [...]}` in the API's own edge
/// format), filtering and paginating locally.
pub struct RecordedEdgeSource {
    edges: Vec<Edge>,
    page_size: usize,
}

impl RecordedEdgeSource {
    pub fn from_edges(edges: Vec<Edge>) -> Self {
        RecordedEdgeSource {
            edges,
            page_size: PAGE_SIZE,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::fsutil::read_to_string(path)?;
        let wire: WireResponse =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        Ok(Self::from_edges(wire.edges.into_iter().map(Edge::from).collect()))
    }

    pub fn with_page_size(mut self, page_size: usize) -> Self {
        self.page_size = page_size.max(1);
        self
    }
}

fn concept_matches(uri: &str, concept: &str) -> bool {
    uri == concept || uri.strip_prefix(concept).is_some_and(|rest| rest.starts_with('/'))
}

impl EdgeSource for RecordedEdgeSource {
    fn edges_into(&self, concept: &str, relation: &str, offset: usize, limit: usize) -> Result<EdgePage> {
        let matching: Vec<&Edge> = self
            .edges
            .iter()
            .filter(|e| e.relation == relation && concept_matches(&e.end, concept))
            .collect();
        let page: Vec<Edge> = matching.iter().skip(offset).take(limit).map(|e| (*e).clone()).collect();
        let next = offset + limit;
        Ok(EdgePage {
            edges: page,
            next_offset: (next < matching.len()).then_some(next),
        })
    }

    fn page_size(&self) -> usize {
        self.page_size
    }
}
