//! Run configuration: a TOML file whose relative paths resolve against the
//! file's own directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use fluency_core::adaptive::SelectionMetric;
use fluency_core::corpus::{ColumnMap, DatasetFormat, DEFAULT_RELATIONS};
use fluency_core::mlm::{MlmSettings, BUDGETS, FIRST_MASK_WIDTH, MAX_MASKS, NEXT_MASK_WIDTH};
use fluency_core::predictors::{validate_registry, Approach, FunctionSpec};
use fluency_core::{Error, Result};
use serde::Deserialize;

const DEFAULT_CONTEXT_SIZES: [usize; 4] = [0, 1, 3, 5];
const DEFAULT_PROMPTS: [u8; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Reserved; every stage is deterministic.
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub cleaning: Option<CleaningConfig>,
    #[serde(default)]
    pub resources: ResourceConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub adaptive: AdaptiveSettings,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub mlm: MlmConfig,
    #[serde(default)]
    pub functions: Vec<FunctionDecl>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub columns: ColumnMap,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Evaluate the output of `clean` instead of `path`.
    #[serde(default)]
    pub use_cleaned: bool,
}

fn default_delimiter() -> char {
    ','
}

impl DatasetConfig {
    pub fn format(&self) -> DatasetFormat {
        DatasetFormat {
            columns: self.columns.clone(),
            delimiter: self.delimiter as u8,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningConfig {
    /// JSON map from category to lexicon instances; filled on demand.
    pub lexicon_cache: PathBuf,
    /// Recorded ConceptNet edge dump to build missing lexicons from.
    pub conceptnet_fixture: Option<PathBuf>,
    /// Live ConceptNet API base URL.
    pub conceptnet_url: Option<String>,
    /// Directory for verbatim ConceptNet responses.
    pub conceptnet_response_cache: Option<PathBuf>,
    #[serde(default = "default_relations")]
    pub relations: Vec<String>,
    pub max_distance: Option<usize>,
}

fn default_relations() -> Vec<String> {
    DEFAULT_RELATIONS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceConfig {
    pub frequency: Option<PathBuf>,
    pub norms_usf: Option<PathBuf>,
    pub norms_swow: Option<PathBuf>,
    pub embeddings_w2v: Option<PathBuf>,
    pub embeddings_glove: Option<PathBuf>,
    /// Word-per-line noun list for prediction filtering.
    pub nouns: Option<PathBuf>,
    /// Word-per-line stopword list; a bundled list is used when absent.
    pub stopwords: Option<PathBuf>,
    /// Extra `plural<TAB>singular` pairs for the lemmatizer.
    pub irregular_plurals: Option<PathBuf>,
    #[serde(default)]
    pub filter_baselines: bool,
    pub embedding_max_candidates: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    /// Candidates kept per prediction.
    #[serde(default = "default_limit")]
    pub prediction_limit: usize,
}

fn default_k_values() -> Vec<usize> {
    vec![1, 5]
}

fn default_limit() -> usize {
    1000
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            k_values: default_k_values(),
            prediction_limit: default_limit(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    TopK,
    ScaledLl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSettings {
    pub window_sizes: Option<Vec<usize>>,
    #[serde(default = "default_window_min")]
    pub window_min: usize,
    #[serde(default = "default_window_max")]
    pub window_max: usize,
    #[serde(default = "default_selection")]
    pub selection: SelectionKind,
    /// k values to run the selectors for; defaults to the metric k values.
    pub k_values: Option<Vec<usize>>,
}

fn default_window_min() -> usize {
    1
}

fn default_window_max() -> usize {
    50
}

fn default_selection() -> SelectionKind {
    SelectionKind::TopK
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings {
            window_sizes: None,
            window_min: default_window_min(),
            window_max: default_window_max(),
            selection: default_selection(),
            k_values: None,
        }
    }
}

impl AdaptiveSettings {
    pub fn windows(&self) -> Vec<usize> {
        match &self.window_sizes {
            Some(w) => {
                let set: BTreeSet<usize> = w.iter().copied().collect();
                set.into_iter().collect()
            }
            None => (self.window_min..=self.window_max).collect(),
        }
    }

    pub fn selection_for(&self, k: usize) -> SelectionMetric {
        match self.selection {
            SelectionKind::TopK => SelectionMetric::TopK(k),
            SelectionKind::ScaledLl => SelectionMetric::ScaledLl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Fixture,
    Service,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default = "default_backend_kind")]
    pub kind: BackendKind,
    /// Fixture file per model name.
    #[serde(default)]
    pub fixtures: BTreeMap<String, PathBuf>,
    /// Service base URL per model name.
    #[serde(default)]
    pub services: BTreeMap<String, String>,
    #[serde(default = "default_top_n")]
    pub max_top_n: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
}

fn default_backend_kind() -> BackendKind {
    BackendKind::Fixture
}

fn default_top_n() -> usize {
    BUDGETS[0]
}

fn default_in_flight() -> usize {
    4
}

fn default_retries() -> u32 {
    3
}

fn default_backoff() -> u64 {
    200
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: default_backend_kind(),
            fixtures: BTreeMap::new(),
            services: BTreeMap::new(),
            max_top_n: default_top_n(),
            max_in_flight: default_in_flight(),
            retries: default_retries(),
            retry_backoff_ms: default_backoff(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlmConfig {
    #[serde(default = "default_budgets")]
    pub budgets: [usize; MAX_MASKS],
    #[serde(default = "default_first_width")]
    pub first_width: usize,
    #[serde(default = "default_next_width")]
    pub next_width: usize,
    #[serde(default = "default_max_masks")]
    pub max_masks: usize,
    #[serde(default = "default_true")]
    pub beam_prune: bool,
}

fn default_budgets() -> [usize; MAX_MASKS] {
    BUDGETS
}

fn default_first_width() -> usize {
    FIRST_MASK_WIDTH
}

fn default_next_width() -> usize {
    NEXT_MASK_WIDTH
}

fn default_max_masks() -> usize {
    MAX_MASKS
}

fn default_true() -> bool {
    true
}

impl Default for MlmConfig {
    fn default() -> Self {
        MlmConfig {
            budgets: BUDGETS,
            first_width: FIRST_MASK_WIDTH,
            next_width: NEXT_MASK_WIDTH,
            max_masks: MAX_MASKS,
            beam_prune: true,
        }
    }
}

impl MlmConfig {
    pub fn settings(&self) -> MlmSettings {
        MlmSettings {
            budgets: self.budgets,
            first_width: self.first_width,
            next_width: self.next_width,
            max_masks: self.max_masks,
            beam_prune: self.beam_prune,
        }
    }
}

/// One `[[functions]]` entry; grid fields expand into several specs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDecl {
    pub approach: Approach,
    pub context_sizes: Option<Vec<usize>>,
    pub prompts: Option<Vec<u8>>,
    pub model: Option<String>,
    pub group: Option<String>,
    /// Only allowed when the entry expands to a single function.
    pub label: Option<String>,
}

impl FunctionDecl {
    pub fn expand(&self) -> Result<Vec<FunctionSpec>> {
        let bad = |why: String| Error::Config(format!("[[functions]] {}: {why}", self.approach));
        let uses_context = self.approach.uses_context();
        if !uses_context && self.context_sizes.is_some() {
            return Err(bad("context_sizes does not apply".into()));
        }
        if self.approach != Approach::Mlm && (self.prompts.is_some() || self.model.is_some()) {
            return Err(bad("prompts and model apply to mlm only".into()));
        }
        let context_sizes = self
            .context_sizes
            .clone()
            .unwrap_or_else(|| DEFAULT_CONTEXT_SIZES.to_vec());
        let mut specs = match self.approach {
            Approach::RandomBaseline => vec![FunctionSpec::random_baseline()],
            Approach::NormsWalkUsf | Approach::NormsWalkSwow => {
                vec![FunctionSpec::norms_walk(self.approach)]
            }
            Approach::EmbeddingW2v | Approach::EmbeddingGlove => context_sizes
                .iter()
                .map(|&ct| FunctionSpec::embedding(self.approach, ct))
                .collect(),
            Approach::Mlm => {
                let model = self
                    .model
                    .as_deref()
                    .ok_or_else(|| bad("mlm functions need a model".into()))?;
                let prompts = self.prompts.clone().unwrap_or_else(|| DEFAULT_PROMPTS.to_vec());
                let mut out = Vec::new();
                for &p in &prompts {
                    for &ct in &context_sizes {
                        out.push(FunctionSpec::mlm(model, p, ct));
                    }
                }
                out
            }
        };
        if specs.is_empty() {
            return Err(bad("expands to no functions".into()));
        }
        if let Some(group) = &self.group {
            specs = specs
                .into_iter()
                .map(|s| {
                    let label = s.label.replacen(&s.group, group, 1);
                    s.with_group(group).with_label(&label)
                })
                .collect();
        }
        if let Some(label) = &self.label {
            if specs.len() != 1 {
                return Err(bad(format!(
                    "label {label:?} given for a grid of {} functions",
                    specs.len()
                )));
            }
            specs[0] = specs[0].clone().with_label(label);
        }
        Ok(specs)
    }
}

/// A validated configuration with absolute paths.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub config: RunConfig,
    pub functions: Vec<FunctionSpec>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {} does not exist", path.display())))
    }
}

fn require_opt(path: &Option<PathBuf>, what: &str) -> Result<()> {
    path.as_deref().map_or(Ok(()), |p| require(p, what))
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_str(&text, path)
    }

    /// Parses `text` as if it were read from `path`.
    pub fn from_str(text: &str, path: &Path) -> Result<Self> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        resolve(&base, &mut config.output_dir);
        resolve(&base, &mut config.dataset.path);
        if let Some(c) = &mut config.cleaning {
            resolve(&base, &mut c.lexicon_cache);
            resolve_opt(&base, &mut c.conceptnet_fixture);
            resolve_opt(&base, &mut c.conceptnet_response_cache);
        }
        let r = &mut config.resources;
        for p in [
            &mut r.frequency,
            &mut r.norms_usf,
            &mut r.norms_swow,
            &mut r.embeddings_w2v,
            &mut r.embeddings_glove,
            &mut r.nouns,
            &mut r.stopwords,
            &mut r.irregular_plurals,
        ] {
            resolve_opt(&base, p);
        }
        for p in config.backend.fixtures.values_mut() {
            resolve(&base, p);
        }
        let mut functions = Vec::new();
        for decl in &config.functions {
            functions.extend(decl.expand()?);
        }
        validate_registry(&functions)?;
        let loaded = LoadedConfig {
            path: path.to_path_buf(),
            config,
            functions,
        };
        loaded.validate()?;
        Ok(loaded)
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        require(&c.dataset.path, "dataset")?;
        if !c.dataset.delimiter.is_ascii() {
            return Err(Error::Config("dataset delimiter must be an ASCII character".into()));
        }
        if let Some(cl) = &c.cleaning {
            require_opt(&cl.conceptnet_fixture, "ConceptNet fixture")?;
            if cl.conceptnet_fixture.is_none() && cl.conceptnet_url.is_none() {
                require(&cl.lexicon_cache, "lexicon cache")?;
            }
        }
        let r = &c.resources;
        require_opt(&r.frequency, "frequency table")?;
        require_opt(&r.norms_usf, "USF norms")?;
        require_opt(&r.norms_swow, "SWOW norms")?;
        require_opt(&r.embeddings_w2v, "word2vec embeddings")?;
        require_opt(&r.embeddings_glove, "GloVe embeddings")?;
        require_opt(&r.nouns, "noun list")?;
        require_opt(&r.stopwords, "stopword list")?;
        require_opt(&r.irregular_plurals, "irregular plural table")?;
        for (model, p) in &c.backend.fixtures {
            require(p, &format!("fixture for model {model:?}"))?;
        }
        let m = &c.metrics;
        if m.k_values.is_empty() || m.k_values.contains(&0) {
            return Err(Error::Config("metrics.k_values must be non-empty and positive".into()));
        }
        let max_k = m.k_values.iter().copied().max().unwrap_or(1);
        if m.prediction_limit < max_k {
            return Err(Error::Config(format!(
                "metrics.prediction_limit {} is below the largest k {max_k}",
                m.prediction_limit
            )));
        }
        let a = &c.adaptive;
        let windows = a.windows();
        if windows.is_empty() || windows.contains(&0) {
            return Err(Error::Config(
                "adaptive window sizes must be non-empty and positive".into(),
            ));
        }
        if a.k_values.as_ref().is_some_and(|k| k.is_empty() || k.contains(&0)) {
            return Err(Error::Config("adaptive.k_values must be non-empty and positive".into()));
        }
        let mlm = &c.mlm;
        if !(1..=MAX_MASKS).contains(&mlm.max_masks) || mlm.first_width == 0 || mlm.next_width == 0 {
            return Err(Error::Config("mlm: max_masks must be 1-4 and widths positive".into()));
        }
        if mlm.budgets.contains(&0) {
            return Err(Error::Config("mlm: budgets must be positive".into()));
        }
        if c.backend.max_in_flight == 0 {
            return Err(Error::Config("backend.max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    pub fn adaptive_k_values(&self) -> Vec<usize> {
        let mut ks = self
            .config
            .adaptive
            .k_values
            .clone()
            .unwrap_or_else(|| self.config.metrics.k_values.clone());
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Models referenced by mlm functions.
    pub fn models(&self) -> BTreeSet<String> {
        self.functions.iter().filter_map(|f| f.model.clone()).collect()
    }
}
