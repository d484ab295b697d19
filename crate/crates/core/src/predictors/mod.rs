//! Next-item predictors behind one interface, and the engine that binds
//! function specs to loaded resources.

mod baseline;
mod distribution;
mod embedding;
mod filter;
mod norms;
mod spec;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

pub use baseline::{predict_random_baseline, FrequencyBaseline};
pub use distribution::{Candidate, Coverage, PredictionDistribution, WeightedVocabulary};
pub use embedding::{predict_embedding, EmbeddingSimilarity};
pub use filter::{default_stopwords, filter_predictions, load_word_list, PredictionFilter};
pub use norms::{predict_norms_walk, NormsWalk};
pub use spec::{validate_registry, Approach, FunctionSpec};

use crate::corpus::{AssociationNorms, EmbeddingTable, FrequencyTable, PredictionContext};
use crate::mlm::{MaskScoringBackend, MlmPredictor, MlmSettings};
use crate::{Error, Result};

/// A prediction function ready to be queried.
pub trait Predict: Send + Sync {
    fn spec(&self) -> &FunctionSpec;
    /// Ranked next-item distribution, with used items censored and at most
    /// `limit` candidates kept.
    fn predict(&self, ctx: &PredictionContext, limit: usize) -> Result<PredictionDistribution>;
}

/// Everything the predictors may draw on. Absent resources only matter to
/// the functions that need them.
#[derive(Default, Clone)]
pub struct Resources {
    pub frequency: Option<Arc<FrequencyTable>>,
    pub norms_usf: Option<Arc<AssociationNorms>>,
    pub norms_swow: Option<Arc<AssociationNorms>>,
    pub embeddings_w2v: Option<Arc<EmbeddingTable>>,
    pub embeddings_glove: Option<Arc<EmbeddingTable>>,
    /// Masked-LM backends by model name.
    pub backends: BTreeMap<String, Arc<dyn MaskScoringBackend>>,
    /// Filter for masked-LM output; the default filter is used when absent.
    pub filter: Option<Arc<PredictionFilter>>,
    /// Also apply the filter to the baseline and embedding predictors.
    pub filter_baselines: bool,
    /// Only the first rows of an embedding table are candidates.
    pub embedding_max_candidates: Option<usize>,
    pub mlm: MlmSettings,
}

enum Bound {
    Frequency(Arc<FrequencyBaseline>),
    Norms(Arc<NormsWalk>),
    Embedding(EmbeddingSimilarity),
    Mlm(MlmPredictor),
}

/// A [`FunctionSpec`] bound to its resources.
pub struct BoundPredictor {
    spec: FunctionSpec,
    inner: Bound,
}

impl Predict for BoundPredictor {
    fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    fn predict(&self, ctx: &PredictionContext, limit: usize) -> Result<PredictionDistribution> {
        if limit == 0 {
            return Err(Error::Validation("prediction limit must be at least 1".into()));
        }
        Ok(match &self.inner {
            Bound::Frequency(p) => p.predict(ctx, limit),
            Bound::Norms(p) => p.predict(ctx, limit),
            Bound::Embedding(p) => p.predict(ctx, limit),
            Bound::Mlm(p) => p.predict(ctx, limit)?,
        })
    }
}

/// Binds specs to shared resources. Context-free indices are built once
/// and shared by every function using them.
pub struct Engine {
    resources: Resources,
    default_filter: OnceLock<Arc<PredictionFilter>>,
    frequency: OnceLock<Arc<FrequencyBaseline>>,
    usf: OnceLock<Arc<NormsWalk>>,
    swow: OnceLock<Arc<NormsWalk>>,
}

fn missing(what: &str, spec: &FunctionSpec) -> Error {
    Error::MissingResource(format!("{what} (required by function {})", spec.label))
}

impl Engine {
    pub fn new(resources: Resources) -> Self {
        Engine {
            resources,
            default_filter: OnceLock::new(),
            frequency: OnceLock::new(),
            usf: OnceLock::new(),
            swow: OnceLock::new(),
        }
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    fn filter(&self) -> Arc<PredictionFilter> {
        match &self.resources.filter {
            Some(f) => f.clone(),
            None => self
                .default_filter
                .get_or_init(|| Arc::new(PredictionFilter::default()))
                .clone(),
        }
    }

    fn baseline_filter(&self) -> Option<Arc<PredictionFilter>> {
        self.resources.filter_baselines.then(|| self.filter())
    }

    pub fn bind(&self, spec: &FunctionSpec) -> Result<BoundPredictor> {
        spec.validate()?;
        let r = &self.resources;
        let inner = match spec.approach {
            Approach::RandomBaseline => {
                let freq = r.frequency.as_ref().ok_or_else(|| missing("frequency table", spec))?;
                let filter = self.baseline_filter();
                Bound::Frequency(
                    self.frequency
                        .get_or_init(|| Arc::new(FrequencyBaseline::new(freq, filter.as_deref())))
                        .clone(),
                )
            }
            Approach::NormsWalkUsf | Approach::NormsWalkSwow => {
                let (norms, slot, name) = if spec.approach == Approach::NormsWalkUsf {
                    (&r.norms_usf, &self.usf, "USF association norms")
                } else {
                    (&r.norms_swow, &self.swow, "SWOW association norms")
                };
                let norms = norms.as_ref().ok_or_else(|| missing(name, spec))?;
                let filter = self.baseline_filter();
                Bound::Norms(
                    slot.get_or_init(|| Arc::new(NormsWalk::new(norms, filter.as_deref())))
                        .clone(),
                )
            }
            Approach::EmbeddingW2v | Approach::EmbeddingGlove => {
                let (table, name) = if spec.approach == Approach::EmbeddingW2v {
                    (&r.embeddings_w2v, "word2vec embeddings")
                } else {
                    (&r.embeddings_glove, "GloVe embeddings")
                };
                let table = table.as_ref().ok_or_else(|| missing(name, spec))?;
                Bound::Embedding(EmbeddingSimilarity::new(
                    table.clone(),
                    spec.window(),
                    r.embedding_max_candidates,
                    self.baseline_filter(),
                ))
            }
            Approach::Mlm => {
                let model = spec.model.as_deref().unwrap_or_default();
                let backend = r
                    .backends
                    .get(model)
                    .ok_or_else(|| missing(&format!("masked-LM backend {model:?}"), spec))?;
                let freq = r.frequency.as_ref().ok_or_else(|| missing("frequency table", spec))?;
                Bound::Mlm(MlmPredictor {
                    backend: backend.clone(),
                    template_id: spec.prompt_id.unwrap_or(1),
                    context_size: spec.window(),
                    freq: freq.clone(),
                    filter: self.filter(),
                    settings: r.mlm.clone(),
                })
            }
        };
        Ok(BoundPredictor {
            spec: spec.clone(),
            inner,
        })
    }
}

/// One-shot prediction: binds `spec` and queries it.
pub fn predict(
    spec: &FunctionSpec,
    ctx: &PredictionContext,
    engine: &Engine,
    limit: usize,
) -> Result<PredictionDistribution> {
    engine.bind(spec)?.predict(ctx, limit)
}
