//! Loading the configured resources and masked-LM backends.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use fluency_core::cleaning::NounLemmatizer;
use fluency_core::corpus::{load_association_norms, load_embeddings, load_frequency_table};
use fluency_core::mlm::{BoundedBackend, CachedBackend, FixtureBackend, MaskScoringBackend, ServiceBackend};
use fluency_core::predictors::{
    default_stopwords, load_word_list, Approach, FunctionSpec, PredictionFilter, Resources,
};
use fluency_core::{Error, Result};
use sha2::{Digest, Sha256};

use crate::config::{BackendKind, LoadedConfig};

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// A service backend with its response cache, kept so the cache can be
/// persisted after a run.
pub struct ServiceCache {
    pub model: String,
    pub path: PathBuf,
    pub backend: Arc<CachedBackend>,
}

/// Everything evaluation needs beyond the dataset.
pub struct LoadedResources {
    pub resources: Resources,
    /// Content digest per resource name, for cache fingerprints.
    pub digests: BTreeMap<String, String>,
    pub service_caches: Vec<ServiceCache>,
}

impl LoadedResources {
    /// Resource digests a function's outcomes depend on.
    pub fn fingerprint_inputs(&self, spec: &FunctionSpec) -> Vec<(String, String)> {
        let mut names: Vec<String> = match spec.approach {
            Approach::RandomBaseline => vec!["frequency".into()],
            Approach::NormsWalkUsf => vec!["norms_usf".into()],
            Approach::NormsWalkSwow => vec!["norms_swow".into()],
            Approach::EmbeddingW2v => vec!["embeddings_w2v".into()],
            Approach::EmbeddingGlove => vec!["embeddings_glove".into()],
            Approach::Mlm => vec![
                "frequency".into(),
                format!("model:{}", spec.model.as_deref().unwrap_or_default()),
            ],
        };
        if spec.approach == Approach::Mlm || self.resources.filter_baselines {
            names.extend(["nouns".into(), "stopwords".into(), "irregular_plurals".into()]);
        }
        names
            .into_iter()
            .map(|n| {
                let d = self.digests.get(&n).cloned().unwrap_or_else(|| "-".into());
                (n, d)
            })
            .collect()
    }
}

pub fn lemmatizer(cfg: &LoadedConfig) -> Result<NounLemmatizer> {
    let base = NounLemmatizer::default();
    match &cfg.config.resources.irregular_plurals {
        Some(p) => base.extend_irregular_from(p),
        None => Ok(base),
    }
}

/// Loads the resources the registry needs. Resources no function uses are
/// skipped; backends are connected only for models that are referenced.
pub fn load(cfg: &LoadedConfig, backend_kind: BackendKind) -> Result<LoadedResources> {
    let r = &cfg.config.resources;
    let mut digests = BTreeMap::new();
    let needs = |pred: &dyn Fn(Approach) -> bool| cfg.functions.iter().any(|f| pred(f.approach));
    let mut resources = Resources {
        filter_baselines: r.filter_baselines,
        embedding_max_candidates: r.embedding_max_candidates,
        mlm: cfg.config.mlm.settings(),
        ..Resources::default()
    };

    fn digest(digests: &mut BTreeMap<String, String>, name: &str, path: &Path) -> Result<()> {
        digests.insert(name.to_string(), file_digest(path)?);
        Ok(())
    }

    if let Some(p) = &r.frequency {
        if needs(&|a| matches!(a, Approach::RandomBaseline | Approach::Mlm)) {
            resources.frequency = Some(Arc::new(load_frequency_table(p)?));
            digest(&mut digests, "frequency", p)?;
        }
    }
    let norms = [
        (&r.norms_usf, Approach::NormsWalkUsf, "norms_usf"),
        (&r.norms_swow, Approach::NormsWalkSwow, "norms_swow"),
    ];
    for (path, approach, name) in norms {
        if let Some(p) = path {
            if needs(&|a| a == approach) {
                let loaded = Some(Arc::new(load_association_norms(p)?));
                if approach == Approach::NormsWalkUsf {
                    resources.norms_usf = loaded;
                } else {
                    resources.norms_swow = loaded;
                }
                digest(&mut digests, name, p)?;
            }
        }
    }
    let embeddings = [
        (&r.embeddings_w2v, Approach::EmbeddingW2v, "embeddings_w2v"),
        (&r.embeddings_glove, Approach::EmbeddingGlove, "embeddings_glove"),
    ];
    for (path, approach, name) in embeddings {
        if let Some(p) = path {
            if needs(&|a| a == approach) {
                let loaded = Some(Arc::new(load_embeddings(p)?));
                if approach == Approach::EmbeddingW2v {
                    resources.embeddings_w2v = loaded;
                } else {
                    resources.embeddings_glove = loaded;
                }
                digest(&mut digests, name, p)?;
            }
        }
    }

    let stopwords = match &r.stopwords {
        Some(p) => {
            digest(&mut digests, "stopwords", p)?;
            load_word_list(p)?
        }
        None => default_stopwords(),
    };
    let nouns = match &r.nouns {
        Some(p) => {
            digest(&mut digests, "nouns", p)?;
            Some(load_word_list(p)?)
        }
        None => None,
    };
    if let Some(p) = &r.irregular_plurals {
        digest(&mut digests, "irregular_plurals", p)?;
    }
    resources.filter = Some(Arc::new(PredictionFilter::new(stopwords, nouns, lemmatizer(cfg)?)));

    let mut service_caches = Vec::new();
    let b = &cfg.config.backend;
    for model in cfg.models() {
        let backend: Arc<dyn MaskScoringBackend> = match backend_kind {
            BackendKind::Fixture => {
                let path = b.fixtures.get(&model).ok_or_else(|| {
                    Error::Config(format!(
                        "no fixture configured for model {model:?} under [backend.fixtures]"
                    ))
                })?;
                digest(&mut digests, &format!("model:{model}"), path)?;
                Arc::new(FixtureBackend::load(path)?)
            }
            BackendKind::Service => {
                let url = b.services.get(&model).ok_or_else(|| {
                    Error::Config(format!(
                        "no service URL configured for model {model:?} under [backend.services]"
                    ))
                })?;
                let service = ServiceBackend::connect(url, b.retries, Duration::from_millis(b.retry_backoff_ms))
                    .map_err(|e| e.context(format!("model {model:?}")))?
                    .with_max_top_n(b.max_top_n);
                let identity = fluency_core::mlm::MaskScoringBackend::identity(&service).to_string();
                digests.insert(format!("model:{model}"), format!("service:{identity}"));
                let bounded: Arc<dyn MaskScoringBackend> =
                    Arc::new(BoundedBackend::new(Arc::new(service), b.max_in_flight));
                let path = cfg
                    .config
                    .output_dir
                    .join("cache")
                    .join("responses")
                    .join(format!("{}.json", crate::cache::sanitize(&model)));
                let mut cached = CachedBackend::new(bounded);
                if path.exists() {
                    cached = cached.warm_from(&path)?;
                }
                let cached = Arc::new(cached);
                service_caches.push(ServiceCache {
                    model: model.clone(),
                    path,
                    backend: cached.clone(),
                });
                cached
            }
        };
        resources.backends.insert(model, backend);
    }

    Ok(LoadedResources {
        resources,
        digests,
        service_caches,
    })
}
