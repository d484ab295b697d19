//! Shared plumbing: the run context, dataset loading and outcome scoring.

use std::path::PathBuf;
use std::sync::Arc;

use fluency_core::corpus::RawDataset;
use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::{score_list, ItemOutcome};
use fluency_core::predictors::{Engine, FunctionSpec, Predict};
use fluency_core::{Error, FluencyList, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cache::OutcomeCache;
use crate::config::{BackendKind, LoadedConfig};
use crate::resources::{self, LoadedResources};

/// A validated configuration plus command-line overrides.
pub struct RunContext {
    pub config: LoadedConfig,
    pub backend: BackendKind,
    pub resume: bool,
}

impl RunContext {
    pub fn new(mut config: LoadedConfig, output: Option<PathBuf>, backend: Option<BackendKind>, resume: bool) -> Self {
        if let Some(out) = output {
            config.config.output_dir = out;
        }
        let backend = backend.unwrap_or(config.config.backend.kind);
        RunContext {
            config,
            backend,
            resume,
        }
    }

    pub fn output_dir(&self) -> &std::path::Path {
        &self.config.config.output_dir
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.output_dir().join(stage)
    }

    pub fn cleaned_path(&self) -> PathBuf {
        self.stage_dir("clean").join("cleaned.csv")
    }

    /// Lists to evaluate: the raw dataset, or the output of `clean` when
    /// the config asks for it.
    pub fn load_lists(&self) -> Result<Vec<FluencyList>> {
        let ds = &self.config.config.dataset;
        let path = if ds.use_cleaned {
            let p = self.cleaned_path();
            if !p.exists() {
                return Err(Error::Validation(format!(
                    "{} is missing; run `clean` first or set dataset.use_cleaned = false",
                    p.display()
                )));
            }
            p
        } else {
            ds.path.clone()
        };
        let (lists, _) = RawDataset::read(&path, &ds.format())?.group()?;
        for list in &lists {
            list.validate().map_err(|e| e.context(path.display().to_string()))?;
        }
        Ok(lists)
    }
}

/// Outcomes of every function on every list.
pub struct Outcomes {
    pub lists: Vec<FluencyList>,
    pub functions: Vec<FunctionSpec>,
    /// `[function][list]`.
    pub by_function: Vec<Vec<Vec<ItemOutcome>>>,
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    spec: &'a FunctionSpec,
    prediction_limit: usize,
    mlm: String,
    filter_baselines: bool,
    embedding_max_candidates: Option<usize>,
    inputs: Vec<(String, String)>,
}

fn fingerprint(ctx: &RunContext, loaded: &LoadedResources, spec: &FunctionSpec) -> String {
    let r = &loaded.resources;
    let input = FingerprintInput {
        spec,
        prediction_limit: ctx.config.config.metrics.prediction_limit,
        mlm: format!("{:?}", r.mlm),
        filter_baselines: r.filter_baselines,
        embedding_max_candidates: r.embedding_max_candidates,
        inputs: loaded.fingerprint_inputs(spec),
    };
    let bytes = serde_json::to_vec(&input).expect("fingerprint serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Scores every (function, list) pair on the current rayon pool. Each
/// function's outcomes are cached on disk as soon as it finishes; with
/// `resume`, valid cached entries are reused instead of recomputed.
pub fn compute_outcomes(ctx: &RunContext) -> Result<Outcomes> {
    let functions = ctx.config.functions.clone();
    if functions.is_empty() {
        return Err(Error::Config("no [[functions]] declared".into()));
    }
    let lists = ctx.load_lists()?;
    let loaded = resources::load(&ctx.config, ctx.backend)?;
    let engine = Engine::new(loaded.resources.clone());
    let bound = functions
        .iter()
        .map(|f| engine.bind(f).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let cache = OutcomeCache::new(ctx.stage_dir("cache").join("outcomes"));
    let limit = ctx.config.config.metrics.prediction_limit;

    let by_function = bound
        .par_iter()
        .map(|predictor| {
            let spec = predictor.spec();
            let fp = fingerprint(ctx, &loaded, spec);
            let reused = if ctx.resume {
                cache.load(&spec.label, &fp, &lists)
            } else {
                Default::default()
            };
            let computed = lists
                .par_iter()
                .map(|list| match reused.get(&list.id()) {
                    Some(o) => Ok(o.clone()),
                    None => score_list(predictor.as_ref(), list, limit),
                })
                .collect::<Result<Vec<_>>>()?;
            log::info!(
                "{}: {} lists scored, {} from cache",
                spec.label,
                lists.len() - reused.len().min(lists.len()),
                reused.len()
            );
            cache.store(&spec.label, &fp, &lists, &computed)?;
            Ok(computed)
        })
        .collect::<Result<Vec<_>>>();

    // Persist fetched service responses even when scoring failed midway.
    for sc in &loaded.service_caches {
        write_atomic(&sc.path, &sc.backend.to_fixture().to_json())
            .map_err(|e| e.context(format!("response cache for model {:?}", sc.model)))?;
    }

    Ok(Outcomes {
        lists,
        functions,
        by_function: by_function?,
    })
}
