use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    RandomBaseline,
    NormsWalkUsf,
    NormsWalkSwow,
    EmbeddingW2v,
    EmbeddingGlove,
    Mlm,
}

impl Approach {
    pub fn as_str(self) -> &'static str {
        match self {
            Approach::RandomBaseline => "random_baseline",
            Approach::NormsWalkUsf => "norms_walk_usf",
            Approach::NormsWalkSwow => "norms_walk_swow",
            Approach::EmbeddingW2v => "embedding_w2v",
            Approach::EmbeddingGlove => "embedding_glove",
            Approach::Mlm => "mlm",
        }
    }

    /// Name used to group functions when none is given explicitly.
    pub fn default_group(self) -> &'static str {
        match self {
            Approach::RandomBaseline => "random",
            Approach::NormsWalkUsf => "usf",
            Approach::NormsWalkSwow => "swow",
            Approach::EmbeddingW2v => "word2vec",
            Approach::EmbeddingGlove => "glove",
            Approach::Mlm => "mlm",
        }
    }

    pub fn uses_context(self) -> bool {
        matches!(self, Approach::EmbeddingW2v | Approach::EmbeddingGlove | Approach::Mlm)
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One static prediction function: an approach with fixed hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub approach: Approach,
    /// Maximum number of preceding items fed to the predictor.
    pub context_size: Option<usize>,
    /// Prompt template, masked-LM functions only.
    pub prompt_id: Option<u8>,
    /// Scoring backend name, masked-LM functions only.
    pub model: Option<String>,
    /// Approach-level name that Avg/BO/BI aggregate over.
    pub group: String,
    pub label: String,
}

impl FunctionSpec {
    pub fn random_baseline() -> Self {
        FunctionSpec {
            approach: Approach::RandomBaseline,
            context_size: None,
            prompt_id: None,
            model: None,
            group: "random".into(),
            label: "random".into(),
        }
    }

    pub fn norms_walk(approach: Approach) -> Self {
        let group = approach.default_group().to_string();
        FunctionSpec {
            approach,
            context_size: None,
            prompt_id: None,
            model: None,
            label: group.clone(),
            group,
        }
    }

    pub fn embedding(approach: Approach, context_size: usize) -> Self {
        let group = approach.default_group().to_string();
        FunctionSpec {
            approach,
            context_size: Some(context_size),
            prompt_id: None,
            model: None,
            label: format!("{group}/ct{context_size}"),
            group,
        }
    }

    pub fn mlm(model: &str, prompt_id: u8, context_size: usize) -> Self {
        FunctionSpec {
            approach: Approach::Mlm,
            context_size: Some(context_size),
            prompt_id: Some(prompt_id),
            model: Some(model.to_string()),
            group: model.to_string(),
            label: format!("{model}/p{prompt_id}-ct{context_size}"),
        }
    }

    pub fn with_group(mut self, group: &str) -> Self {
        self.group = group.to_string();
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Preceding items the function looks at.
    pub fn window(&self) -> usize {
        self.context_size.unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("function {}: {why}", self.label)));
        let is_mlm = self.approach == Approach::Mlm;
        if self.prompt_id.is_some() != is_mlm {
            return bad("a prompt id is required for mlm functions and only for them");
        }
        if self.model.is_some() != is_mlm {
            return bad("a model is required for mlm functions and only for them");
        }
        if let Some(p) = self.prompt_id {
            if !(1..=4).contains(&p) {
                return bad("prompt id must be between 1 and 4");
            }
        }
        if self.context_size.is_some() != self.approach.uses_context() {
            return bad("context size applies only to embedding and mlm functions");
        }
        if self.label.is_empty() {
            return bad("empty label");
        }
        Ok(())
    }
}

/// Validates each spec and checks that labels are unique.
pub fn validate_registry(specs: &[FunctionSpec]) -> Result<()> {
    let mut labels = BTreeSet::new();
    for s in specs {
        s.validate()?;
        if !labels.insert(s.label.as_str()) {
            return Err(Error::Config(format!("duplicate function label {:?}", s.label)));
        }
    }
    Ok(())
}
