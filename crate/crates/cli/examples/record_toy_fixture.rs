//! Records a fill-mask fixture for every masked-LM function of a config,
//! answering prompts with a small deterministic toy model.
//!
//! ```text
//! cargo run -p fluency-cli --example record_toy_fixture -- fixtures/demo/config.toml
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use fluency_cli::config::{BackendKind, LoadedConfig};
use fluency_cli::resources;
use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::score_list;
use fluency_core::mlm::{CachedBackend, FixtureFile, MaskRankings, MaskScoringBackend, TokenScore, WIRE_VERSION};
use fluency_core::predictors::{Approach, Engine};
use fluency_core::Result;
use sha2::{Digest, Sha256};

const MASK: &str = "[MASK]";
const TOP_N: usize = 8;

const ANIMAL: &[&str] = &[
    "dog", "cat", "horse", "cow", "pig", "sheep", "lion", "tiger", "bear", "polar", "zebra", "monkey", "mouse", "goat",
];
const FRUIT: &[&str] = &[
    "apple", "banana", "orange", "grape", "pear", "cherry", "peach", "plum", "mango", "lemon", "kiwi", "straw", "blue",
    "pine",
];
const PIECES: &[&str] = &["##berry", "##apple", "##s", "##y"];
const FILLER: &[&str] = &["the", "animal", "fruit", "car", "tree", "bear"];

/// Scores every vocabulary token from a hash of the prompt: tokens of the
/// prompt's category and, after a partial word, continuation pieces are
/// favoured. Probabilities are a softmax over the whole toy vocabulary.
struct ToyModel;

impl ToyModel {
    fn ranking(prompt: &str) -> Vec<TokenScore> {
        let continuing = prompt
            .find(MASK)
            .is_some_and(|i| prompt[..i].chars().last().is_some_and(|c| c.is_alphabetic()));
        let animals = prompt.contains("animals");
        let mut vocab: Vec<&str> = ANIMAL
            .iter()
            .chain(FRUIT)
            .chain(PIECES)
            .chain(FILLER)
            .copied()
            .collect();
        vocab.sort_unstable();
        vocab.dedup();
        let scores: Vec<(String, f64)> = vocab
            .iter()
            .map(|t| {
                let h = Sha256::digest(format!("{prompt}\u{0}{t}").as_bytes());
                let noise = f64::from(u16::from_be_bytes([h[0], h[1]])) / 65535.0;
                let piece = t.starts_with("##");
                let topical = if animals { ANIMAL.contains(t) } else { FRUIT.contains(t) };
                let mut s = 2.0 * noise;
                if topical && !continuing {
                    s += 2.5;
                }
                if piece == continuing {
                    s += 1.5;
                }
                if prompt.contains(&format!(" {t} ")) || prompt.contains(&format!(" {t},")) {
                    s -= 3.0;
                }
                (t.to_string(), s)
            })
            .collect();
        let z: f64 = scores.iter().map(|(_, s)| s.exp()).sum();
        let mut ranked: Vec<TokenScore> = scores
            .into_iter()
            .map(|(token, s)| TokenScore {
                token,
                probability: s.exp() / z,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then_with(|| a.token.cmp(&b.token))
        });
        ranked.truncate(TOP_N);
        ranked
    }
}

impl MaskScoringBackend for ToyModel {
    fn identity(&self) -> &str {
        "toy"
    }

    fn mask_token(&self) -> &str {
        MASK
    }

    fn max_top_n(&self) -> usize {
        TOP_N
    }

    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings> {
        let masks = prompt.matches(MASK).count();
        // Later masks see the prompt with earlier masks left in place.
        let ranking: Vec<TokenScore> = Self::ranking(prompt).into_iter().take(top_n).collect();
        Ok(vec![ranking; masks.max(1)])
    }
}

fn main() -> Result<()> {
    let config = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "fixtures/demo/config.toml".into()),
    );
    // The config must validate, so make sure every fixture path exists.
    let text = std::fs::read_to_string(&config).expect("config readable");
    let raw: fluency_cli::RunConfig = toml::from_str(&text).expect("config parses");
    let base = config.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
    for p in raw.backend.fixtures.values() {
        let p = base.join(p);
        if !p.exists() {
            let empty = FixtureFile {
                v: WIRE_VERSION,
                model: "toy".into(),
                mask_token: MASK.into(),
                prompts: Default::default(),
                top_n: Default::default(),
            };
            write_atomic(&p, &empty.to_json())?;
        }
    }
    let mut cfg = LoadedConfig::load(&config)?;
    let mlm: Vec<_> = cfg
        .functions
        .iter()
        .filter(|f| f.approach == Approach::Mlm)
        .cloned()
        .collect();
    cfg.functions.retain(|f| f.approach != Approach::Mlm);
    cfg.functions
        .push(fluency_core::predictors::FunctionSpec::random_baseline());
    cfg.functions.dedup_by(|a, b| a.label == b.label);
    let mut loaded = resources::load(&cfg, BackendKind::Fixture)?;
    let recorder = Arc::new(CachedBackend::new(Arc::new(ToyModel)));
    for model in mlm.iter().filter_map(|f| f.model.clone()) {
        loaded.resources.backends.insert(model, recorder.clone());
    }
    let engine = Engine::new(loaded.resources);
    let lists = fluency_core::corpus::load_fluency_dataset(&cfg.config.dataset.path, &cfg.config.dataset.format())?;
    for spec in &mlm {
        let predictor = engine.bind(spec)?;
        for list in &lists {
            score_list(&predictor, list, cfg.config.metrics.prediction_limit)?;
        }
    }
    let mut fixture = recorder.to_fixture();
    fixture.top_n.clear();
    for (model, path) in &cfg.config.backend.fixtures {
        fixture.model = model.clone();
        write_atomic(path, &fixture.to_json())?;
        println!("{}: {} prompts", path.display(), fixture.prompts.len());
    }
    Ok(())
}
