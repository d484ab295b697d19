use std::collections::{BTreeMap, BTreeSet};

use fluency_core::cleaning::{clean_dataset, reports_to_csv, CleaningOptions};
use fluency_core::corpus::{
    lexicon_with_cache, load_lexicon_cache, CategoryLexicon, EdgeSource, HttpEdgeSource, RawDataset, RecordedEdgeSource,
};
use fluency_core::fsutil::write_atomic;
use fluency_core::{Error, Result};

use crate::pipeline::RunContext;
use crate::resources;

pub fn run(ctx: &RunContext) -> Result<()> {
    let cfg = &ctx.config.config;
    let cleaning = cfg
        .cleaning
        .as_ref()
        .ok_or_else(|| Error::Config("`clean` needs a [cleaning] section".into()))?;
    let raw = RawDataset::read(&cfg.dataset.path, &cfg.dataset.format())?;
    let (lists, assignment) = raw.group_verbatim()?;

    let source: Option<Box<dyn EdgeSource>> = match (&cleaning.conceptnet_fixture, &cleaning.conceptnet_url) {
        (Some(path), _) => Some(Box::new(RecordedEdgeSource::load(path)?)),
        (None, Some(url)) => {
            let mut http = HttpEdgeSource::new(url.clone());
            if let Some(dir) = &cleaning.conceptnet_response_cache {
                http = http.with_response_cache(dir.clone());
            }
            Some(Box::new(http))
        }
        (None, None) => None,
    };
    let relations: Vec<&str> = cleaning.relations.iter().map(String::as_str).collect();
    let categories: BTreeSet<&str> = lists.iter().map(|l| l.category.as_str()).collect();
    let mut lexicons: BTreeMap<String, CategoryLexicon> = BTreeMap::new();
    match &source {
        Some(src) => {
            for cat in categories {
                let lex = lexicon_with_cache(cat, &relations, Some(src.as_ref()), &cleaning.lexicon_cache)?;
                lexicons.insert(cat.to_string(), lex);
            }
        }
        None => {
            let cached = load_lexicon_cache(&cleaning.lexicon_cache)?;
            for cat in categories {
                match cached.get(cat) {
                    Some(lex) => {
                        lexicons.insert(cat.to_string(), lex.clone());
                    }
                    None => log::warn!(
                        "no lexicon for category {cat:?} in {}; its items are only normalized",
                        cleaning.lexicon_cache.display()
                    ),
                }
            }
        }
    }

    let options = CleaningOptions {
        lemmatizer: resources::lemmatizer(&ctx.config)?,
        max_distance: cleaning.max_distance,
    };
    let cleaned = clean_dataset(&lists, &lexicons, &options)?;
    let bytes = raw.write_with_items(|row| {
        let (list, pos) = assignment[row];
        cleaned.alignment[list][pos].clone()
    })?;
    let dir = ctx.stage_dir("clean");
    write_atomic(&dir.join("cleaned.csv"), &bytes)?;
    write_atomic(&dir.join("report.csv"), &reports_to_csv(&cleaned.reports)?)?;
    log::info!(
        "cleaned {} lists, {} items flagged, written to {}",
        cleaned.lists.len(),
        cleaned.reports.len(),
        dir.display()
    );
    Ok(())
}
