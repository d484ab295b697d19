use std::collections::BTreeMap;

use serde::Serialize;

use crate::adaptive::AdaptiveTrace;
use crate::{Error, Result};

/// Window sizes at which an adaptive curve first reaches the BO and BI
/// reference lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossover {
    pub bo: Option<usize>,
    pub bi: Option<usize>,
}

fn first_reaching(curve: &[(usize, f64)], reference: f64) -> Option<usize> {
    curve.iter().find(|(_, y)| *y >= reference).map(|(x, _)| *x)
}

/// `curve` holds (window size, score) points in increasing window size.
pub fn crossover_points(curve: &[(usize, f64)], bo: f64, bi: f64) -> Result<Crossover> {
    if curve.is_empty() {
        return Err(Error::Validation("crossover of an empty curve".into()));
    }
    if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Validation("curve window sizes must increase".into()));
    }
    Ok(Crossover {
        bo: first_reaching(curve, bo),
        bi: first_reaching(curve, bi),
    })
}

/// Percentage of decisions choosing each function group.
pub fn choice_share(traces: &[AdaptiveTrace]) -> Result<BTreeMap<String, f64>> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for d in traces.iter().flat_map(|t| &t.decisions) {
        *counts.entry(d.group.clone()).or_insert(0) += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Validation("choice share needs at least one decision".into()));
    }
    Ok(counts
        .into_iter()
        .map(|(g, c)| (g, c as f64 * 100.0 / total as f64))
        .collect())
}

/// Percentage of decisions that differ from the previous decision on the
/// same list.
pub fn switch_rate(traces: &[AdaptiveTrace]) -> Result<f64> {
    let mut eligible = 0usize;
    let mut switches = 0usize;
    for t in traces {
        for pair in t.decisions.windows(2) {
            eligible += 1;
            if pair[1].chosen != pair[0].chosen {
                switches += 1;
            }
        }
    }
    if eligible == 0 {
        return Err(Error::Validation(
            "switch rate needs a decision with a predecessor".into(),
        ));
    }
    Ok(switches as f64 * 100.0 / eligible as f64)
}
