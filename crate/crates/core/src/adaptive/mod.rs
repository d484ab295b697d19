//! Adaptive function selection: Adapt-Then-Change (ATC) picks one function
//! from a list's first items, Continuous Adaptation (CA) re-picks before
//! every item from a sliding window.
//!
//! Both work on precomputed per-item outcomes, so a window score is a
//! prefix-sum difference rather than a predictor call.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::format::serialize_fixed6;
use crate::metrics::{ItemOutcome, PROBABILITY_FLOOR};
use crate::{Error, Result};

/// Fixed-point scale for log probabilities, so window sums are exact
/// integers whichever way they are computed.
pub const LOG_PROB_SCALE: f64 = (1u64 << 32) as f64;

/// Floored natural-log probability in fixed point.
pub fn quantize_log_prob(probability: Option<f64>) -> i64 {
    (probability.unwrap_or(0.0).max(PROBABILITY_FLOOR).ln() * LOG_PROB_SCALE).round() as i64
}

/// Window score the selectors maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    /// Top-k hits, then scaled log-likelihood.
    TopK(usize),
    /// Scaled log-likelihood, then top-k hits at the evaluation k.
    ScaledLl,
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionMetric::TopK(k) => write!(f, "top_{k}"),
            SelectionMetric::ScaledLl => f.write_str("scaled_ll"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveConfig {
    pub window_size: usize,
    pub selection: SelectionMetric,
    /// k of the reported top-k accuracy.
    pub k: usize,
}

impl AdaptiveConfig {
    /// Selection on top-k at the reported k.
    pub fn new(window_size: usize, k: usize) -> Self {
        AdaptiveConfig {
            window_size,
            selection: SelectionMetric::TopK(k),
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::Config("window size must be at least 1".into()));
        }
        if self.k == 0 || self.selection == SelectionMetric::TopK(0) {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// The static functions to choose from, in registry order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    pub labels: Vec<String>,
    /// Approach-level group of each function.
    pub groups: Vec<String>,
}

impl Registry {
    pub fn new(labels: Vec<String>, groups: Vec<String>) -> Result<Self> {
        if labels.is_empty() || labels.len() != groups.len() {
            return Err(Error::Validation(
                "registry needs one group per label and at least one function".into(),
            ));
        }
        Ok(Registry { labels, groups })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Outcomes of every registry function on one list.
#[derive(Debug, Clone, PartialEq)]
pub struct ListOutcomes {
    pub list_id: String,
    pub category: String,
    /// One outcome vector per function, registry order.
    pub by_function: Vec<Vec<ItemOutcome>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Atc,
    Ca,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Atc => "atc",
            Algorithm::Ca => "ca",
        })
    }
}

/// A function's score over a selection window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub function: String,
    pub hits: u32,
    #[serde(serialize_with = "serialize_fixed6")]
    pub scaled_ll: f64,
}

/// One selection: the function used for positions `position..=through`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub position: usize,
    pub through: usize,
    pub chosen: String,
    pub group: String,
    pub switched: bool,
    pub window_scores: Vec<WindowScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveTrace {
    pub list_id: String,
    pub algorithm: Algorithm,
    pub window_size: usize,
    pub decisions: Vec<Decision>,
}

impl AdaptiveTrace {
    pub fn switches(&self) -> usize {
        self.decisions.iter().filter(|d| d.switched).count()
    }

    /// One JSON object per decision, each carrying the list and algorithm.
    pub fn to_jsonl(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Line<'a> {
            list_id: &'a str,
            algorithm: Algorithm,
            window_size: usize,
            #[serde(flatten)]
            decision: &'a Decision,
        }
        let mut out = Vec::new();
        for decision in &self.decisions {
            let line = Line {
                list_id: &self.list_id,
                algorithm: self.algorithm,
                window_size: self.window_size,
                decision,
            };
            serde_json::to_writer(&mut out, &line).expect("decision serializes");
            out.push(b'\n');
        }
        out
    }

    /// Inverse of [`AdaptiveTrace::to_jsonl`] for a stream holding many
    /// traces; consecutive lines of one list form one trace.
    pub fn from_jsonl(text: &str) -> Result<Vec<AdaptiveTrace>> {
        #[derive(Deserialize)]
        struct Line {
            list_id: String,
            algorithm: Algorithm,
            window_size: usize,
            #[serde(flatten)]
            decision: Decision,
        }
        let mut traces: Vec<AdaptiveTrace> = Vec::new();
        for (i, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let line: Line =
                serde_json::from_str(raw).map_err(|e| Error::Validation(format!("trace line {}: {e}", i + 1)))?;
            match traces.last_mut() {
                Some(t)
                    if t.list_id == line.list_id
                        && t.algorithm == line.algorithm
                        && t.window_size == line.window_size =>
                {
                    t.decisions.push(line.decision)
                }
                _ => traces.push(AdaptiveTrace {
                    list_id: line.list_id,
                    algorithm: line.algorithm,
                    window_size: line.window_size,
                    decisions: vec![line.decision],
                }),
            }
        }
        Ok(traces)
    }
}

/// Scores over the evaluated positions of one adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveSummary {
    pub evaluated: usize,
    pub hits: usize,
    #[serde(serialize_with = "serialize_fixed6")]
    pub top_k: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub scaled_ll: f64,
    #[serde(serialize_with = "serialize_fixed6")]
    pub coverage: f64,
}

impl AdaptiveSummary {
    fn from_items(items: &[&ItemOutcome], k: usize) -> Self {
        let owned: Vec<ItemOutcome> = items.iter().map(|o| (*o).clone()).collect();
        let hits = owned.iter().filter(|o| o.hit(k)).count();
        AdaptiveSummary {
            evaluated: owned.len(),
            hits,
            top_k: crate::metrics::top_k_accuracy(&owned, k),
            scaled_ll: crate::metrics::scaled_log_likelihood(&owned),
            coverage: crate::metrics::coverage(&owned),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub summary: AdaptiveSummary,
    pub trace: AdaptiveTrace,
}

/// Comparable window score: primary and secondary criteria as exact
/// rationals (numerator, denominator).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Key {
    primary: (i128, i128),
    secondary: (i128, i128),
}

fn cmp_ratio(a: (i128, i128), b: (i128, i128)) -> Ordering {
    (a.0 * b.1).cmp(&(b.0 * a.1))
}

impl Key {
    fn cmp(&self, other: &Key) -> Ordering {
        cmp_ratio(self.primary, other.primary).then_with(|| cmp_ratio(self.secondary, other.secondary))
    }
}

/// Prefix sums of one function's per-item scores.
struct Prefix {
    selection_hits: Vec<i64>,
    eval_hits: Vec<i64>,
    log_prob: Vec<i64>,
    covered: Vec<i64>,
}

impl Prefix {
    fn new(outcomes: &[ItemOutcome], selection_k: usize, eval_k: usize) -> Self {
        let mut p = Prefix {
            selection_hits: vec![0],
            eval_hits: vec![0],
            log_prob: vec![0],
            covered: vec![0],
        };
        for o in outcomes {
            let push = |v: &mut Vec<i64>, x: i64| v.push(v.last().copied().unwrap_or(0) + x);
            push(&mut p.selection_hits, i64::from(o.hit(selection_k)));
            push(&mut p.eval_hits, i64::from(o.hit(eval_k)));
            push(
                &mut p.log_prob,
                if o.in_coverage {
                    quantize_log_prob(o.probability)
                } else {
                    0
                },
            );
            push(&mut p.covered, i64::from(o.in_coverage));
        }
        p
    }

    /// Window `[start, end)` over 0-based positions.
    fn key(&self, start: usize, end: usize, metric: SelectionMetric) -> Key {
        let len = (end - start) as i128;
        let covered = i128::from(self.covered[end] - self.covered[start]);
        let ll = if covered == 0 {
            (i128::from(quantize_log_prob(None)), 1)
        } else {
            (i128::from(self.log_prob[end] - self.log_prob[start]), covered)
        };
        match metric {
            SelectionMetric::TopK(_) => Key {
                primary: (i128::from(self.selection_hits[end] - self.selection_hits[start]), len),
                secondary: ll,
            },
            SelectionMetric::ScaledLl => Key {
                primary: ll,
                secondary: (i128::from(self.eval_hits[end] - self.eval_hits[start]), len),
            },
        }
    }

    fn window_score(&self, label: &str, start: usize, end: usize, metric: SelectionMetric) -> WindowScore {
        let key = self.key(start, end, metric);
        let ll = match metric {
            SelectionMetric::TopK(_) => key.secondary,
            SelectionMetric::ScaledLl => key.primary,
        };
        let hits = match metric {
            SelectionMetric::TopK(_) => self.selection_hits[end] - self.selection_hits[start],
            SelectionMetric::ScaledLl => self.eval_hits[end] - self.eval_hits[start],
        };
        WindowScore {
            function: label.to_string(),
            hits: hits as u32,
            scaled_ll: ll.0 as f64 / ll.1 as f64 / LOG_PROB_SCALE,
        }
    }
}

fn prepare(registry: &Registry, list: &ListOutcomes, cfg: &AdaptiveConfig) -> Result<Option<(Vec<Prefix>, usize)>> {
    cfg.validate()?;
    if list.by_function.len() != registry.len() {
        return Err(Error::Validation(format!(
            "list {} has outcomes for {} functions, registry has {}",
            list.list_id,
            list.by_function.len(),
            registry.len()
        )));
    }
    let len = list.by_function[0].len();
    if list.by_function.iter().any(|o| o.len() != len) {
        return Err(Error::Validation(format!("list {} has ragged outcomes", list.list_id)));
    }
    if cfg.window_size >= len {
        return Ok(None);
    }
    let selection_k = match cfg.selection {
        SelectionMetric::TopK(k) => k,
        SelectionMetric::ScaledLl => cfg.k,
    };
    let prefixes = list
        .by_function
        .iter()
        .map(|o| Prefix::new(o, selection_k, cfg.k))
        .collect();
    Ok(Some((prefixes, len)))
}

/// Best function on window `[start, end)`; ties prefer `incumbent`, then
/// registry order.
fn select(prefixes: &[Prefix], start: usize, end: usize, metric: SelectionMetric, incumbent: Option<usize>) -> usize {
    let keys: Vec<Key> = prefixes.iter().map(|p| p.key(start, end, metric)).collect();
    let mut best = 0;
    for f in 1..keys.len() {
        if keys[f].cmp(&keys[best]) == Ordering::Greater {
            best = f;
        }
    }
    match incumbent {
        Some(i) if keys[i].cmp(&keys[best]) == Ordering::Equal => i,
        _ => best,
    }
}

fn scores(
    registry: &Registry,
    prefixes: &[Prefix],
    start: usize,
    end: usize,
    metric: SelectionMetric,
) -> Vec<WindowScore> {
    prefixes
        .iter()
        .zip(&registry.labels)
        .map(|(p, l)| p.window_score(l, start, end, metric))
        .collect()
}

/// ATC: the function best on items `1..=x` predicts items `x+1..`.
/// Returns `None` when the list has no item past the window.
pub fn run_atc(registry: &Registry, list: &ListOutcomes, cfg: &AdaptiveConfig) -> Result<Option<AdaptiveRun>> {
    let Some((prefixes, len)) = prepare(registry, list, cfg)? else {
        return Ok(None);
    };
    let x = cfg.window_size;
    let chosen = select(&prefixes, 0, x, cfg.selection, None);
    let items: Vec<&ItemOutcome> = list.by_function[chosen][x..].iter().collect();
    let decision = Decision {
        position: x + 1,
        through: len,
        chosen: registry.labels[chosen].clone(),
        group: registry.groups[chosen].clone(),
        switched: false,
        window_scores: scores(registry, &prefixes, 0, x, cfg.selection),
    };
    Ok(Some(AdaptiveRun {
        summary: AdaptiveSummary::from_items(&items, cfg.k),
        trace: AdaptiveTrace {
            list_id: list.list_id.clone(),
            algorithm: Algorithm::Atc,
            window_size: x,
            decisions: vec![decision],
        },
    }))
}

/// CA: before each item `n > x`, the function best on items `n-x..n-1`
/// predicts item `n`.
pub fn run_ca(registry: &Registry, list: &ListOutcomes, cfg: &AdaptiveConfig) -> Result<Option<AdaptiveRun>> {
    let Some((prefixes, len)) = prepare(registry, list, cfg)? else {
        return Ok(None);
    };
    let x = cfg.window_size;
    let mut decisions = Vec::with_capacity(len - x);
    let mut items = Vec::with_capacity(len - x);
    let mut previous: Option<usize> = None;
    for n in x..len {
        let chosen = select(&prefixes, n - x, n, cfg.selection, previous);
        items.push(&list.by_function[chosen][n]);
        decisions.push(Decision {
            position: n + 1,
            through: n + 1,
            chosen: registry.labels[chosen].clone(),
            group: registry.groups[chosen].clone(),
            switched: previous.is_some_and(|p| p != chosen),
            window_scores: scores(registry, &prefixes, n - x, n, cfg.selection),
        });
        previous = Some(chosen);
    }
    Ok(Some(AdaptiveRun {
        summary: AdaptiveSummary::from_items(&items, cfg.k),
        trace: AdaptiveTrace {
            list_id: list.list_id.clone(),
            algorithm: Algorithm::Ca,
            window_size: x,
            decisions,
        },
    }))
}

/// Aggregate of one algorithm at one window size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub window_size: usize,
    pub included_lists: usize,
    pub excluded_lists: usize,
    pub evaluated_positions: usize,
    /// Mean over included lists of the per-list top-k accuracy.
    #[serde(serialize_with = "crate::metrics::format::serialize_fixed6_opt")]
    pub top_k: Option<f64>,
    #[serde(serialize_with = "crate::metrics::format::serialize_fixed6_opt")]
    pub scaled_ll: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub atc: Vec<CurvePoint>,
    pub ca: Vec<CurvePoint>,
    /// Traces by window size, list order.
    pub atc_traces: BTreeMap<usize, Vec<AdaptiveTrace>>,
    pub ca_traces: BTreeMap<usize, Vec<AdaptiveTrace>>,
}

fn curve_point(x: usize, runs: &[AdaptiveRun], excluded: usize) -> CurvePoint {
    let n = runs.len();
    let mean = |f: &dyn Fn(&AdaptiveRun) -> f64| (n > 0).then(|| runs.iter().map(f).sum::<f64>() / n as f64);
    CurvePoint {
        window_size: x,
        included_lists: n,
        excluded_lists: excluded,
        evaluated_positions: runs.iter().map(|r| r.summary.evaluated).sum(),
        top_k: mean(&|r| r.summary.top_k),
        scaled_ll: mean(&|r| r.summary.scaled_ll),
    }
}

/// Runs ATC and CA for every window size. Lists too short for a window are
/// excluded from that point and counted.
pub fn sweep_window_sizes(
    registry: &Registry,
    lists: &[ListOutcomes],
    window_sizes: &[usize],
    selection: SelectionMetric,
    k: usize,
) -> Result<Sweep> {
    if window_sizes.is_empty() {
        return Err(Error::Config("window-size range is empty".into()));
    }
    let mut sweep = Sweep {
        atc: Vec::new(),
        ca: Vec::new(),
        atc_traces: BTreeMap::new(),
        ca_traces: BTreeMap::new(),
    };
    for &x in window_sizes {
        let cfg = AdaptiveConfig {
            window_size: x,
            selection,
            k,
        };
        let mut atc_runs = Vec::new();
        let mut ca_runs = Vec::new();
        for list in lists {
            if let Some(r) = run_atc(registry, list, &cfg)? {
                atc_runs.push(r);
            }
            if let Some(r) = run_ca(registry, list, &cfg)? {
                ca_runs.push(r);
            }
        }
        sweep.atc.push(curve_point(x, &atc_runs, lists.len() - atc_runs.len()));
        sweep.ca.push(curve_point(x, &ca_runs, lists.len() - ca_runs.len()));
        sweep
            .atc_traces
            .insert(x, atc_runs.into_iter().map(|r| r.trace).collect());
        sweep
            .ca_traces
            .insert(x, ca_runs.into_iter().map(|r| r.trace).collect());
    }
    Ok(sweep)
}
