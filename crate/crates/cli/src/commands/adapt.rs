use std::collections::BTreeMap;

use fluency_core::adaptive::{sweep_window_sizes, AdaptiveTrace, CurvePoint, ListOutcomes, Registry};
use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::format::{fixed6, to_json_bytes};
use fluency_core::metrics::{aggregate, choice_share, crossover_points, switch_rate, Metric};
use fluency_core::{Error, Result};

use crate::artifacts::{AdaptFile, AdaptK, BestPoint, CrossoverPair, CurveRow, Share};
use crate::commands::evaluate::{build_matrix, group_rows};
use crate::csvout::CsvOut;
use crate::pipeline::{compute_outcomes, RunContext};

fn opt6(x: Option<f64>) -> String {
    x.map(fixed6).unwrap_or_default()
}

fn dash(x: Option<usize>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn crossover(curve: &[CurvePoint], bo: f64, bi: f64) -> Result<CrossoverPair> {
    let points: Vec<(usize, f64)> = curve
        .iter()
        .filter_map(|p| p.top_k.map(|y| (p.window_size, y)))
        .collect();
    if points.is_empty() {
        return Ok(CrossoverPair { bo: None, bi: None });
    }
    let c = crossover_points(&points, bo, bi)?;
    Ok(CrossoverPair { bo: c.bo, bi: c.bi })
}

fn best(curve: &[CurvePoint]) -> Option<BestPoint> {
    let mut out: Option<BestPoint> = None;
    for p in curve {
        if let Some(v) = p.top_k {
            if out.is_none_or(|b| v > b.value) {
                out = Some(BestPoint {
                    window_size: p.window_size,
                    value: v,
                });
            }
        }
    }
    out
}

fn shares(traces: &BTreeMap<usize, Vec<AdaptiveTrace>>) -> Result<BTreeMap<String, f64>> {
    let all: Vec<AdaptiveTrace> = traces.values().flatten().cloned().collect();
    if all.iter().all(|t| t.decisions.is_empty()) {
        return Ok(BTreeMap::new());
    }
    choice_share(&all)
}

fn rate(traces: &[AdaptiveTrace]) -> Option<f64> {
    switch_rate(traces).ok()
}

pub fn run(ctx: &RunContext) -> Result<()> {
    let outcomes = compute_outcomes(ctx)?;
    let settings = &ctx.config.config.adaptive;
    let windows = settings.windows();
    let longest = outcomes.lists.iter().map(|l| l.items.len()).max().unwrap_or(0);
    if windows.iter().all(|&x| x >= longest) {
        return Err(Error::Validation(format!(
            "adaptive window sizes {}..{} leave nothing to evaluate: the longest list has {longest} items",
            windows[0],
            windows[windows.len() - 1]
        )));
    }
    let registry = Registry::new(
        outcomes.functions.iter().map(|f| f.label.clone()).collect(),
        outcomes.functions.iter().map(|f| f.group.clone()).collect(),
    )?;
    let lists: Vec<ListOutcomes> = outcomes
        .lists
        .iter()
        .enumerate()
        .map(|(l, list)| ListOutcomes {
            list_id: list.id(),
            category: list.category.clone(),
            by_function: outcomes.by_function.iter().map(|f| f[l].clone()).collect(),
        })
        .collect();
    let groups: Vec<String> = group_rows(&outcomes.functions).into_iter().map(|(g, _)| g).collect();
    let dir = ctx.stage_dir("adapt");

    let mut results = Vec::new();
    let mut crossover_csv = CsvOut::new(&["k", "algorithm", "bo", "bi"]);
    for k in ctx.config.adaptive_k_values() {
        let selection = settings.selection_for(k);
        let sweep = sweep_window_sizes(&registry, &lists, &windows, selection, k)?;
        let reference = aggregate(&build_matrix(&outcomes, Metric::TopK(k))?)?;

        let mut curves = CsvOut::new(&[
            "window_size",
            "algorithm",
            "included_lists",
            "excluded_lists",
            "evaluated_positions",
            "top_k",
            "scaled_ll",
        ]);
        for (name, curve) in [("atc", &sweep.atc), ("ca", &sweep.ca)] {
            for p in curve {
                curves.row(&[
                    p.window_size.to_string(),
                    name.to_string(),
                    p.included_lists.to_string(),
                    p.excluded_lists.to_string(),
                    p.evaluated_positions.to_string(),
                    opt6(p.top_k),
                    opt6(p.scaled_ll),
                ]);
            }
        }
        write_atomic(&dir.join(format!("curves_top_{k}.csv")), &curves.finish()?)?;

        for (name, traces) in [("atc", &sweep.atc_traces), ("ca", &sweep.ca_traces)] {
            let mut bytes = Vec::new();
            for t in traces.values().flatten() {
                bytes.extend(t.to_jsonl());
            }
            write_atomic(&dir.join(format!("traces_{name}_top_{k}.jsonl")), &bytes)?;
        }

        let atc_share = shares(&sweep.atc_traces)?;
        let ca_share = shares(&sweep.ca_traces)?;
        let choice: Vec<Share> = groups
            .iter()
            .map(|g| Share {
                group: g.clone(),
                atc: atc_share.get(g).copied().unwrap_or(0.0),
                ca: ca_share.get(g).copied().unwrap_or(0.0),
            })
            .collect();
        let mut share_csv = CsvOut::new(&["group", "atc_pct", "ca_pct"]);
        for s in &choice {
            share_csv.row(&[s.group.clone(), fixed6(s.atc), fixed6(s.ca)]);
        }
        write_atomic(&dir.join(format!("choice_share_top_{k}.csv")), &share_csv.finish()?)?;

        let mut switch_csv = CsvOut::new(&["window_size", "switch_rate_pct"]);
        for (x, traces) in &sweep.ca_traces {
            switch_csv.row(&[x.to_string(), opt6(rate(traces))]);
        }
        write_atomic(&dir.join(format!("switch_rate_top_{k}.csv")), &switch_csv.finish()?)?;
        let all_ca: Vec<AdaptiveTrace> = sweep.ca_traces.values().flatten().cloned().collect();

        let atc_crossover = crossover(&sweep.atc, reference.bo, reference.bi)?;
        let ca_crossover = crossover(&sweep.ca, reference.bo, reference.bi)?;
        for (name, c) in [("atc", atc_crossover), ("ca", ca_crossover)] {
            crossover_csv.row(&[k.to_string(), name.to_string(), dash(c.bo), dash(c.bi)]);
        }

        results.push(AdaptK {
            k,
            selection: selection.to_string(),
            bo: reference.bo,
            bi: reference.bi,
            bo_function: reference.bo_function.clone(),
            atc_best: best(&sweep.atc),
            ca_best: best(&sweep.ca),
            atc_crossover,
            ca_crossover,
            ca_switch_rate: rate(&all_ca),
            curve: sweep
                .atc
                .iter()
                .zip(&sweep.ca)
                .map(|(a, c)| CurveRow {
                    window_size: a.window_size,
                    atc: a.top_k,
                    ca: c.top_k,
                })
                .collect(),
            choice_share: choice,
        });
    }
    write_atomic(&dir.join("crossover.csv"), &crossover_csv.finish()?)?;
    let summary = AdaptFile {
        window_sizes: windows,
        results,
    };
    write_atomic(&dir.join("summary.json"), &to_json_bytes(&summary))?;
    log::info!("adaptive sweep written to {}", dir.display());
    Ok(())
}
