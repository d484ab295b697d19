use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::format::fixed6;
use fluency_core::metrics::Metric;
use fluency_core::{Error, Result};
use serde::de::DeserializeOwned;

use crate::artifacts::{AdaptFile, AggregateFile, CategoryFile, MetricReport};
use crate::csvout::CsvOut;
use crate::pipeline::RunContext;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fluency_core::fsutil::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn value(metric: Metric, x: f64) -> String {
    match metric {
        Metric::ScaledLl => format!("{x:.2}"),
        _ => format!("{:.1}", x * 100.0),
    }
}

fn metric_name(metric: Metric) -> String {
    match metric {
        Metric::Coverage => "Coverage".into(),
        Metric::ScaledLl => "Scaled LL".into(),
        Metric::TopK(k) => format!("Top-{k}"),
    }
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn static_rows(label: &str, metrics: &[MetricReport]) -> Vec<String> {
    let mut row = vec![label.to_string()];
    for m in metrics {
        row.push(value(m.metric, m.report.avg));
        row.push(value(m.metric, m.report.bo));
        row.push(value(m.metric, m.report.bi));
    }
    row
}

fn static_section(out: &mut String, agg: &AggregateFile) {
    let _ = writeln!(out, "## Static functions\n");
    let _ = writeln!(
        out,
        "Avg, BO (best overall) and BI (best individual) over {} lists. Coverage and top-k in percent.\n",
        agg.lists
    );
    let mut header = vec!["Approach".to_string()];
    for m in &agg.overall {
        let name = metric_name(m.metric);
        header.extend([format!("{name} Avg"), format!("{name} BO"), format!("{name} BI")]);
    }
    let mut rows: Vec<Vec<String>> = agg.groups.iter().map(|g| static_rows(&g.group, &g.metrics)).collect();
    rows.push(static_rows("all functions", &agg.overall));
    table(out, &header, &rows);
}

fn category_section(out: &mut String, cats: &CategoryFile) {
    let _ = writeln!(out, "## Best overall by category\n");
    let mut header = vec!["Category".to_string(), "Approach".to_string()];
    let shown: Vec<Metric> = cats
        .categories
        .first()
        .map(|c| {
            c.aggregate
                .overall
                .iter()
                .map(|m| m.metric)
                .filter(|m| *m != Metric::ScaledLl)
                .collect()
        })
        .unwrap_or_default();
    header.extend(shown.iter().map(|m| format!("BO {}", metric_name(*m))));
    let mut rows = Vec::new();
    for c in &cats.categories {
        for g in &c.aggregate.groups {
            let mut row = vec![format!("{} ({} lists)", c.category, c.aggregate.lists), g.group.clone()];
            for m in &shown {
                let r = g.metrics.iter().find(|r| r.metric == *m);
                row.push(r.map(|r| value(*m, r.report.bo)).unwrap_or_default());
            }
            rows.push(row);
        }
    }
    table(out, &header, &rows);
}

fn opt(x: Option<usize>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

fn adapt_sections(out: &mut String, adapt: &AdaptFile) {
    let _ = writeln!(out, "## Adaptive selection\n");
    let header: Vec<String> = ["k", "Selection", "Algorithm", "Best x", "Top-k at best x", "BO", "BI"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for r in &adapt.results {
        for (name, b) in [("ATC", r.atc_best), ("CA", r.ca_best)] {
            rows.push(vec![
                r.k.to_string(),
                r.selection.clone(),
                name.into(),
                opt(b.map(|b| b.window_size)),
                b.map(|b| format!("{:.1}", b.value * 100.0))
                    .unwrap_or_else(|| "-".into()),
                format!("{:.1}", r.bo * 100.0),
                format!("{:.1}", r.bi * 100.0),
            ]);
        }
    }
    table(out, &header, &rows);

    let _ = writeln!(out, "## Choice share\n");
    let _ = writeln!(
        out,
        "Percentage of decisions choosing each approach, over all window sizes.\n"
    );
    for r in &adapt.results {
        let header = vec![
            "Approach".to_string(),
            format!("ATC top-{}", r.k),
            format!("CA top-{}", r.k),
        ];
        let rows: Vec<Vec<String>> = r
            .choice_share
            .iter()
            .map(|s| vec![s.group.clone(), format!("{:.1}", s.atc), format!("{:.1}", s.ca)])
            .collect();
        table(out, &header, &rows);
    }

    let _ = writeln!(out, "## Crossover points\n");
    let _ = writeln!(
        out,
        "Smallest window size whose curve reaches the static reference; `-` when never reached.\n"
    );
    let header: Vec<String> = ["k", "Algorithm", "BO", "BI", "CA switch rate (%)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for r in &adapt.results {
        rows.push(vec![
            r.k.to_string(),
            "ATC".into(),
            opt(r.atc_crossover.bo),
            opt(r.atc_crossover.bi),
            String::new(),
        ]);
        rows.push(vec![
            r.k.to_string(),
            "CA".into(),
            opt(r.ca_crossover.bo),
            opt(r.ca_crossover.bi),
            r.ca_switch_rate
                .map(|s| format!("{s:.1}"))
                .unwrap_or_else(|| "-".into()),
        ]);
    }
    table(out, &header, &rows);
}

pub fn run(ctx: &RunContext) -> Result<()> {
    let eval_dir = ctx.stage_dir("evaluate");
    let adapt_dir = ctx.stage_dir("adapt");
    let required: Vec<PathBuf> = ["aggregate.json", "aggregate_by_category.json"]
        .iter()
        .map(|f| eval_dir.join(f))
        .collect();
    let absent: Vec<String> = required
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !absent.is_empty() {
        return Err(Error::Validation(format!(
            "missing evaluation artifacts (run `evaluate` first): {}",
            absent.join(", ")
        )));
    }
    let agg: AggregateFile = read_json(&required[0])?;
    let cats: CategoryFile = read_json(&required[1])?;
    let adapt_path = adapt_dir.join("summary.json");
    let adapt: Option<AdaptFile> = if adapt_path.exists() {
        Some(read_json(&adapt_path)?)
    } else {
        None
    };

    let mut md = String::from("# Fluency run summary\n\n");
    static_section(&mut md, &agg);
    category_section(&mut md, &cats);
    let report_dir = ctx.stage_dir("report");
    match &adapt {
        Some(a) => {
            adapt_sections(&mut md, a);
            for r in &a.results {
                let mut csv = CsvOut::new(&["x", "atc", "ca", "bo", "bi"]);
                for row in &r.curve {
                    csv.row(&[
                        row.window_size.to_string(),
                        row.atc.map(fixed6).unwrap_or_default(),
                        row.ca.map(fixed6).unwrap_or_default(),
                        fixed6(r.bo),
                        fixed6(r.bi),
                    ]);
                }
                write_atomic(
                    &report_dir.join(format!("accuracy_vs_window_top_{}.csv", r.k)),
                    &csv.finish()?,
                )?;
            }
        }
        None => {
            let _ = writeln!(
                md,
                "## Adaptive selection\n\nOmitted: adapt/summary.json not found. Run `adapt` to add the adaptive, choice-share and crossover tables.\n"
            );
        }
    }
    write_atomic(&report_dir.join("summary.md"), md.as_bytes())?;
    log::info!("report written to {}", report_dir.display());
    Ok(())
}
