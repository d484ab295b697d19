use fluency_core::fsutil::write_atomic;
use fluency_core::metrics::format::to_json_bytes;
use fluency_core::metrics::{aggregate, Metric, ScoreMatrix};
use fluency_core::predictors::FunctionSpec;
use fluency_core::Result;

use crate::artifacts::{AggregateFile, CategoryFile, CategoryReport, GroupReport, MetricReport};
use crate::pipeline::{compute_outcomes, Outcomes, RunContext};

/// Groups in order of first appearance in the registry, with their rows.
pub fn group_rows(functions: &[FunctionSpec]) -> Vec<(String, Vec<usize>)> {
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, f) in functions.iter().enumerate() {
        match out.iter_mut().find(|(g, _)| *g == f.group) {
            Some((_, rows)) => rows.push(i),
            None => out.push((f.group.clone(), vec![i])),
        }
    }
    out
}

pub fn build_matrix(outcomes: &Outcomes, metric: Metric) -> Result<ScoreMatrix> {
    let cells = outcomes
        .by_function
        .iter()
        .map(|per_list| per_list.iter().map(|o| metric.evaluate(o)).collect())
        .collect();
    ScoreMatrix::new(
        metric,
        outcomes.functions.iter().map(|f| f.label.clone()).collect(),
        outcomes.lists.iter().map(|l| l.id()).collect(),
        cells,
    )
}

fn aggregate_over(
    matrices: &[ScoreMatrix],
    groups: &[(String, Vec<usize>)],
    columns: &[usize],
) -> Result<AggregateFile> {
    let all_rows: Vec<usize> = (0..matrices[0].functions.len()).collect();
    let reports = |rows: &[usize]| -> Result<Vec<MetricReport>> {
        matrices
            .iter()
            .map(|m| {
                Ok(MetricReport {
                    metric: m.metric,
                    report: aggregate(&m.select(rows, columns))?,
                })
            })
            .collect()
    };
    Ok(AggregateFile {
        lists: columns.len(),
        overall: reports(&all_rows)?,
        groups: groups
            .iter()
            .map(|(g, rows)| {
                Ok(GroupReport {
                    group: g.clone(),
                    functions: rows.iter().map(|&r| matrices[0].functions[r].clone()).collect(),
                    metrics: reports(rows)?,
                })
            })
            .collect::<Result<_>>()?,
    })
}

pub fn run(ctx: &RunContext) -> Result<()> {
    let outcomes = compute_outcomes(ctx)?;
    if outcomes.lists.is_empty() {
        return Err(fluency_core::Error::Validation("dataset has no lists".into()));
    }
    let metrics = Metric::all(&ctx.config.config.metrics.k_values);
    let matrices = metrics
        .iter()
        .map(|&m| build_matrix(&outcomes, m))
        .collect::<Result<Vec<_>>>()?;
    let dir = ctx.stage_dir("evaluate");
    for m in &matrices {
        write_atomic(&dir.join(format!("matrix_{}.csv", m.metric)), &m.to_csv()?)?;
        write_atomic(
            &dir.join(format!("matrix_{}.json", m.metric)),
            &to_json_bytes(&m.sidecar()),
        )?;
    }

    let groups = group_rows(&outcomes.functions);
    let every_list: Vec<usize> = (0..outcomes.lists.len()).collect();
    let overall = aggregate_over(&matrices, &groups, &every_list)?;
    write_atomic(&dir.join("aggregate.json"), &to_json_bytes(&overall))?;

    let mut categories: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, l) in outcomes.lists.iter().enumerate() {
        match categories.iter_mut().find(|(c, _)| *c == l.category) {
            Some((_, cols)) => cols.push(i),
            None => categories.push((l.category.clone(), vec![i])),
        }
    }
    categories.sort_by(|a, b| a.0.cmp(&b.0));
    let by_category = CategoryFile {
        categories: categories
            .iter()
            .map(|(c, cols)| {
                Ok(CategoryReport {
                    category: c.clone(),
                    aggregate: aggregate_over(&matrices, &groups, cols)?,
                })
            })
            .collect::<Result<_>>()?,
    };
    write_atomic(&dir.join("aggregate_by_category.json"), &to_json_bytes(&by_category))?;
    log::info!(
        "evaluated {} functions on {} lists, written to {}",
        outcomes.functions.len(),
        outcomes.lists.len(),
        dir.display()
    );
    Ok(())
}
