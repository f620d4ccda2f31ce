//! CSV / JSON renderings of evaluation results.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::similarity::EvalReport;
use super::stats::aggregate_seeds;
use crate::compose::PhraseType;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v}"))
}

/// `benchmark,strategy,seed,rho,coverage`, one row per seed.
pub fn reports_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("benchmark,strategy,seed,rho,coverage\n");
    for r in reports {
        for s in &r.per_seed {
            let _ = writeln!(
                out,
                "{},{},{},{},{}/{}",
                csv_field(&r.label()),
                csv_field(&r.strategy),
                s.seed,
                opt(s.rho),
                s.covered,
                s.total
            );
        }
    }
    out
}

/// `benchmark,model,strategy,seed,item,gold,pred`, the per-item predictions
/// that significance tests consume.
pub fn predictions_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("benchmark,model,strategy,seed,item,gold,pred\n");
    for r in reports {
        for s in &r.per_seed {
            for p in &s.predictions {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    csv_field(&r.label()),
                    csv_field(&r.model),
                    csv_field(&r.strategy),
                    s.seed,
                    p.item,
                    p.gold,
                    p.pred
                );
            }
        }
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    benchmark: String,
    model: &'a str,
    strategy: &'a str,
    phrase_type: Option<PhraseType>,
    seeds: Vec<u64>,
    rhos: Vec<Option<f64>>,
    mean: Option<f64>,
    se: Option<f64>,
    covered: usize,
    total: usize,
    dropped: &'a [String],
    zero_norm: Vec<usize>,
    notes: &'a [String],
}

pub fn summary_json(reports: &[EvalReport]) -> String {
    let rows: Vec<Summary<'_>> = reports
        .iter()
        .map(|r| Summary {
            benchmark: r.label(),
            model: &r.model,
            strategy: &r.strategy,
            phrase_type: r.phrase_type,
            seeds: r.per_seed.iter().map(|s| s.seed).collect(),
            rhos: r.per_seed.iter().map(|s| s.rho).collect(),
            mean: r.mean,
            se: r.se,
            covered: r.covered,
            total: r.total,
            dropped: &r.dropped,
            zero_norm: r.per_seed.iter().map(|s| s.zero_norm).collect(),
            notes: &r.notes,
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("summary is serialisable")
}

fn cell(mean: Option<f64>, se: Option<f64>) -> String {
    match (mean, se) {
        (Some(m), Some(s)) => format!("{m:.2}±{s:.2}"),
        (Some(m), None) => format!("{m:.2}"),
        _ => "NA".to_string(),
    }
}

/// Phrase-similarity table: one row per (model, strategy), columns AN, NN, VO
/// and their average, each cell `mean±SE` over seeds. The average is taken
/// per seed over the three phrase types before aggregating.
pub fn composition_table(reports: &[EvalReport]) -> String {
    let mut rows: BTreeMap<(usize, String, usize, String), BTreeMap<PhraseType, &EvalReport>> = BTreeMap::new();
    let strategy_rank = |s: &str| {
        ["add", "syn-rh", "syn-rt", "syn-bid"]
            .iter()
            .position(|x| *x == s)
            .unwrap_or(9)
    };
    let model_rank = |m: &str| {
        ["DM", "MuRE", "RotE", "RefE", "AttE"]
            .iter()
            .position(|x| *x == m)
            .unwrap_or(9)
    };
    for r in reports {
        if let Some(pt) = r.phrase_type {
            rows.entry((
                model_rank(&r.model),
                r.model.clone(),
                strategy_rank(&r.strategy),
                r.strategy.clone(),
            ))
            .or_default()
            .insert(pt, r);
        }
    }
    let mut out = String::from("| model | strategy | AN | NN | VO | Avg |\n|---|---|---|---|---|---|\n");
    for ((_, model, _, strategy), by_type) in &rows {
        let mut cells = Vec::new();
        for pt in PhraseType::ALL {
            cells.push(by_type.get(&pt).map_or_else(|| "NA".into(), |r| cell(r.mean, r.se)));
        }
        let mut seeds: Vec<u64> = by_type
            .values()
            .flat_map(|r| r.per_seed.iter().map(|s| s.seed))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        let per_seed_avg: Vec<f64> = seeds
            .iter()
            .filter_map(|&seed| {
                let vals: Option<Vec<f64>> = PhraseType::ALL
                    .iter()
                    .map(|pt| by_type.get(pt)?.per_seed.iter().find(|s| s.seed == seed)?.rho)
                    .collect();
                vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        let avg = aggregate_seeds(&per_seed_avg);
        cells.push(cell(avg.map(|a| a.mean), avg.and_then(|a| a.se)));
        let _ = writeln!(out, "| {model} | {strategy} | {} |", cells.join(" | "));
    }
    out
}

/// `label,group,x,y` rows for 2-d PCA coordinates.
pub fn pca_csv(rows: &[(String, String, f64, f64)]) -> String {
    let mut out = String::from("label,group,x,y\n");
    for (label, group, x, y) in rows {
        let _ = writeln!(out, "{},{},{x},{y}", csv_field(label), csv_field(group));
    }
    out
}
