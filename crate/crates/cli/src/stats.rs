//! Per-approach rating summaries from a service rating log.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use altroute_core::study::{
    aggregate, rm_anova, AggregateRow, AnovaResult, CategoryBoundaries, CohortFilter,
    LengthCategory, RatingRecord,
};
use altroute_service::RatingStore;
use clap::Args;
use serde::Serialize;

use crate::{parse_boundaries, CliError, CliResult};

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Rating log written by `altroute serve`.
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub city: Option<String>,
    #[arg(long)]
    pub residents_only: bool,
    /// `small`, `medium` or `long`.
    #[arg(long)]
    pub category: Option<LengthCategory>,
    /// Also test whether the approaches differ (repeated-measures ANOVA).
    #[arg(long)]
    pub anova: bool,
    #[arg(long, value_parser = parse_boundaries)]
    pub categories: Option<CategoryBoundaries>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub aggregate: AggregateRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<AnovaResult>,
}

pub fn compute(
    records: &[RatingRecord],
    filter: &CohortFilter,
    bounds: &CategoryBoundaries,
    anova: bool,
) -> CliResult<StatsReport> {
    let aggregate =
        aggregate(records, filter, bounds).map_err(|e| CliError::Data(e.to_string()))?;
    let anova = if anova {
        let selected: Vec<RatingRecord> = records
            .iter()
            .filter(|r| filter.matches(r, bounds))
            .cloned()
            .collect();
        Some(rm_anova(&selected).map_err(|e| CliError::Data(e.to_string()))?)
    } else {
        None
    };
    Ok(StatsReport { aggregate, anova })
}

pub fn render(report: &StatsReport) -> String {
    let row = &report.aggregate;
    let mut out = String::new();
    let _ = writeln!(out, "{} ({} responses)", row.cohort.describe(), row.count);
    for (approach, stats) in &row.approaches {
        let _ = writeln!(out, "{approach:<14} {stats}");
    }
    if let Some(a) = &report.anova {
        let _ = writeln!(out, "{a}");
    }
    out
}

pub fn run(args: &StatsArgs) -> CliResult {
    if !args.db.is_file() {
        return Err(CliError::Data(format!(
            "{}: no such rating log",
            args.db.display()
        )));
    }
    let store = RatingStore::open(&args.db).map_err(|e| CliError::Data(e.to_string()))?;
    let filter = CohortFilter {
        city: args.city.clone(),
        resident: args.residents_only.then_some(true),
        category: args.category,
    };
    let report = compute(
        &store.ratings(),
        &filter,
        &args.categories.unwrap_or_default(),
        args.anova,
    )?;
    print!("{}", render(&report));
    if let Some(path) = &args.json {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    Ok(())
}
