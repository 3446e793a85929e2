//! Rating records from the blinded comparison, cohort aggregates and a
//! one-way repeated-measures ANOVA across approaches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPoints {
    pub source: GeoPoint,
    pub target: GeoPoint,
}

/// One participant response. `scores` is keyed by approach id (engine name),
/// never by the blinded label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub response_id: String,
    pub query_id: String,
    pub city: String,
    pub query: QueryPoints,
    /// Seconds.
    pub fastest_time: f64,
    pub resident: bool,
    pub scores: BTreeMap<String, u8>,
    /// Blinded label shown to the participant for each approach.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    /// Unix seconds.
    pub timestamp: u64,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.fastest_time > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fastest time must be positive, got {}",
                self.fastest_time
            )));
        }
        if self.scores.is_empty() {
            return Err(Error::InvalidInput(
                "a rating needs at least one score".into(),
            ));
        }
        if let Some((a, s)) = self
            .scores
            .iter()
            .find(|(_, s)| !(MIN_SCORE..=MAX_SCORE).contains(*s))
        {
            return Err(Error::InvalidInput(format!(
                "score {s} for {a} is outside {MIN_SCORE}..={MAX_SCORE}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthCategory {
    Small,
    Medium,
    Long,
}

impl LengthCategory {
    pub const ALL: [LengthCategory; 3] = [
        LengthCategory::Small,
        LengthCategory::Medium,
        LengthCategory::Long,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LengthCategory::Small => "small",
            LengthCategory::Medium => "medium",
            LengthCategory::Long => "long",
        }
    }
}

impl fmt::Display for LengthCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LengthCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LengthCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown length category {s:?}")))
    }
}

/// Right-closed upper bounds, in minutes, of the three categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryBoundaries {
    pub small: f64,
    pub medium: f64,
    pub long: f64,
}

impl Default for CategoryBoundaries {
    fn default() -> Self {
        Self {
            small: 10.0,
            medium: 25.0,
            long: 80.0,
        }
    }
}

impl CategoryBoundaries {
    pub fn new(small: f64, medium: f64, long: f64) -> Result<Self> {
        if !(0.0 < small && small < medium && medium < long) {
            return Err(Error::InvalidInput(format!(
                "category bounds must increase: {small}, {medium}, {long}"
            )));
        }
        Ok(Self {
            small,
            medium,
            long,
        })
    }

    pub fn upper_minutes(&self, c: LengthCategory) -> f64 {
        match c {
            LengthCategory::Small => self.small,
            LengthCategory::Medium => self.medium,
            LengthCategory::Long => self.long,
        }
    }

    pub fn lower_minutes(&self, c: LengthCategory) -> f64 {
        match c {
            LengthCategory::Small => 0.0,
            LengthCategory::Medium => self.small,
            LengthCategory::Long => self.medium,
        }
    }
}

/// Buckets a fastest travel time into `(0, small]`, `(small, medium]` or
/// `(medium, long]` minutes.
pub fn categorize(fastest_seconds: f64, bounds: &CategoryBoundaries) -> Result<LengthCategory> {
    // compare in seconds so that b * 60 lands exactly on its boundary
    let within = |minutes: f64| fastest_seconds <= minutes * 60.0;
    if !(fastest_seconds > 0.0) {
        return Err(Error::Uncategorized(fastest_seconds));
    }
    LengthCategory::ALL
        .into_iter()
        .find(|&c| within(bounds.upper_minutes(c)))
        .ok_or(Error::Uncategorized(fastest_seconds))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
    /// `Some(true)` residents only, `Some(false)` non-residents only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resident: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<LengthCategory>,
}

impl CohortFilter {
    pub fn matches(&self, r: &RatingRecord, bounds: &CategoryBoundaries) -> bool {
        self.city.as_ref().is_none_or(|c| *c == r.city)
            && self.resident.is_none_or(|x| x == r.resident)
            && self
                .category
                .is_none_or(|c| categorize(r.fastest_time, bounds).ok() == Some(c))
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        parts.push(self.city.clone().unwrap_or_else(|| "all cities".into()));
        parts.push(
            match self.resident {
                None => "all responses",
                Some(true) => "residents",
                Some(false) => "non-residents",
            }
            .into(),
        );
        if let Some(c) = self.category {
            parts.push(format!("{c} routes"));
        }
        parts.join(" / ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachStats {
    pub mean: f64,
    /// Sample (n-1) standard deviation; `None` when only one score exists.
    pub sd: Option<f64>,
    pub n: usize,
}

impl fmt::Display for ApproachStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sd {
            Some(sd) => write!(f, "{:.2} ({:.2})", self.mean, sd),
            None => write!(f, "{:.2} (n/a)", self.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub cohort: CohortFilter,
    pub approaches: BTreeMap<String, ApproachStats>,
    pub count: usize,
}

/// Mean and sample standard deviation of a slice. `None` for an empty slice.
pub fn mean_sd(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() > 1).then(|| {
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Some((mean, sd))
}

pub fn aggregate(
    records: &[RatingRecord],
    filter: &CohortFilter,
    bounds: &CategoryBoundaries,
) -> Result<AggregateRow> {
    let selected: Vec<&RatingRecord> = records
        .iter()
        .filter(|r| filter.matches(r, bounds))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let mut per_approach: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &selected {
        for (a, s) in &r.scores {
            per_approach
                .entry(a.clone())
                .or_default()
                .push(f64::from(*s));
        }
    }
    let approaches = per_approach
        .into_iter()
        .filter_map(|(a, xs)| {
            let (mean, sd) = mean_sd(&xs)?;
            Some((
                a,
                ApproachStats {
                    mean,
                    sd,
                    n: xs.len(),
                },
            ))
        })
        .collect();
    Ok(AggregateRow {
        cohort: filter.clone(),
        approaches,
        count: selected.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `f64::INFINITY` when the error term vanishes but conditions differ.
    pub f: f64,
    pub df_between: usize,
    pub df_error: usize,
    pub p: f64,
    pub infinite_f: bool,
}

impl fmt::Display for AnovaResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.infinite_f {
            write!(f, "F({},{})=inf, p=0", self.df_between, self.df_error)
        } else {
            write!(
                f,
                "F({},{})={:.3}, p={:.3}",
                self.df_between, self.df_error, self.f, self.p
            )
        }
    }
}

/// Upper tail `P(X > f)` of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d2 / (d2 + d1 * f);
    beta_reg(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0)
}

/// Repeated-measures ANOVA over a subjects x conditions table.
pub fn rm_anova_matrix(table: &[Vec<f64>]) -> Result<AnovaResult> {
    let subjects = table.len();
    if subjects < 2 {
        return Err(Error::InvalidInput(format!(
            "repeated-measures ANOVA needs at least 2 subjects, got {subjects}"
        )));
    }
    let conditions = table[0].len();
    if conditions < 2 {
        return Err(Error::InvalidInput(
            "repeated-measures ANOVA needs at least 2 conditions".into(),
        ));
    }
    if table.iter().any(|row| row.len() != conditions) {
        return Err(Error::InvalidInput(
            "every subject needs a score for every condition".into(),
        ));
    }
    let (n, k) = (subjects as f64, conditions as f64);
    let subject_means: Vec<f64> = table
        .iter()
        .map(|row| row.iter().sum::<f64>() / k)
        .collect();
    let condition_means: Vec<f64> = (0..conditions)
        .map(|j| table.iter().map(|row| row[j]).sum::<f64>() / n)
        .collect();
    let grand = condition_means.iter().sum::<f64>() / k;

    let ss_conditions: f64 = n * condition_means
        .iter()
        .map(|m| (m - grand).powi(2))
        .sum::<f64>();
    // residual form of SS_within_conditions - SS_subjects; never negative
    let ss_error: f64 = table
        .iter()
        .zip(&subject_means)
        .flat_map(|(row, sm)| {
            row.iter()
                .zip(&condition_means)
                .map(move |(x, cm)| (x - sm - cm + grand).powi(2))
        })
        .sum();
    let ss_total: f64 = table.iter().flatten().map(|x| (x - grand).powi(2)).sum();

    let df_between = conditions - 1;
    let df_error = df_between * (subjects - 1);
    let negligible = |ss: f64| ss <= 1e-12 * ss_total.max(f64::MIN_POSITIVE);
    let (f, p, infinite_f) = if negligible(ss_error) {
        if negligible(ss_conditions) {
            (0.0, 1.0, false)
        } else {
            (f64::INFINITY, 0.0, true)
        }
    } else {
        let f = (ss_conditions / df_between as f64) / (ss_error / df_error as f64);
        (
            f,
            f_upper_tail(f, df_between as f64, df_error as f64),
            false,
        )
    };
    Ok(AnovaResult {
        f,
        df_between,
        df_error,
        p,
        infinite_f,
    })
}

/// Repeated-measures ANOVA with every record as a subject and every
/// approach as a condition. All records must score the same approaches.
pub fn rm_anova(records: &[RatingRecord]) -> Result<AnovaResult> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidInput("no records".into()))?;
    let approaches: BTreeSet<&String> = first.scores.keys().collect();
    let mut table = Vec::with_capacity(records.len());
    for r in records {
        if r.scores.keys().collect::<BTreeSet<_>>() != approaches {
            return Err(Error::InvalidInput(format!(
                "response {} does not score the same approaches as the others",
                r.response_id
            )));
        }
        table.push(r.scores.values().map(|s| f64::from(*s)).collect());
    }
    rm_anova_matrix(&table)
}
