use std::collections::BTreeMap;
use std::fs;

use altroute_core::study::{
    aggregate, categorize, rm_anova, rm_anova_matrix, CategoryBoundaries, CohortFilter,
    LengthCategory, QueryPoints, RatingRecord,
};
use altroute_core::{Error, GeoPoint};
use approx::assert_relative_eq;
use serde_json::Value;

fn record(id: usize, scores: [u8; 4], fastest: f64, resident: bool, city: &str) -> RatingRecord {
    RatingRecord {
        response_id: format!("r{id}"),
        query_id: format!("q{id}"),
        city: city.into(),
        query: QueryPoints {
            source: GeoPoint {
                lat: 52.5,
                lon: 13.4,
            },
            target: GeoPoint {
                lat: 52.6,
                lon: 13.5,
            },
        },
        fastest_time: fastest,
        resident,
        scores: ["dissimilarity", "external", "penalty", "plateaus"]
            .iter()
            .zip(scores)
            .map(|(a, s)| (a.to_string(), s))
            .collect(),
        labels: BTreeMap::new(),
        timestamp: 1_700_000_000 + id as u64,
    }
}

#[test]
fn anova_matches_reference_package() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/anova_5x4.json");
    let golden: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let table: Vec<Vec<f64>> = golden["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect()
        })
        .collect();
    let r = rm_anova_matrix(&table).unwrap();
    assert_eq!(r.df_between as u64, golden["df_between"].as_u64().unwrap());
    assert_eq!(r.df_error as u64, golden["df_error"].as_u64().unwrap());
    assert_relative_eq!(r.f, golden["f"].as_f64().unwrap(), max_relative = 1e-6);
    assert_relative_eq!(r.p, golden["p"].as_f64().unwrap(), max_relative = 1e-6);

    // same table through rating records
    let records: Vec<RatingRecord> = table
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let s = [row[0] as u8, row[1] as u8, row[2] as u8, row[3] as u8];
            record(i, s, 900.0, true, "berlin")
        })
        .collect();
    let via_records = rm_anova(&records).unwrap();
    assert_relative_eq!(via_records.f, r.f, max_relative = 1e-12);
}

#[test]
fn identical_scores_give_zero_f() {
    let records: Vec<RatingRecord> = (0..6)
        .map(|i| {
            let s = (i % 5 + 1) as u8;
            record(i, [s; 4], 700.0, false, "dhaka")
        })
        .collect();
    let r = rm_anova(&records).unwrap();
    assert_eq!((r.f, r.p, r.infinite_f), (0.0, 1.0, false));
}

#[test]
fn constant_gap_between_two_approaches_is_infinite() {
    let table = vec![vec![1.0, 3.0], vec![2.0, 4.0], vec![3.0, 5.0]];
    let r = rm_anova_matrix(&table).unwrap();
    assert!(r.infinite_f);
    assert_eq!(r.p, 0.0);
    assert_eq!(r.to_string(), "F(1,2)=inf, p=0");
}

#[test]
fn two_point_standard_deviation() {
    let records = vec![
        record(1, [1, 2, 3, 4], 300.0, true, "melbourne"),
        record(2, [5, 2, 3, 4], 300.0, true, "melbourne"),
    ];
    let row = aggregate(
        &records,
        &CohortFilter::default(),
        &CategoryBoundaries::default(),
    )
    .unwrap();
    let s = row.approaches["dissimilarity"];
    assert_eq!(s.mean, 3.0);
    // sample sd of {a, b} is |a - b| / sqrt(2)
    assert_relative_eq!(s.sd.unwrap(), 4.0 / 2f64.sqrt(), max_relative = 1e-15);
    assert_eq!(s.to_string(), "3.00 (2.83)");
    assert_eq!(row.approaches["penalty"].sd, Some(0.0));
    assert_eq!(row.count, 2);
}

#[test]
fn cohort_filters() {
    let records = vec![
        record(1, [1, 2, 3, 4], 300.0, true, "melbourne"),
        record(2, [5, 2, 3, 4], 1200.0, false, "melbourne"),
        record(3, [3, 3, 3, 3], 2000.0, true, "dhaka"),
    ];
    let b = CategoryBoundaries::default();
    let residents = CohortFilter {
        resident: Some(true),
        ..CohortFilter::default()
    };
    assert_eq!(aggregate(&records, &residents, &b).unwrap().count, 2);
    let long = CohortFilter {
        category: Some(LengthCategory::Long),
        ..CohortFilter::default()
    };
    let row = aggregate(&records, &long, &b).unwrap();
    assert_eq!(row.count, 1);
    assert_eq!(row.approaches["plateaus"].sd, None);
    let nowhere = CohortFilter {
        city: Some("oslo".into()),
        ..CohortFilter::default()
    };
    assert!(matches!(
        aggregate(&records, &nowhere, &b),
        Err(Error::EmptyCohort)
    ));
}

#[test]
fn right_closed_categories() {
    let b = CategoryBoundaries::default();
    assert_eq!(categorize(600.0, &b).unwrap(), LengthCategory::Small);
    assert_eq!(categorize(601.0, &b).unwrap(), LengthCategory::Medium);
    assert_eq!(categorize(1500.0, &b).unwrap(), LengthCategory::Medium);
    assert_eq!(categorize(1501.0, &b).unwrap(), LengthCategory::Long);
    assert_eq!(categorize(4800.0, &b).unwrap(), LengthCategory::Long);
    assert!(matches!(
        categorize(4801.0, &b),
        Err(Error::Uncategorized(_))
    ));
    let dhaka = CategoryBoundaries::new(10.0, 20.0, 80.0).unwrap();
    assert_eq!(categorize(1300.0, &dhaka).unwrap(), LengthCategory::Long);
}
