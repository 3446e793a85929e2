use std::collections::{BTreeMap, HashMap, HashSet};

use altroute_core::metrics::{jaccard, jaccard_with, set_similarity, OverlapMode};
use altroute_core::netfile::{read_network, write_network};
use altroute_core::network::NetworkBuilder;
use altroute_core::study::{
    aggregate, categorize, f_upper_tail, rm_anova_matrix, CategoryBoundaries, CohortFilter,
    LengthCategory, QueryPoints, RatingRecord,
};
use altroute_core::{build_tree, GeoPoint, Orientation, Path, RoadNetwork};
use proptest::prelude::*;

/// Complete digraph on `n` vertices with the given edge lengths (meters).
fn complete(n: usize, lengths: &[f64]) -> RoadNetwork {
    let mut b = NetworkBuilder::new();
    for i in 0..n {
        b.add_vertex(GeoPoint {
            lat: 0.01 * i as f64,
            lon: 0.0,
        });
    }
    let mut k = 0;
    for u in 0..n {
        for v in 0..n {
            if u != v {
                b.add_timed_edge(u, v, lengths[k] / 10.0, lengths[k])
                    .unwrap();
                k += 1;
            }
        }
    }
    b.build_tight().unwrap()
}

const N: usize = 6;

fn walk(net: &RoadNetwork, start: usize, steps: &[usize]) -> Path {
    let mut u = start;
    let mut ids = Vec::new();
    for s in steps {
        let out = net.out_edge_ids(u);
        let e = out[s % out.len()];
        ids.push(e);
        u = net.edge(e).to;
    }
    Path::from_edge_ids(net, start, &ids).unwrap()
}

fn brute_jaccard(x: &Path, y: &Path) -> f64 {
    let len: HashMap<usize, f64> = x
        .edges
        .iter()
        .chain(&y.edges)
        .map(|e| (e.id, e.length))
        .collect();
    let a: HashSet<usize> = x.edges.iter().map(|e| e.id).collect();
    let b: HashSet<usize> = y.edges.iter().map(|e| e.id).collect();
    let inter: f64 = a.intersection(&b).map(|e| len[e]).sum();
    let union: f64 = a.union(&b).map(|e| len[e]).sum();
    if union == 0.0 {
        1.0
    } else {
        inter / union
    }
}

fn path_pair() -> impl Strategy<Value = (Vec<f64>, usize, Vec<usize>, usize, Vec<usize>)> {
    (
        prop::collection::vec(50.0..2000.0f64, N * (N - 1)),
        0..N,
        prop::collection::vec(0..N, 1..8),
        0..N,
        prop::collection::vec(0..N, 1..8),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn jaccard_is_symmetric_bounded_and_matches_sets((lengths, sx, wx, sy, wy) in path_pair()) {
        let net = complete(N, &lengths);
        let x = walk(&net, sx, &wx);
        let y = walk(&net, sy, &wy);
        let j = jaccard(&x, &y);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&y, &x));
        prop_assert!((j - brute_jaccard(&x, &y)).abs() <= 1e-12);
        prop_assert_eq!(jaccard(&x, &x), 1.0);
        let u = jaccard_with(&x, &y, OverlapMode::Undirected);
        prop_assert!((0.0..=1.0).contains(&u));
        prop_assert_eq!(u, jaccard_with(&y, &x, OverlapMode::Undirected));
    }
}

proptest! {
    #[test]
    fn set_similarity_ignores_order(
        lengths in prop::collection::vec(50.0..2000.0f64, N * (N - 1)),
        walks in prop::collection::vec((0..N, prop::collection::vec(0..N, 1..6)), 2..5),
        rotate in 0usize..5,
    ) {
        let net = complete(N, &lengths);
        let routes: Vec<Path> = walks.iter().map(|(s, w)| walk(&net, *s, w)).collect();
        let mut shuffled = routes.clone();
        shuffled.reverse();
        let r = rotate % shuffled.len();
        shuffled.rotate_left(r);
        let a = set_similarity(&routes).unwrap();
        let b = set_similarity(&shuffled).unwrap();
        prop_assert_eq!(a.sim, b.sim);
        let max = routes
            .iter()
            .enumerate()
            .flat_map(|(i, x)| routes[i + 1..].iter().map(move |y| jaccard(x, y)))
            .fold(0.0, f64::max);
        prop_assert_eq!(a.sim, max);
    }

    #[test]
    fn trees_agree_with_bellman_ford(
        n in 2usize..12,
        raw in prop::collection::vec((0usize..12, 0usize..12, 1.0..100.0f64), 0..40),
        root in 0usize..12,
    ) {
        let mut b = NetworkBuilder::new();
        for i in 0..n {
            b.add_vertex(GeoPoint { lat: 0.0, lon: 0.001 * i as f64 });
        }
        let mut edges = Vec::new();
        for (u, v, w) in raw {
            let (u, v) = (u % n, v % n);
            if u != v {
                b.add_timed_edge(u, v, w, 10.0 * w).unwrap();
                edges.push((u, v));
            }
        }
        let net = b.build_tight().unwrap();
        let root = root % n;
        let mut dist = vec![f64::INFINITY; n];
        dist[root] = 0.0;
        for _ in 0..n {
            for e in net.edges() {
                if dist[e.from] + e.travel_time < dist[e.to] {
                    dist[e.to] = dist[e.from] + e.travel_time;
                }
            }
        }
        let tree = build_tree(&net, root, Orientation::Forward).unwrap();
        for (v, &want) in dist.iter().enumerate() {
            match tree.dist(v) {
                Some(d) => {
                    prop_assert!((d - want).abs() <= 1e-9 * want.max(1.0));
                    let p = tree.path(v).unwrap();
                    prop_assert!((p.travel_time - d).abs() <= 1e-9 * d.max(1.0));
                    prop_assert!(p.is_simple());
                }
                None => prop_assert!(want.is_infinite()),
            }
        }
    }

    #[test]
    fn anova_ignores_subject_offsets(
        table in (2usize..8, 2usize..5).prop_flat_map(|(s, c)| {
            prop::collection::vec(prop::collection::vec(1u8..=5, c), s)
        }),
        offsets in prop::collection::vec(-10.0..10.0f64, 8),
    ) {
        let base: Vec<Vec<f64>> = table.iter().map(|r| r.iter().map(|&x| f64::from(x)).collect()).collect();
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .zip(&offsets)
            .map(|(r, c)| r.iter().map(|x| x + c).collect())
            .collect();
        let a = rm_anova_matrix(&base).unwrap();
        let b = rm_anova_matrix(&shifted).unwrap();
        prop_assert_eq!(a.infinite_f, b.infinite_f);
        if !a.infinite_f {
            prop_assert!((a.f - b.f).abs() <= 1e-9 * a.f.max(1.0));
            prop_assert!((a.p - b.p).abs() <= 1e-9 * a.p.max(1e-12));
        }
        prop_assert!((0.0..=1.0).contains(&a.p));
        prop_assert!(a.f >= 0.0);
    }

    #[test]
    fn p_falls_as_f_grows(f1 in 0.0..50.0f64, df in 0.0..50.0f64, d1 in 1u32..10, d2 in 1u32..500) {
        let (d1, d2) = (f64::from(d1), f64::from(d2));
        let lo = f_upper_tail(f1, d1, d2);
        let hi = f_upper_tail(f1 + df, d1, d2);
        prop_assert!(hi <= lo);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn aggregate_is_order_free_and_additive(
        rows in prop::collection::vec((prop::collection::vec(1u8..=5, 3), any::<bool>(), 1.0..4800.0f64), 1..30),
        rotate in 0usize..30,
    ) {
        let records: Vec<RatingRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (s, resident, t))| RatingRecord {
                response_id: i.to_string(),
                query_id: i.to_string(),
                city: "x".into(),
                query: QueryPoints {
                    source: GeoPoint { lat: 0.0, lon: 0.0 },
                    target: GeoPoint { lat: 1.0, lon: 1.0 },
                },
                fastest_time: *t,
                resident: *resident,
                scores: ["a", "b", "c"].iter().map(|k| k.to_string()).zip(s.iter().copied()).collect(),
                labels: BTreeMap::new(),
                timestamp: 0,
            })
            .collect();
        let bounds = CategoryBoundaries::default();
        let all = aggregate(&records, &CohortFilter::default(), &bounds).unwrap();
        let mut rotated = records.clone();
        let r = rotate % rotated.len();
        rotated.rotate_left(r);
        let again = aggregate(&rotated, &CohortFilter::default(), &bounds).unwrap();
        prop_assert_eq!(all.count, again.count);
        for (k, s) in &all.approaches {
            prop_assert!((s.mean - again.approaches[k].mean).abs() <= 1e-12);
            prop_assert!((1.0..=5.0).contains(&s.mean));
        }
        let count = |resident| {
            let f = CohortFilter { resident: Some(resident), ..CohortFilter::default() };
            aggregate(&records, &f, &bounds).map(|r| r.count).unwrap_or(0)
        };
        prop_assert_eq!(count(true) + count(false), all.count);
        let per_category: usize = LengthCategory::ALL
            .iter()
            .map(|&c| {
                let f = CohortFilter { category: Some(c), ..CohortFilter::default() };
                aggregate(&records, &f, &bounds).map(|r| r.count).unwrap_or(0)
            })
            .sum();
        prop_assert_eq!(per_category, all.count);
    }

    #[test]
    fn boundaries_belong_to_the_lower_interval(small in 1u32..30, medium in 1u32..60, long in 1u32..120) {
        let (s, m, l) = (f64::from(small), f64::from(small + medium), f64::from(small + medium + long));
        let b = CategoryBoundaries::new(s, m, l).unwrap();
        for c in LengthCategory::ALL {
            let upper = b.upper_minutes(c);
            prop_assert_eq!(categorize(upper * 60.0, &b).unwrap(), c);
        }
        prop_assert_eq!(categorize(s * 60.0 + 1.0, &b).unwrap(), LengthCategory::Medium);
        prop_assert_eq!(categorize(m * 60.0 + 1.0, &b).unwrap(), LengthCategory::Long);
        prop_assert!(categorize(l * 60.0 + 1.0, &b).is_err());
    }

    #[test]
    fn binary_file_round_trips(
        n in 1usize..20,
        raw in prop::collection::vec((0usize..20, 0usize..20, 1.0..500.0f64, 5.0..130.0f64, any::<bool>()), 0..60),
    ) {
        let mut b = NetworkBuilder::new();
        for i in 0..n {
            b.add_vertex_with_osm_id(GeoPoint { lat: 0.001 * i as f64, lon: -0.002 * i as f64 }, 9_000 + i as i64);
        }
        for (u, v, len, speed, motorway) in raw {
            let class = if motorway { altroute_core::RoadClass::Motorway } else { altroute_core::RoadClass::Other };
            b.add_edge(u % n, v % n, len, speed, class).unwrap();
        }
        let net = b.build_tight().unwrap();
        let mut buf = Vec::new();
        write_network(&net, &mut buf).unwrap();
        prop_assert_eq!(read_network(buf.as_slice()).unwrap(), net);
    }
}
