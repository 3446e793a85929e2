use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use altroute_core::{GeoPoint, Path as Route};
use altroute_service::approach::{
    Approach, QueryContext, ReplayEntry, ReplayFixtures, ReplayProvider,
};
use altroute_service::fixtures::{diamond_service, DiamondService, FIXTURE_NOW};
use altroute_service::http::router;
use altroute_service::service::OMITTED_NOTE;
use altroute_service::{LabelPolicy, RouteService, ServiceConfig};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn config() -> ServiceConfig {
    ServiceConfig {
        city: "melbourne".into(),
        ..ServiceConfig::default()
    }
}

fn setup(dir: &Path) -> DiamondService {
    diamond_service(&dir.join("ratings.jsonl"), &config()).unwrap()
}

async fn call(
    svc: &Arc<RouteService>,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(svc.clone(), None).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn point(p: GeoPoint) -> Value {
    json!({"lat": p.lat, "lon": p.lon})
}

fn diamond_query(d: &DiamondService, k: usize) -> Value {
    json!({"source": point(d.point(d.diamond.s)), "target": point(d.point(d.diamond.t)), "k": k})
}

const ENGINE_NAMES: [&str; 6] = [
    "penalty",
    "plateau",
    "dissimilar",
    "external",
    "replay",
    "google",
];

fn assert_blinded(body: &str) {
    let lower = body.to_lowercase();
    for name in ENGINE_NAMES {
        assert!(!lower.contains(name), "payload leaks {name:?}: {body}");
    }
}

#[tokio::test]
async fn routes_and_rating_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());

    let (status, body) = call(
        &d.service,
        "POST",
        "/api/routes",
        Some(diamond_query(&d, 2)),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let got: Value = serde_json::from_str(&body).unwrap();
    let golden: Value =
        serde_json::from_str(&fs::read_to_string(data("routes_diamond.json")).unwrap()).unwrap();
    assert_eq!(got, golden);
    assert_blinded(&body);

    d.clock.advance(60);
    let id = got["query_id"].as_str().unwrap();
    let rating = json!({"query_id": id, "scores": {"A": 4, "B": 5, "C": 2}, "resident": true});
    let (status, body) = call(&d.service, "POST", "/api/ratings", Some(rating)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let receipt: Value = serde_json::from_str(&body).unwrap();
    let golden: Value =
        serde_json::from_str(&fs::read_to_string(data("rating_receipt.json")).unwrap()).unwrap();
    assert_eq!(receipt, golden);
    assert_blinded(&body);

    let log = fs::read_to_string(dir.path().join("ratings.jsonl")).unwrap();
    assert_eq!(log, fs::read_to_string(data("ratings_log.jsonl")).unwrap());
}

#[tokio::test]
async fn single_engine_subset() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let mut q = diamond_query(&d, 3);
    q["engines"] = json!(["plateaus"]);
    let (status, body) = call(&d.service, "POST", "/api/routes", Some(q)).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let groups = v["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0]["label"], "A");
    assert_eq!(groups[0]["routes"][0]["minutes"], 4);

    let mut bad = diamond_query(&d, 3);
    bad["engines"] = json!(["teleport"]);
    assert_eq!(
        call(&d.service, "POST", "/api/routes", Some(bad)).await.0,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn request_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let (s, t) = (d.point(d.diamond.s), d.point(d.diamond.t));

    let far = json!({"source": {"lat": 10.0, "lon": 10.0}, "target": point(t)});
    let (status, body) = call(&d.service, "POST", "/api/routes", Some(far)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(
        serde_json::from_str::<Value>(&body).unwrap()["code"],
        "out_of_area"
    );

    let near_s = GeoPoint {
        lat: s.lat + 0.0001,
        lon: s.lon,
    };
    let same = json!({"source": point(s), "target": point(near_s)});
    let (status, body) = call(&d.service, "POST", "/api/routes", Some(same)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(
        serde_json::from_str::<Value>(&body).unwrap()["code"],
        "same_vertex"
    );

    // t has no outgoing edges
    let backwards = json!({"source": point(t), "target": point(s)});
    let (status, body) = call(&d.service, "POST", "/api/routes", Some(backwards)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        serde_json::from_str::<Value>(&body).unwrap()["code"],
        "no_route"
    );

    for k in [0, 6] {
        let q = diamond_query(&d, k);
        assert_eq!(
            call(&d.service, "POST", "/api/routes", Some(q)).await.0,
            StatusCode::BAD_REQUEST
        );
    }
    let malformed = json!({"source": "here"});
    assert!(call(&d.service, "POST", "/api/routes", Some(malformed))
        .await
        .0
        .is_client_error());

    let unknown = json!({"query_id": "nope", "scores": {"A": 3}, "resident": false});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(unknown))
            .await
            .0,
        StatusCode::NOT_FOUND
    );

    let (_, body) = call(
        &d.service,
        "POST",
        "/api/routes",
        Some(diamond_query(&d, 2)),
    )
    .await;
    let id = serde_json::from_str::<Value>(&body).unwrap()["query_id"]
        .as_str()
        .unwrap()
        .to_string();
    let partial = json!({"query_id": id, "scores": {"A": 3, "B": 3}, "resident": false});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(partial))
            .await
            .0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    let extra =
        json!({"query_id": id, "scores": {"A": 3, "B": 3, "C": 3, "D": 3}, "resident": false});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(extra))
            .await
            .0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    let out_of_range =
        json!({"query_id": id, "scores": {"A": 3, "B": 7, "C": 3}, "resident": false});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(out_of_range))
            .await
            .0,
        StatusCode::BAD_REQUEST
    );
    d.clock.advance(24 * 3600 + 1);
    let late = json!({"query_id": id, "scores": {"A": 3, "B": 3, "C": 3}, "resident": false});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(late)).await.0,
        StatusCode::GONE
    );
}

struct Broken;

impl Approach for Broken {
    fn id(&self) -> &str {
        "broken"
    }

    fn routes(&self, _: &QueryContext<'_>) -> Result<Vec<Route>, String> {
        panic!("engine blew up")
    }
}

#[tokio::test]
async fn failing_engine_is_omitted_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let svc = Arc::try_unwrap(d.service)
        .ok()
        .unwrap()
        .with_approach(Box::new(Broken));
    let svc = Arc::new(svc);
    let q = json!({"source": point(d.diamond.net.point(d.diamond.s)), "target": point(d.diamond.net.point(d.diamond.t))});
    let (status, body) = call(&svc, "POST", "/api/routes", Some(q)).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["groups"].as_array().unwrap().len(), 3);
    assert_eq!(v["notes"], json!([OMITTED_NOTE]));
    assert!(!body.contains("broken"));
    assert_blinded(&body);
}

#[tokio::test]
async fn replay_provider_takes_label_a() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let net = &d.diamond.net;
    let (s, b, t) = (
        net.point(d.diamond.s),
        net.point(d.diamond.b),
        net.point(d.diamond.t),
    );
    let provider = ReplayProvider::new(ReplayFixtures {
        cell_size: 0.0037,
        entries: vec![ReplayEntry {
            source: s,
            target: t,
            routes: vec![vec![s, b, t]],
        }],
    })
    .unwrap();
    let svc = Arc::new(
        Arc::try_unwrap(d.service)
            .ok()
            .unwrap()
            .with_provider(Box::new(provider)),
    );
    let q = json!({"source": point(s), "target": point(t), "k": 2});
    let (status, body) = call(&svc, "POST", "/api/routes", Some(q)).await;
    assert_eq!(status, StatusCode::OK);
    assert_blinded(&body);
    let v: Value = serde_json::from_str(&body).unwrap();
    let labels: Vec<&str> = v["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["A", "B", "C", "D"]);
    // the provider's s -> b -> t takes 5 minutes on the network
    assert_eq!(v["groups"][0]["routes"].as_array().unwrap().len(), 1);
    assert_eq!(v["groups"][0]["routes"][0]["minutes"], 5);
    let stored = svc.stored_query(v["query_id"].as_str().unwrap()).unwrap();
    assert_eq!(stored.labels["A"], "external");
    assert_eq!(stored.labels["B"], "plateaus");
    assert_eq!(stored.labels["D"], "penalty");
}

#[tokio::test]
async fn shuffled_labels_round_trip_through_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let svc = Arc::new(
        Arc::try_unwrap(d.service)
            .ok()
            .unwrap()
            .with_label_policy(LabelPolicy::PerQueryShuffle { seed: 99 }),
    );
    let q = json!({"source": point(d.diamond.net.point(d.diamond.s)), "target": point(d.diamond.net.point(d.diamond.t))});
    let mut seen = std::collections::BTreeSet::new();
    for round in 0..12 {
        let (_, body) = call(&svc, "POST", "/api/routes", Some(q.clone())).await;
        assert_blinded(&body);
        let v: Value = serde_json::from_str(&body).unwrap();
        let id = v["query_id"].as_str().unwrap();
        let shown = svc.stored_query(id).unwrap().labels;
        seen.insert(shown.clone());
        // score each label by its letter so the mapping is recoverable
        let scores: serde_json::Map<String, Value> = shown
            .keys()
            .enumerate()
            .map(|(i, l)| (l.clone(), json!(i + 1)))
            .collect();
        let rating = json!({"query_id": id, "scores": scores, "resident": round % 2 == 0});
        assert_eq!(
            call(&svc, "POST", "/api/ratings", Some(rating)).await.0,
            StatusCode::OK
        );
        let record = svc
            .ratings()
            .into_iter()
            .find(|r| r.query_id == id)
            .unwrap();
        for (label, approach) in &shown {
            assert_eq!(&record.labels[approach], label);
            let expected = shown.keys().position(|l| l == label).unwrap() as u8 + 1;
            assert_eq!(record.scores[approach], expected);
        }
    }
    assert!(seen.len() > 1, "shuffle never changed the mapping");
}

#[tokio::test]
async fn ratings_survive_restart_and_resubmission_overwrites() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let d = setup(dir.path());
        let (_, body) = call(
            &d.service,
            "POST",
            "/api/routes",
            Some(diamond_query(&d, 2)),
        )
        .await;
        let id = serde_json::from_str::<Value>(&body).unwrap()["query_id"]
            .as_str()
            .unwrap()
            .to_string();
        let first = json!({"query_id": id, "scores": {"A": 1, "B": 1, "C": 1}, "resident": false});
        assert_eq!(
            call(&d.service, "POST", "/api/ratings", Some(first))
                .await
                .0,
            StatusCode::OK
        );
        id
    };
    let d = setup(dir.path());
    assert_eq!(d.service.ratings().len(), 1);
    let again = json!({"query_id": id, "scores": {"A": 5, "B": 4, "C": 3}, "resident": true});
    assert_eq!(
        call(&d.service, "POST", "/api/ratings", Some(again))
            .await
            .0,
        StatusCode::OK
    );
    drop(d);

    let d = setup(dir.path());
    let ratings = d.service.ratings();
    assert_eq!(ratings.len(), 1);
    assert_eq!(ratings[0].scores["plateaus"], 5);
    assert!(ratings[0].resident);

    let (status, body) = call(&d.service, "GET", "/api/stats?residents=true", None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let row: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(row["count"], 1);
    assert_eq!(row["approaches"]["dissimilarity"]["mean"], 4.0);
    let (status, _) = call(&d.service, "GET", "/api/stats?residents=false", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(
        &d.service,
        "GET",
        "/api/stats?city=melbourne&category=small",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
}

#[tokio::test]
async fn health_and_compaction() {
    let dir = tempfile::tempdir().unwrap();
    let d = setup(dir.path());
    let (status, body) = call(&d.service, "GET", "/healthz", None).await;
    assert_eq!((status, body.as_str()), (StatusCode::OK, "ok"));

    let (_, body) = call(
        &d.service,
        "POST",
        "/api/routes",
        Some(diamond_query(&d, 1)),
    )
    .await;
    let id = serde_json::from_str::<Value>(&body).unwrap()["query_id"]
        .as_str()
        .unwrap()
        .to_string();
    d.clock.set(FIXTURE_NOW + 2 * 24 * 3600);
    d.service.compact().unwrap();
    assert!(d.service.stored_query(&id).is_none());
}
