use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use sketchrec::builtin_library;
use sketchrec_cli::{load_library, recognize_document, router, to_json, RecognizeResponse, BODY_LIMIT};
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

async fn send(method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let app = router(builtin_library(), None);
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

#[tokio::test]
async fn rectangle_is_recognized() {
    let (status, body) = send("POST", "/recognize", fixture("rectangle.json")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["stroke_id"], 1);
    assert_eq!(r["domain"], "Flowchart");
    assert_eq!(r["shape"], "Rectangle");
    assert_eq!(r["beautified"]["closed"], true);
    assert_eq!(r["beautified"]["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(r["segments"]["merged"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn sample_stroke_reports_both_segmentations() {
    let (status, body) = send("POST", "/recognize", fixture("sample.json")).await;
    assert_eq!(status, StatusCode::OK);
    let resp: RecognizeResponse = serde_json::from_slice(&body).unwrap();
    let r = &resp.results[0];
    assert_eq!((r.domain.as_str(), r.shape.as_str()), ("Flowchart", "Rectangle"));
    assert_eq!(r.segments.raw.len(), 7);
    assert_eq!(r.segments.merged.len(), 4);
    let angles = &r.beautified.as_ref().unwrap().properties["angles"];
    assert!(angles.iter().all(|a| (a - 90.0).abs() < 1e-6));
}

#[tokio::test]
async fn scribble_is_undefined_without_output() {
    let (status, body) = send("POST", "/recognize", fixture("scribble.json")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["domain"], "Undefined");
    assert_eq!(r["shape"], "Undefined");
    assert!(r.get("beautified").is_none());
}

#[tokio::test]
async fn undefined_fields_agree() {
    for name in ["rectangle.json", "scribble.json", "two_shapes.json", "sample.json"] {
        let (_, body) = send("POST", "/recognize", fixture(name)).await;
        let resp: RecognizeResponse = serde_json::from_slice(&body).unwrap();
        for r in resp.results {
            let undefined = r.domain == "Undefined";
            assert_eq!(undefined, r.shape == "Undefined");
            assert_eq!(undefined, r.beautified.is_none());
        }
    }
}

#[tokio::test]
async fn empty_strokes_give_empty_results() {
    let (status, body) = send("POST", "/recognize", r#"{"strokes":[]}"#).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["results"], serde_json::json!([]));
}

#[tokio::test]
async fn malformed_bodies_are_rejected() {
    for body in [
        "not json",
        r#"{"strokes":[{"id":1,"points":[[1.5,2]]}]}"#,
        r#"{"strokes":[{"id":1,"points":[[1,2]]},{"id":1,"points":[[3,4]]}]}"#,
        r#"{"strokes":[{"id":1,"points":[]}]}"#,
    ] {
        let (status, resp) = send("POST", "/recognize", body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        let v: Value = serde_json::from_slice(&resp).unwrap();
        assert!(v["error"].as_str().is_some_and(|e| !e.is_empty()));
    }
    let (status, _) = send("POST", "/recognize", vec![0xffu8, 0xfe]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn oversized_body_is_413() {
    let mut body = String::from(r#"{"strokes":[{"id":1,"points":["#);
    while body.len() <= BODY_LIMIT {
        body.push_str("[1,2],");
    }
    body.push_str("[1,2]]}]}");
    let (status, _) = send("POST", "/recognize", body).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn domains_are_listed() {
    let (status, body) = send("GET", "/domains", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["domains"][0]["name"], "Flowchart");
    assert_eq!(v["domains"][0]["shapes"], serde_json::json!(["Rectangle", "Decision"]));
    assert_eq!(v["domains"][1]["name"], "Mathematics");
}

#[tokio::test]
async fn health_and_unknown_routes() {
    assert_eq!(send("GET", "/healthz", Body::empty()).await.0, StatusCode::OK);
    assert_eq!(send("GET", "/nope", Body::empty()).await.0, StatusCode::NOT_FOUND);
    assert_eq!(send("GET", "/recognize", Body::empty()).await.0, StatusCode::METHOD_NOT_ALLOWED);
}

#[tokio::test]
async fn body_matches_the_shared_serializer() {
    let text = fixture("two_shapes.json");
    let (_, body) = send("POST", "/recognize", text.clone()).await;
    let doc = sketchrec::parse_document(&text).unwrap();
    let expected = to_json(&recognize_document(&doc, &load_library(None).unwrap()));
    assert_eq!(String::from_utf8(body).unwrap(), expected);
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let app = router(builtin_library(), None);
    let text = fixture("two_shapes.json");
    let mut handles = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        let text = text.clone();
        handles.push(tokio::spawn(async move {
            let req = Request::post("/recognize").body(Body::from(text)).unwrap();
            let res = app.oneshot(req).await.unwrap();
            res.into_body().collect().await.unwrap().to_bytes()
        }));
    }
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn static_assets_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>ui</h1>").unwrap();
    let app = router(builtin_library(), Some(dir.path().to_path_buf()));
    let res = app
        .clone()
        .oneshot(Request::get("/index.html").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let res = app
        .oneshot(Request::get("/healthz").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
}

#[tokio::test]
async fn busy_port_is_an_error() {
    let taken = sketchrec_cli::bind("127.0.0.1:0").await.unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let err = sketchrec_cli::bind(&addr).await.unwrap_err();
    assert!(err.to_string().contains(&addr));
}
