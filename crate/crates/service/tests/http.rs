use cascadetrack_service::api::{ErrorBody, FrameRequest, NetworkShapes, SessionCreated, SessionInfo};
use cascadetrack_service::spawn;
use reqwest::StatusCode;
use serde_json::{json, Value};

async fn server() -> (cascadetrack_service::RunningServer, reqwest::Client) {
    (spawn("127.0.0.1:0").await.unwrap(), reqwest::Client::new())
}

fn detection(x: f64, axis: usize) -> Value {
    let mut d = vec![0.0; 4];
    d[axis] = 1.0;
    json!({
        "bbox": {"top_left_x": x, "top_left_y": 10.0, "width": 40.0, "height": 100.0},
        "confidence": 0.9,
        "descriptor": d,
    })
}

async fn create(client: &reqwest::Client, base: &str, config: Value) -> SessionCreated {
    let resp = client.post(format!("{base}/v1/sessions")).json(&config).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    resp.json().await.unwrap()
}

#[tokio::test]
async fn health_reports_ok() {
    let (srv, client) = server().await;
    let body: Value = client.get(format!("{}/health", srv.base_url())).send().await.unwrap().json().await.unwrap();
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn session_lifecycle() {
    let (srv, client) = server().await;
    let base = srv.base_url();
    let created = create(&client, &base, json!({"feature_dim": 4})).await;
    assert_eq!(created.config.feature_dim, 4);
    assert_eq!(created.config.max_age, 30);
    let id = created.session_id;

    let mut outputs = Vec::new();
    for f in 1..=3u32 {
        let req = json!({"frame_index": f, "detections": [detection(10.0 + f as f64, 0), detection(300.0, 1)]});
        let resp = client.post(format!("{base}/v1/sessions/{id}/frames")).json(&req).send().await.unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        outputs.push(resp.json::<Value>().await.unwrap());
    }
    assert_eq!(outputs[0]["tracks"].as_array().unwrap().len(), 0);
    let ids: Vec<u64> = outputs[2]["tracks"].as_array().unwrap().iter().map(|t| t["track_id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![1, 2]);

    let info: SessionInfo = client.get(format!("{base}/v1/sessions/{id}")).send().await.unwrap().json().await.unwrap();
    assert_eq!(info.frames_processed, 3);
    assert_eq!(info.last_frame, Some(3));
    assert_eq!((info.live_tracks, info.confirmed_tracks, info.next_track_id), (2, 2, 3));

    let del = client.delete(format!("{base}/v1/sessions/{id}")).send().await.unwrap();
    assert_eq!(del.status(), StatusCode::NO_CONTENT);
    let gone = client.get(format!("{base}/v1/sessions/{id}")).send().await.unwrap();
    assert_eq!(gone.status(), StatusCode::NOT_FOUND);
    let body: ErrorBody = gone.json().await.unwrap();
    assert_eq!(body.error, "not_found");
}

#[tokio::test]
async fn empty_body_uses_defaults() {
    let (srv, client) = server().await;
    let resp = client.post(format!("{}/v1/sessions", srv.base_url())).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    let created: SessionCreated = resp.json().await.unwrap();
    assert_eq!(created.config, cascadetrack_core::TrackerConfig::default());
}

#[tokio::test]
async fn unknown_config_key_is_named() {
    let (srv, client) = server().await;
    let resp = client
        .post(format!("{}/v1/sessions", srv.base_url()))
        .body(r#"{"lamda": 0.5}"#)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let body: ErrorBody = resp.json().await.unwrap();
    assert_eq!(body.error, "validation");
    assert!(body.message.contains("lamda"), "{}", body.message);
}

#[tokio::test]
async fn frame_errors_leave_session_usable() {
    let (srv, client) = server().await;
    let base = srv.base_url();
    let id = create(&client, &base, json!({"feature_dim": 4})).await.session_id;
    let url = format!("{base}/v1/sessions/{id}/frames");

    let ok = FrameRequest {
        frame_index: 2,
        detections: vec![],
    };
    assert_eq!(client.post(&url).json(&ok).send().await.unwrap().status(), StatusCode::OK);

    // frame order
    let stale = client.post(&url).json(&json!({"frame_index": 2})).send().await.unwrap();
    assert_eq!(stale.status(), StatusCode::UNPROCESSABLE_ENTITY);
    // zero descriptor
    let zero = json!({"frame_index": 3, "detections": [{
        "bbox": {"top_left_x": 0.0, "top_left_y": 0.0, "width": 1.0, "height": 1.0},
        "confidence": 1.0, "descriptor": [0.0, 0.0, 0.0, 0.0]}]});
    assert_eq!(client.post(&url).json(&zero).send().await.unwrap().status(), StatusCode::UNPROCESSABLE_ENTITY);
    // wrong dimension
    let wrong = json!({"frame_index": 3, "detections": [{
        "bbox": {"top_left_x": 0.0, "top_left_y": 0.0, "width": 1.0, "height": 1.0},
        "confidence": 1.0, "descriptor": [1.0, 0.0]}]});
    assert_eq!(client.post(&url).json(&wrong).send().await.unwrap().status(), StatusCode::UNPROCESSABLE_ENTITY);
    // not JSON
    assert_eq!(client.post(&url).body("{").send().await.unwrap().status(), StatusCode::BAD_REQUEST);

    let resp = client.post(&url).json(&json!({"frame_index": 3, "detections": [detection(0.0, 0)]})).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let info: SessionInfo = client.get(format!("{base}/v1/sessions/{id}")).send().await.unwrap().json().await.unwrap();
    assert_eq!(info.frames_processed, 2);
    assert_eq!(info.live_tracks, 1);
}

#[tokio::test]
async fn sessions_are_independent() {
    let (srv, client) = server().await;
    let base = srv.base_url();
    let a = create(&client, &base, json!({"feature_dim": 4})).await.session_id;
    let b = create(&client, &base, json!({"feature_dim": 4})).await.session_id;
    let run = |id: uuid::Uuid| {
        let client = client.clone();
        let base = base.clone();
        async move {
            let mut last = Value::Null;
            for f in 1..=5u32 {
                last = client
                    .post(format!("{base}/v1/sessions/{id}/frames"))
                    .json(&json!({"frame_index": f, "detections": [detection(5.0 * f as f64, 2)]}))
                    .send()
                    .await
                    .unwrap()
                    .json()
                    .await
                    .unwrap();
            }
            last
        }
    };
    let (ra, rb) = tokio::join!(run(a), run(b));
    assert_eq!(ra, rb);
    assert_eq!(ra["tracks"][0]["track_id"], 1);
}

#[tokio::test]
async fn evaluate_identity_and_errors() {
    let (srv, client) = server().await;
    let base = srv.base_url();
    let bbox = json!({"top_left_x": 0.0, "top_left_y": 0.0, "width": 10.0, "height": 20.0});
    let gt = json!([{"frame": 1, "gt_id": 4, "bbox": bbox, "valid": true}]);
    let results = json!([{"frame_index": 1, "tracks": [{"track_id": 9, "bbox": bbox}]}]);
    let report: Value = client
        .post(format!("{base}/v1/evaluate"))
        .json(&json!({"ground_truth": gt, "results": results}))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(report["mota"], 1.0);
    assert_eq!(report["motp"], 1.0);

    let dup = json!([{"frame": 1, "gt_id": 4, "bbox": bbox, "valid": true}, {"frame": 1, "gt_id": 4, "bbox": bbox, "valid": true}]);
    let resp = client
        .post(format!("{base}/v1/evaluate"))
        .json(&json!({"ground_truth": dup, "results": []}))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);

    let empty = client
        .post(format!("{base}/v1/evaluate"))
        .json(&json!({"ground_truth": [], "results": []}))
        .send()
        .await
        .unwrap();
    assert_eq!(empty.status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn gate_check_is_seeded() {
    let (srv, client) = server().await;
    let url = format!("{}/v1/diagnostics/gate-check", srv.base_url());
    let a: Value = client.post(&url).json(&json!({"seed": 5})).send().await.unwrap().json().await.unwrap();
    let b: Value = client.post(&url).json(&json!({"seed": 5, "samples": 10000})).send().await.unwrap().json().await.unwrap();
    assert_eq!(a, b);
    assert_eq!(a["passed"], true);
    let zero = client.post(&url).json(&json!({"samples": 0})).send().await.unwrap();
    assert_eq!(zero.status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn render_and_network_shapes() {
    let (srv, client) = server().await;
    let base = srv.base_url();
    let bbox = json!({"top_left_x": 1.0, "top_left_y": 2.0, "width": 10.0, "height": 20.0});
    let req = json!({
        "frame_width": 64, "frame_height": 48,
        "outputs": [{"frame_index": 2, "tracks": [{"track_id": 1, "bbox": bbox}, {"track_id": 2, "bbox": bbox}]}]
    });
    let resp: Value = client.post(format!("{base}/v1/render")).json(&req).send().await.unwrap().json().await.unwrap();
    let frames = resp["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 2);
    assert_eq!(frames[0]["svg"].as_str().unwrap().matches("<rect").count(), 0);
    assert_eq!(frames[1]["svg"].as_str().unwrap().matches("<rect").count(), 2);

    let shapes: NetworkShapes = client.get(format!("{base}/v1/descriptor-network")).send().await.unwrap().json().await.unwrap();
    assert_eq!(shapes.layers.len(), 11);
    assert_eq!(shapes.layers[9].output.to_string(), "128");
}

#[tokio::test]
async fn unknown_route_is_json_error() {
    let (srv, client) = server().await;
    let resp = client.get(format!("{}/v2/nothing", srv.base_url())).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
    let body: ErrorBody = resp.json().await.unwrap();
    assert_eq!(body.error, "not_found");
}
