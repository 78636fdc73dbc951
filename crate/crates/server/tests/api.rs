use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use mini_internet::monitor::{looking_glass, LgView};
use mini_internet::topo::{generate_reference_topology, instantiate};
use mininet_sim::{router, AppState, Tokens};
use proptest::prelude::*;
use rand::SeedableRng;
use serde_json::Value;
use tower::ServiceExt;

/// 4 ASes; AS 2 starts blank.
fn state() -> Arc<AppState> {
    let mut spec = generate_reference_topology(1, 4).unwrap();
    for a in &mut spec.ases {
        a.auto_configured = a.asn != 2;
    }
    let net = instantiate(&spec).unwrap();
    let tokens = Tokens::generate(&spec.asns(), &mut rand::rngs::StdRng::seed_from_u64(7));
    AppState::new(net, tokens)
}

async fn call(st: &Arc<AppState>, req: Request<Body>) -> (StatusCode, String, Option<String>) {
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(body.to_vec()).unwrap(), ctype)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(uri: &str, token: Option<&str>, body: impl Into<Body>) -> Request<Body> {
    let mut b = Request::post(uri);
    if let Some(t) = token {
        b = b.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    b.body(body.into()).unwrap()
}

fn post_json(uri: &str, token: &str, body: &str) -> Request<Body> {
    Request::post(uri)
        .header(header::AUTHORIZATION, format!("Bearer {token}"))
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

#[tokio::test]
async fn matrix_is_json_with_exact_keys() {
    let st = state();
    let (s, body, ctype) = call(&st, get("/matrix")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("application/json"));
    let v: Value = serde_json::from_str(&body).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["asns", "cells", "round"]);
    assert_eq!(v["asns"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(v["cells"][1][1], "r");
    assert_eq!(v["cells"][0][0], "g");
}

#[tokio::test]
async fn diagnosis_names_the_blank_as() {
    let st = state();
    let (_, body, _) = call(&st, get("/matrix/diagnosis")).await;
    let v: Value = serde_json::from_str(&body).unwrap();
    let findings = v["findings"].as_array().unwrap();
    assert!(findings.iter().any(|f| f["asn"] == 2));
}

#[tokio::test]
async fn config_round_trips_into_running_config() {
    let st = state();
    let tok = st.tokens.groups[&2].clone();
    let script = "interface lo\n ip address 2.150.0.1/32\n";
    let (s, body, _) = call(&st, post("/as/2/device/ROUTER1/config", Some(&tok), script)).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["applied"], 2);
    assert!(v["diagnostics"].as_array().unwrap().is_empty());
    assert_eq!(v["convergence"]["converged"], true);
    let (s, cfg, ctype) = call(&st, get("/lg/2/ROUTER1/running-config")).await;
    assert_eq!(s, StatusCode::OK);
    assert!(ctype.unwrap().starts_with("text/plain"));
    assert!(cfg.contains("ip address 2.150.0.1/32"), "{cfg}");
}

#[tokio::test]
async fn config_diagnostics_are_reported() {
    let st = state();
    let tok = st.tokens.groups[&2].clone();
    let (s, body, _) = call(&st, post("/as/2/device/ROUTER1/config", Some(&tok), "interface nope\n")).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["diagnostics"][0]["line"], 1);
    assert_eq!(v["diagnostics"][0]["severity"], "error");
}

#[tokio::test]
async fn auth_is_enforced() {
    let st = state();
    let tok3 = st.tokens.groups[&3].clone();
    let uri = "/as/2/device/ROUTER1/config";
    assert_eq!(call(&st, post(uri, None, "")).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&st, post(uri, Some("nope"), "")).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&st, post(uri, Some(&tok3), "")).await.0, StatusCode::FORBIDDEN);
    let ev = r#"{"type":"fail-router","router":"2.ROUTER1"}"#;
    assert_eq!(call(&st, post_json("/event", &tok3, ev)).await.0, StatusCode::FORBIDDEN);
    let missing = post("/as/2/device/ROUTER99/config", Some(&st.tokens.groups[&2]), "");
    assert_eq!(call(&st, missing).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn instructor_events_and_defer() {
    let st = state();
    let inst = st.tokens.instructor.clone();
    let round0 = st.snapshot().matrix.round;
    let ev = r#"{"type":"reference","target":2}"#;
    let (s, body, _) = call(&st, post_json("/event?defer=1", &inst, ev)).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert!(st.has_pending());
    assert_eq!(st.snapshot().matrix.round, round0, "deferred change must not publish");
    let (s, _, _) = call(&st, post("/converge", Some(&inst), "")).await;
    assert_eq!(s, StatusCode::OK);
    assert!(!st.has_pending());
    assert!(st.snapshot().matrix.all_green());
    let (_, hist, _) = call(&st, get("/matrix/history")).await;
    let hist: Value = serde_json::from_str(&hist).unwrap();
    assert_eq!(hist.as_array().unwrap().len(), 2);

    let (_, body, _) = call(&st, post_json("/event", &inst, r#"{"type":"grade","target":2}"#)).await;
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v[0]["score"], v[0]["max_score"], "{body}");

    let bad = r#"{"type":"fail-link","a":"1.ROUTER1","b":"9.ROUTER1"}"#;
    assert_eq!(call(&st, post_json("/event", &inst, bad)).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn lg_errors_and_path() {
    let st = state();
    assert_eq!(call(&st, get("/lg/1/ROUTER1/bogus")).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(call(&st, get("/lg/1/NOPE/bgp")).await.0, StatusCode::NOT_FOUND);
    let (s, bgp, _) = call(&st, get("/lg/1/ROUTER1/bgp")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(bgp, looking_glass(&st.snapshot().net, 1, "ROUTER1", LgView::Bgp).unwrap());

    let (s, body, _) = call(&st, get("/path?src=3&dst=1")).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["path"][0], 3);
    assert_eq!(*v["path"].as_array().unwrap().last().unwrap(), 1);
    assert_eq!(v["labels"].as_array().unwrap().len(), v["path"].as_array().unwrap().len() - 1);
    assert_eq!(call(&st, get("/path?src=3&dst=77")).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn topology_lists_nodes_and_edges() {
    let st = state();
    let (_, body, _) = call(&st, get("/topology")).await;
    let v: Value = serde_json::from_str(&body).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    assert_eq!(nodes.iter().filter(|n| n["kind"] == "as").count(), 4);
    assert!(v["edges"].as_array().unwrap().iter().any(|e| e["kind"] == "provider-customer"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writes_serialize() {
    let st = state();
    let tok = st.tokens.groups[&2].clone();
    let reqs = (1..=6).map(|i| {
        let st = st.clone();
        let tok = tok.clone();
        tokio::spawn(async move {
            let script = format!("interface host\n ip address 2.10{i}.0.2/24\n");
            call(&st, post("/as/2/device/ROUTER1/config", Some(&tok), script)).await
        })
    });
    for r in futures_join(reqs.collect()).await {
        assert_eq!(r.0, StatusCode::OK);
    }
    // Whatever the order, the final address is one of the written ones and the
    // published snapshot matches the writer's state.
    let snap = st.snapshot();
    let addr = snap.net.device(2, "ROUTER1").unwrap().config.interfaces["host"].address.unwrap();
    assert!((1..=6).any(|i| addr.to_string() == format!("2.10{i}.0.2/24")));
    let (_, cfg, _) = call(&st, get("/lg/2/ROUTER1/running-config")).await;
    assert!(cfg.contains(&format!("ip address {addr}")));
}

async fn futures_join<T>(handles: Vec<tokio::task::JoinHandle<T>>) -> Vec<T> {
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random request streams never change another AS's devices.
    #[test]
    fn group_tokens_are_isolated(reqs in prop::collection::vec((1u32..=4, 1u32..=4, 1usize..=4), 1..8)) {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async {
            let st = state();
            let before = st.snapshot();
            let mut touched = std::collections::BTreeSet::new();
            for (who, target, r) in reqs {
                let tok = st.tokens.groups[&who].clone();
                let uri = format!("/as/{target}/device/ROUTER{r}/config?defer=1");
                let (s, _, _) = call(&st, post(&uri, Some(&tok), "interface lo\n shutdown\n")).await;
                if who == target {
                    prop_assert_eq!(s, StatusCode::OK);
                    touched.insert(target);
                } else {
                    prop_assert_eq!(s, StatusCode::FORBIDDEN);
                }
            }
            st.mutate(false, |_| ()).await;
            let after = st.snapshot();
            for (id, dev) in &after.net.devices {
                if !touched.contains(&id.asn) {
                    prop_assert_eq!(&dev.config, &before.net.devices[id].config);
                }
            }
            Ok(())
        })?;
    }
}
