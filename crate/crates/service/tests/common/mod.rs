#![allow(dead_code)]

use std::sync::Arc;

use bnx_service::{router, Store};
use reqwest::{Client, Response, StatusCode};
use serde_json::{json, Value};

pub struct Server {
    pub base: String,
    pub client: Client,
}

/// Starts a server on an ephemeral port with an empty store.
pub async fn spawn() -> Server {
    spawn_with(Arc::new(Store::new())).await
}

pub async fn spawn_with(store: Arc<Store>) -> Server {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(store)).await.unwrap();
    });
    Server {
        base: format!("http://{addr}"),
        client: Client::new(),
    }
}

pub async fn body(resp: Response) -> (StatusCode, Value) {
    let status = resp.status();
    let text = resp.text().await.unwrap();
    let value = if text.is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&text).unwrap()
    };
    (status, value)
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn get(&self, path: &str) -> (StatusCode, Value) {
        body(self.client.get(self.url(path)).send().await.unwrap()).await
    }

    pub async fn get_text(&self, path: &str) -> (StatusCode, String) {
        let resp = self.client.get(self.url(path)).send().await.unwrap();
        (resp.status(), resp.text().await.unwrap())
    }

    pub async fn post(&self, path: &str, payload: &Value) -> (StatusCode, Value) {
        body(self.client.post(self.url(path)).json(payload).send().await.unwrap()).await
    }

    pub async fn post_raw(&self, path: &str, raw: &str) -> (StatusCode, Value) {
        let resp = self
            .client
            .post(self.url(path))
            .header("content-type", "application/json")
            .body(raw.to_string())
            .send()
            .await
            .unwrap();
        body(resp).await
    }

    pub async fn put(&self, path: &str, payload: &Value) -> (StatusCode, Value) {
        body(self.client.put(self.url(path)).json(payload).send().await.unwrap()).await
    }

    /// Posts a fixture network and opens a session on it.
    pub async fn session_on(&self, fixture: &str) -> String {
        let (status, _) = self.post_raw("/networks", &bnx_testkit::fixture_text(fixture)).await;
        assert!(status == StatusCode::CREATED || status == StatusCode::CONFLICT);
        let (status, session) = self.post("/sessions", &json!({ "network_id": fixture })).await;
        assert_eq!(status, StatusCode::CREATED);
        session["id"].as_str().unwrap().to_string()
    }

    pub async fn chain3_session(&self) -> String {
        let id = self.session_on("chain3").await;
        let (s, _) = self
            .put(&format!("/sessions/{id}/target"), &json!({"node": "C", "state": "t"}))
            .await;
        assert_eq!(s, StatusCode::OK);
        let (s, _) = self.put(&format!("/sessions/{id}/findings"), &json!({"A": "t"})).await;
        assert_eq!(s, StatusCode::OK);
        id
    }
}

pub fn is_error_body(v: &Value) -> bool {
    v["code"].is_string() && v["message"].is_string() && v.get("detail").is_some()
}
