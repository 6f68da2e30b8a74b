use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use tap_gateway::{AppConfig, Server};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start() -> String {
    let server = Server::bind(AppConfig::default(), "127.0.0.1:0").await.unwrap();
    let addr = server.local_addr().unwrap();
    tokio::spawn(server.run());
    format!("ws://{addr}")
}

async fn connect(url: &str) -> Client {
    let (mut ws, _) = connect_async(url).await.unwrap();
    let first = next_json(&mut ws).await;
    assert_eq!(first["type"], "Scene");
    assert_eq!(first["objects"].as_array().unwrap().len(), 2);
    ws
}

async fn next_json(ws: &mut Client) -> Value {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("message within 5 s")
            .expect("stream open")
            .unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

async fn send(ws: &mut Client, v: Value) {
    ws.send(Message::text(v.to_string())).await.unwrap();
}

fn finger(t_ms: f64, x_mm: f64, down: bool) -> Value {
    json!({"type": "FingerSample", "t_ms": t_ms, "x_mm": x_mm, "y_mm": 0.0, "down": down})
}

/// Reads until a StateUpdate satisfies `pred`.
async fn wait_update(ws: &mut Client, pred: impl Fn(&Value) -> bool) -> Value {
    loop {
        let v = next_json(ws).await;
        if v["type"] == "StateUpdate" && pred(&v) {
            return v;
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn press_and_release() {
    let url = start().await;
    let mut ws = connect(&url).await;
    send(&mut ws, finger(0.0, -60.0, true)).await;
    let t = loop {
        let v = next_json(&mut ws).await;
        if v["type"] == "PhaseTransition" {
            break v;
        }
    };
    assert_eq!(t["from"], "IDLE");
    assert_eq!(t["to"], "ATTENUATION");
    assert_eq!(t["object_id"], 1);
    let u = wait_update(&mut ws, |_| true).await;
    assert_eq!(u["phase"], "ATTENUATION");
    assert_eq!(u["object_id"], 1);

    send(&mut ws, finger(30.0, -60.0, false)).await;
    let u = wait_update(&mut ws, |v| v["phase"] == "IDLE").await;
    assert_eq!(u["amplitude"], 0.0);
    assert!(u["object_id"].is_null());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn clients_are_independent() {
    let url = start().await;
    let mut a = connect(&url).await;
    let mut b = connect(&url).await;
    send(&mut a, finger(0.0, -60.0, true)).await;
    send(&mut b, finger(500.0, 60.0, true)).await;
    let ua = wait_update(&mut a, |v| v["phase"] != "IDLE").await;
    let ub = wait_update(&mut b, |v| v["phase"] != "IDLE").await;
    assert_eq!(ua["object_id"], 1);
    assert_eq!(ub["object_id"], 2);
    // b's clock starts at its own first sample
    assert!(ub["t_ms"].as_f64().unwrap() >= 500.0);

    send(&mut a, finger(20.0, -60.0, false)).await;
    wait_update(&mut a, |v| v["phase"] == "IDLE").await;
    let ub = wait_update(&mut b, |_| true).await;
    assert_eq!(ub["object_id"], 2);
    assert_ne!(ub["phase"], "IDLE");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn malformed_message_keeps_session() {
    let url = start().await;
    let mut ws = connect(&url).await;
    ws.send(Message::text("{not json")).await.unwrap();
    let e = next_json(&mut ws).await;
    assert_eq!(e["type"], "Error");
    assert!(e["message"].as_str().unwrap().contains("malformed"));

    send(&mut ws, json!({"type": "FingerSample", "t_ms": 0})).await;
    assert_eq!(next_json(&mut ws).await["type"], "Error");

    // one frame, two messages: the second goes back in time
    let frame = format!("{}\n{}", finger(100.0, -60.0, true), finger(50.0, -60.0, true));
    ws.send(Message::text(frame)).await.unwrap();
    let mut saw_error = false;
    let u = loop {
        let v = next_json(&mut ws).await;
        if v["type"] == "Error" {
            saw_error = true;
        } else if v["type"] == "StateUpdate" && v["phase"] == "ATTENUATION" {
            break v;
        }
    };
    assert!(saw_error, "time regression is reported");
    assert_eq!(u["object_id"], 1);
}

#[tokio::test]
async fn busy_port_fails_at_bind() {
    let first = Server::bind(AppConfig::default(), "127.0.0.1:0").await.unwrap();
    let addr = first.local_addr().unwrap();
    assert!(Server::bind(AppConfig::default(), addr).await.is_err());
}
