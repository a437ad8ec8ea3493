use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use navsim::protocol::{Handler, ServerMessage, StateMessage};
use navsim::server::Server;
use navsim_core::nn::{ModelParams, TrainConfig};
use navsim_core::trainer::Session;
use navsim_core::world::{Status, WorldConfig};
use navsim_core::SimConfig;
use serde_json::{json, Value};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn start(tick_hz: f64) -> String {
    let cfg = SimConfig { world: WorldConfig { width: 11, height: 11, min_goal_distance: 4, max_steps: 400, ..WorldConfig::default() }, ..SimConfig::default() };
    let session = Session::new(cfg, TrainConfig::default(), ModelParams::init(3), 21, 0).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let server = Server::new(listener, Handler::new(session, None), tick_hz);
    let url = format!("ws://{}", server.local_addr().unwrap());
    thread::spawn(move || server.run());
    url
}

fn connect(url: &str) -> (Client, StateMessage) {
    let (mut ws, _) = tungstenite::connect(url).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
    }
    let first = recv(&mut ws);
    match first {
        ServerMessage::State(s) => {
            assert!(s.map.is_some(), "state on connect carries the map");
            (ws, s)
        }
        other => panic!("expected state, got {other:?}"),
    }
}

fn send(ws: &mut Client, v: Value) {
    ws.send(Message::text(v.to_string())).unwrap();
}

fn recv(ws: &mut Client) -> ServerMessage {
    loop {
        if let Message::Text(t) = ws.read().unwrap() {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

fn recv_state(ws: &mut Client) -> StateMessage {
    match recv(ws) {
        ServerMessage::State(s) => s,
        other => panic!("expected state, got {other:?}"),
    }
}

#[test]
fn interactive_session() {
    let url = start(20.0);
    let (mut ws, s0) = connect(&url);
    assert_eq!(s0.tick, 0);
    assert_eq!(s0.lidar.len(), 20);

    send(&mut ws, json!({"type": "act", "action": "turn_left"}));
    let s1 = recv_state(&mut ws);
    assert_eq!(s1.tick, 1);
    assert_eq!(s1.dataset_size, 0);

    send(&mut ws, json!({"type": "train"}));
    assert_eq!(recv(&mut ws), ServerMessage::Error { message: "empty dataset".into() });

    send(&mut ws, json!({"type": "teleport"}));
    assert!(matches!(recv(&mut ws), ServerMessage::Error { .. }));
    ws.send(Message::text("{not json")).unwrap();
    assert!(matches!(recv(&mut ws), ServerMessage::Error { .. }));

    send(&mut ws, json!({"type": "set_recording"}));
    assert!(recv_state(&mut ws).recording);
    for k in 0..3 {
        send(&mut ws, json!({"type": "act", "action": "turn_right"}));
        let s = recv_state(&mut ws);
        assert_eq!(s.dataset_size, k + 1);
        assert_eq!(s.tick, 2 + k as u32);
    }

    send(&mut ws, json!({"type": "train"}));
    match recv(&mut ws) {
        ServerMessage::TrainResult { stats, dataset_size } => {
            assert_eq!(dataset_size, 3);
            assert_eq!(stats.samples, 3);
        }
        other => panic!("expected train_result, got {other:?}"),
    }
    assert!(recv_state(&mut ws).last_train.is_some());

    send(&mut ws, json!({"type": "set_autonomous", "enabled": true}));
    let s = recv_state(&mut ws);
    assert!(s.autonomous && !s.recording);
    send(&mut ws, json!({"type": "act", "action": "forward"}));
    let mut saw_error = false;
    let mut last_tick = s.tick;
    let mut states = 0;
    while !saw_error || (states < 3 && last_tick < 20) {
        match recv(&mut ws) {
            ServerMessage::State(st) => {
                assert!(st.tick >= last_tick);
                last_tick = st.tick;
                states += 1;
                assert_eq!(st.dataset_size, 3);
            }
            ServerMessage::Error { .. } => saw_error = true,
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(saw_error, "act while autonomous is refused");
    assert!(last_tick > s.tick, "server ticks on its own in autonomous mode");

    send(&mut ws, json!({"type": "set_autonomous", "enabled": false}));
    let mut st = recv_state(&mut ws);
    while st.autonomous {
        st = recv_state(&mut ws);
    }

    send(&mut ws, json!({"type": "reset", "seed": 5}));
    let st = recv_state(&mut ws);
    assert_eq!((st.tick, st.map_seed, st.status), (0, 5, Status::Running));
    assert!(st.map.is_some());

    send(&mut ws, json!({"type": "eval", "episodes": 3, "seed": 2}));
    match recv(&mut ws) {
        ServerMessage::EvalResult(r) => {
            assert_eq!(r.episodes.len(), 3);
            let ok = r.episodes.iter().filter(|e| e.status == Status::Success).count();
            assert_eq!(r.accuracy, ok as f64 / 3.0);
        }
        other => panic!("expected eval_result, got {other:?}"),
    }

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.mmn1");
    let data = dir.path().join("d.ild1");
    send(&mut ws, json!({"type": "save_model", "path": model}));
    assert_eq!(recv(&mut ws), ServerMessage::Done { request: "save_model".into() });
    send(&mut ws, json!({"type": "load_model", "path": model}));
    assert_eq!(recv(&mut ws), ServerMessage::Done { request: "load_model".into() });
    recv_state(&mut ws);
    send(&mut ws, json!({"type": "save_dataset", "path": data}));
    assert_eq!(recv(&mut ws), ServerMessage::Done { request: "save_dataset".into() });
    assert_eq!(navsim::formats::dataset::load(&data).unwrap().len(), 3);
    send(&mut ws, json!({"type": "load_model", "path": dir.path().join("missing")}));
    assert!(matches!(recv(&mut ws), ServerMessage::Error { .. }));

    // The session outlives the connection.
    send(&mut ws, json!({"type": "act", "action": "turn_left"}));
    let before = recv_state(&mut ws);
    ws.close(None).unwrap();
    drop(ws);
    let (_ws, after) = connect(&url);
    assert_eq!((after.tick, after.dataset_size, after.map_seed), (before.tick, before.dataset_size, before.map_seed));
}

#[test]
fn image_payload_is_the_quantised_frame() {
    use base64::Engine;
    let url = start(20.0);
    let (_ws, s) = connect(&url);
    let bytes = base64::engine::general_purpose::STANDARD.decode(&s.image).unwrap();
    assert_eq!(bytes.len(), 64 * 64 * 3);
}
