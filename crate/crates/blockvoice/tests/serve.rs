use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread;
use std::time::Duration;

use blockvoice::serve::{Server, BUSY_MESSAGE};
use blockvoice_core::config::{Config, Language};
use serde_json::{json, Value};

fn start() -> SocketAddr {
    let server = Server::bind("127.0.0.1:0", &Config::bundled(), Language::En).unwrap();
    let addr = server.local_addr().unwrap();
    thread::spawn(move || server.run());
    addr
}

struct LineClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl LineClient {
    fn connect(addr: SocketAddr) -> LineClient {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        LineClient { writer: stream.try_clone().unwrap(), reader: BufReader::new(stream) }
    }

    fn send(&mut self, msg: &str) {
        self.writer.write_all(msg.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    fn recv(&mut self) -> Value {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }

    /// Reads messages up to and including the first of `kind`.
    fn until(&mut self, kind: &str) -> Vec<Value> {
        let mut seen = Vec::new();
        loop {
            let m = self.recv();
            let done = m["type"] == kind;
            seen.push(m);
            if done {
                return seen;
            }
        }
    }
}

fn of_type<'a>(msgs: &'a [Value], kind: &str) -> Vec<&'a Value> {
    msgs.iter().filter(|m| m["type"] == kind).collect()
}

fn transcript(text: &str, confidence: Option<f64>) -> String {
    let mut h = json!({ "text": text });
    if let Some(c) = confidence {
        h["confidence"] = json!(c);
    }
    json!({ "type": "transcript", "hypotheses": [h] }).to_string()
}

#[test]
fn greeting_then_voice_placement() {
    let addr = start();
    let mut c = LineClient::connect(addr);
    let greeting = c.until("snapshot");
    assert_eq!(greeting[0]["type"], "state");
    assert_eq!(greeting[0]["phase"], "idle");

    c.send(r#"{"type":"ptt","state":"down"}"#);
    let msgs = c.until("snapshot");
    assert_eq!(of_type(&msgs, "feedback")[0]["kind"], "recording_started");
    assert_eq!(of_type(&msgs, "state")[0]["recording"], true);

    c.send(&transcript("place move 20 steps", None));
    let msgs = c.until("snapshot");
    let fb = of_type(&msgs, "feedback");
    assert_eq!(fb[0]["kind"], "executed");
    assert_eq!(fb[0]["message"], "place move 20 steps");
    assert!(fb[0]["ttl"].as_u64().unwrap() > 0);
    let snap = msgs.last().unwrap();
    let stacks = snap["workspace"]["sprites"][0]["stacks"].as_array().unwrap();
    assert_eq!(stacks.len(), 1);
    let id = stacks[0]["blocks"][0]["id"].clone();
    let numbered = snap["overlay"]["entries"].as_object().unwrap().values().any(|e| e["kind"] == "block" && e["ref"] == id);
    assert!(numbered, "{snap}");

    c.send(r#"{"type":"ptt","state":"up"}"#);
    let msgs = c.until("snapshot");
    assert_eq!(of_type(&msgs, "state")[0]["recording"], false);
}

#[test]
fn confirmation_round_trip() {
    let addr = start();
    let mut c = LineClient::connect(addr);
    c.until("snapshot");
    c.send(r#"{"type":"ptt","state":"down"}"#);
    c.until("snapshot");
    c.send(&transcript("plays move 10 steps", Some(0.8)));
    let msgs = c.until("snapshot");
    let req = of_type(&msgs, "confirmation_request");
    assert_eq!(req.len(), 1, "{msgs:?}");
    assert_eq!(req[0]["action_text"], "place move 10 steps");
    assert!(req[0]["deadline"].as_u64().unwrap() > 0);
    assert_eq!(of_type(&msgs, "state")[0]["phase"], "awaiting_confirmation");

    c.send(r#"{"type":"confirm","value":"yes"}"#);
    let msgs = c.until("snapshot");
    assert_eq!(of_type(&msgs, "feedback")[0]["kind"], "executed");
    assert_eq!(of_type(&msgs, "state")[0]["phase"], "listening");
    assert_eq!(msgs.last().unwrap()["workspace"]["sprites"][0]["stacks"].as_array().unwrap().len(), 1);
}

#[test]
fn malformed_messages_get_errors_and_session_continues() {
    let addr = start();
    let mut c = LineClient::connect(addr);
    c.until("snapshot");
    c.send("this is not json");
    let m = c.recv();
    assert_eq!(m["type"], "error");
    assert!(m["message"].as_str().unwrap().starts_with("malformed message"));
    c.send(r#"{"type":"launch_rockets"}"#);
    assert_eq!(c.recv()["type"], "error");
    c.send(r#"{"type":"direct_op","op":{"action":"place","block":{"opcode":"looks_hide","slot_values":{}}}}"#);
    let msgs = c.until("snapshot");
    assert_eq!(of_type(&msgs, "feedback")[0]["kind"], "executed");
}

#[test]
fn second_client_is_refused_while_first_is_served() {
    let addr = start();
    let mut first = LineClient::connect(addr);
    first.until("snapshot");
    let mut second = LineClient::connect(addr);
    let m = second.recv();
    assert_eq!(m, json!({ "type": "error", "message": BUSY_MESSAGE }));

    first.send(r#"{"type":"toggle"}"#);
    let msgs = first.until("snapshot");
    assert_eq!(of_type(&msgs, "state")[0]["recording"], true);
}

#[test]
fn session_outlives_a_connection() {
    let addr = start();
    {
        let mut c = LineClient::connect(addr);
        c.until("snapshot");
        c.send(r#"{"type":"direct_op","op":{"action":"add_sprite","name":"Cat"}}"#);
        c.until("snapshot");
    }
    // The server notices the hang-up on its next poll.
    let mut tries = 0;
    let greeting = loop {
        let mut c = LineClient::connect(addr);
        let first = c.recv();
        if first["type"] != "error" {
            let mut msgs = vec![first];
            msgs.extend(c.until("snapshot"));
            break msgs;
        }
        tries += 1;
        assert!(tries < 50, "server stayed busy");
        thread::sleep(Duration::from_millis(50));
    };
    let names: Vec<&str> =
        greeting.last().unwrap()["workspace"]["sprites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["Sprite1", "Cat"]);
}

#[test]
fn websocket_client() {
    use tungstenite::Message;
    let addr = start();
    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}/")).unwrap();
    let next = |ws: &mut tungstenite::WebSocket<_>| loop {
        match ws.read().unwrap() {
            Message::Text(t) => return serde_json::from_str::<Value>(&t).unwrap(),
            _ => continue,
        }
    };
    assert_eq!(next(&mut ws)["type"], "state");
    assert_eq!(next(&mut ws)["type"], "snapshot");
    ws.send(Message::text(r#"{"type":"ptt","state":"down"}"#)).unwrap();
    ws.send(Message::text(transcript("place say hello", None))).unwrap();
    let mut executed = None;
    for _ in 0..10 {
        let m = next(&mut ws);
        if m["type"] == "feedback" && m["kind"] == "executed" {
            executed = Some(m);
            break;
        }
    }
    assert_eq!(executed.unwrap()["message"], "place say hello");
    ws.send(Message::text("{")).unwrap();
    loop {
        let m = next(&mut ws);
        if m["type"] == "error" {
            break;
        }
    }
    ws.close(None).unwrap();
}
