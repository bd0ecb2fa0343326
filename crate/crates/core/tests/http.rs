use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use ontotamp_core::{BackendConfig, BackendError, BackendKind, PromptTemplate};

/// Serves one canned HTTP response per entry and returns the request bodies.
fn serve(responses: Vec<(u16, String, u64)>) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body, delay_ms) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line.trim()["authorization:".len()..].trim().to_string();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(format!("{auth}\n{}", String::from_utf8(buf).unwrap()));
            thread::sleep(Duration::from_millis(delay_ms));
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
        bodies
    });
    (url, handle)
}

fn prompt() -> ontotamp_core::Prompt {
    PromptTemplate::default().compose("guide", "env", "Put bowl in plate")
}

#[test]
fn chat_completion_round_trip() {
    let reply = r#"{"choices":[{"message":{"content":"Full Plan =\n    Pick ([bowl],{})\n"}}]}"#;
    let (url, server) = serve(vec![(200, reply.to_string(), 0)]);
    std::env::set_var("ONTOTAMP_HTTP_TEST_OK", "secret-token");
    let cfg = BackendConfig::http(url, "test-model", "ONTOTAMP_HTTP_TEST_OK");
    let mut backend = cfg.build().unwrap();
    assert_eq!(backend.name(), "http:test-model");
    assert_eq!(backend.request_plan(&prompt()).unwrap(), "Full Plan =\n    Pick ([bowl],{})\n");
    let bodies = server.join().unwrap();
    assert!(bodies[0].starts_with("Bearer secret-token\n"));
    let json: serde_json::Value = serde_json::from_str(bodies[0].split_once('\n').unwrap().1).unwrap();
    assert_eq!(json["model"], "test-model");
    assert_eq!(json["messages"][0]["role"], "user");
    assert!(json["messages"][0]["content"].as_str().unwrap().contains("Put bowl in plate"));
}

#[test]
fn status_codes_map_to_errors() {
    let (url, server) = serve(vec![(401, "{}".into(), 0), (500, "boom".into(), 0), (200, "{\"x\":1}".into(), 0)]);
    std::env::set_var("ONTOTAMP_HTTP_TEST_CODES", "t");
    let mut backend = BackendConfig::http(url, "m", "ONTOTAMP_HTTP_TEST_CODES").build().unwrap();
    assert!(matches!(backend.request_plan(&prompt()), Err(BackendError::Auth(_))));
    assert!(matches!(backend.request_plan(&prompt()), Err(BackendError::Status { status: 500, .. })));
    assert!(matches!(backend.request_plan(&prompt()), Err(BackendError::Response(_))));
    server.join().unwrap();
}

#[test]
fn slow_endpoint_times_out() {
    let (url, _server) = serve(vec![(200, "{}".into(), 1500)]);
    std::env::set_var("ONTOTAMP_HTTP_TEST_SLOW", "t");
    let mut cfg = BackendConfig::http(url, "m", "ONTOTAMP_HTTP_TEST_SLOW");
    cfg.timeout_s = 0.2;
    let mut backend = cfg.build().unwrap();
    assert!(matches!(backend.request_plan(&prompt()), Err(BackendError::Timeout(_))));
}

#[test]
fn missing_credential_is_auth_error() {
    let cfg = BackendConfig::http("http://127.0.0.1:9", "m", "ONTOTAMP_HTTP_TEST_NEVER_SET");
    assert!(matches!(cfg.build().err(), Some(BackendError::Auth(_))));
    let mut no_endpoint = cfg.clone();
    no_endpoint.endpoint = None;
    assert!(matches!(no_endpoint.build().err(), Some(BackendError::Config(_))));
    assert_eq!("http".parse::<BackendKind>().unwrap(), BackendKind::Http);
}
