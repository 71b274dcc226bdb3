use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use jsonoracle::llm::{
    ChatMessage, ChatRequest, HttpClient, HttpClientConfig, LlmClient, LlmError, RetryPolicy,
    RetryingClient, ScriptedClient, ScriptedReply,
};

struct Seen {
    head: String,
    body: String,
}

/// Serves the canned (status, body) replies in order, one per connection.
fn serve(replies: Vec<(u16, String)>) -> (String, JoinHandle<Vec<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    let handle = thread::spawn(move || {
        let mut seen = Vec::new();
        for (status, body) in replies {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                head.push_str(&line);
            }
            let len = head
                .lines()
                .find_map(|l| {
                    let (k, v) = l.split_once(':')?;
                    k.eq_ignore_ascii_case("content-length")
                        .then(|| v.trim().parse::<usize>().ok())?
                })
                .unwrap_or(0);
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            seen.push(Seen {
                head,
                body: String::from_utf8(buf).unwrap(),
            });
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(resp.as_bytes()).unwrap();
        }
        seen
    });
    (url, handle)
}

fn ok_body(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
        .to_string()
}

fn request() -> ChatRequest {
    ChatRequest {
        model: "gpt-3.5-turbo".into(),
        messages: vec![
            ChatMessage::system("You are a helpful assistant."),
            ChatMessage::user("hi"),
        ],
        temperature: 0.8,
        top_p: 0.95,
    }
}

fn client(url: &str, key: Option<&str>) -> HttpClient {
    HttpClient::new(HttpClientConfig {
        endpoint: url.to_string(),
        api_key: key.map(str::to_string),
        timeout: Duration::from_secs(5),
        verbose: true,
    })
    .unwrap()
}

#[test]
fn sends_openai_shaped_body_with_bearer_token() {
    let (url, h) = serve(vec![(200, ok_body("```\nlet a = 1;\n```"))]);
    let out = client(&url, Some("sk-test")).complete(&request()).unwrap();
    assert_eq!(out, "```\nlet a = 1;\n```");
    let seen = h.join().unwrap();
    assert!(seen[0].head.starts_with("POST /v1/chat/completions"));
    assert!(seen[0]
        .head
        .to_ascii_lowercase()
        .contains("authorization: bearer sk-test"));
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["model"], "gpt-3.5-turbo");
    assert_eq!(body["temperature"], 0.8);
    assert_eq!(body["top_p"], 0.95);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "hi");
}

#[test]
fn classifies_failures() {
    let (url, h) = serve(vec![
        (401, r#"{"error": "bad key"}"#.into()),
        (
            400,
            r#"{"error": {"code": "context_length_exceeded"}}"#.into(),
        ),
        (200, "not json".into()),
        (200, ok_body("   ")),
        (503, "overloaded".into()),
    ]);
    let c = client(&url, None);
    let errs: Vec<LlmError> = (0..5)
        .map(|_| c.complete(&request()).unwrap_err())
        .collect();
    h.join().unwrap();
    assert!(matches!(&errs[0], LlmError::Http { status: 401, .. }));
    assert!(!errs[0].is_retryable());
    assert!(matches!(errs[1], LlmError::ContextOverflow(_)));
    assert!(matches!(errs[2], LlmError::Malformed(_)));
    assert!(matches!(errs[3], LlmError::EmptyResponse));
    assert!(matches!(&errs[4], LlmError::Http { status: 503, .. }));
    assert!(errs[4].is_retryable());
}

#[test]
fn refused_connection_is_a_retryable_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let e = client(&format!("http://127.0.0.1:{port}/"), None)
        .complete(&request())
        .unwrap_err();
    assert!(matches!(e, LlmError::Transport(_)), "{e:?}");
    assert!(e.is_retryable());
}

#[test]
fn retries_server_errors_with_doubling_backoff() {
    let (url, h) = serve(vec![
        (500, "oops".into()),
        (502, "oops".into()),
        (200, ok_body("done")),
    ]);
    let slept = Arc::new(Mutex::new(Vec::new()));
    let log = slept.clone();
    let c = RetryingClient::new(
        client(&url, None),
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_millis(100),
        },
    )
    .with_sleeper(move |d| log.lock().unwrap().push(d));
    assert_eq!(c.complete(&request()).unwrap(), "done");
    h.join().unwrap();
    assert_eq!(c.retries(), 2);
    assert_eq!(
        *slept.lock().unwrap(),
        vec![Duration::from_millis(100), Duration::from_millis(200)]
    );
}

#[test]
fn gives_up_after_the_attempt_budget_and_never_retries_client_errors() {
    let c = RetryingClient::new(
        ScriptedClient::new([
            ScriptedReply::Err(LlmError::Transport("reset".into())),
            ScriptedReply::Err(LlmError::Transport("reset".into())),
            ScriptedReply::Err(LlmError::Http {
                status: 429,
                body: String::new(),
            }),
        ]),
        RetryPolicy {
            attempts: 2,
            initial_backoff: Duration::ZERO,
        },
    )
    .with_sleeper(|_| {});
    assert!(matches!(
        c.complete(&request()),
        Err(LlmError::Transport(_))
    ));
    assert_eq!(c.retries(), 1);
    assert!(matches!(
        c.complete(&request()),
        Err(LlmError::Http { status: 429, .. })
    ));
    assert_eq!(c.retries(), 1);
    assert_eq!(c.inner().remaining(), 0);
}

#[test]
fn environment_override_wins_over_configured_endpoint() {
    // single test touching these variables, so no cross-test races
    std::env::set_var("JSONORACLE_TEST_KEY", "sk-env");
    std::env::set_var("JSONORACLE_ENDPOINT", "http://127.0.0.1:1/override");
    let cfg = HttpClientConfig::from_env(Some("http://example.invalid/"), "JSONORACLE_TEST_KEY");
    std::env::remove_var("JSONORACLE_ENDPOINT");
    assert_eq!(cfg.endpoint, "http://127.0.0.1:1/override");
    assert_eq!(cfg.api_key.as_deref(), Some("sk-env"));
    let cfg = HttpClientConfig::from_env(None, "JSONORACLE_TEST_MISSING_KEY");
    assert_eq!(cfg.endpoint, "https://api.openai.com/v1/chat/completions");
    assert_eq!(cfg.api_key, None);
}
