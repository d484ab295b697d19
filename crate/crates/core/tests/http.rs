//! HTTP clients against an in-process server speaking the wire protocols.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use fluency_core::corpus::{fetch_category_lexicon, EdgeSource, HttpEdgeSource};
use fluency_core::mlm::{CachedBackend, FixtureBackend, FixtureFile, MaskScoringBackend, ServiceBackend};
use fluency_core::ErrorClass;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Request {
    method: String,
    path: String,
    body: String,
}

type Handler = dyn Fn(&Request) -> (u16, String) + Send + Sync;

struct Server {
    url: String,
    log: Arc<Mutex<Vec<Request>>>,
}

impl Server {
    fn start(handler: impl Fn(&Request) -> (u16, String) + Send + Sync + 'static) -> Server {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let log = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let seen = log.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    continue;
                }
                let mut parts = line.split_whitespace();
                let method = parts.next().unwrap_or_default().to_string();
                let path = parts.next().unwrap_or_default().to_string();
                let mut length = 0;
                loop {
                    let mut header = String::new();
                    reader.read_line(&mut header).unwrap();
                    if header.trim().is_empty() {
                        break;
                    }
                    if let Some((k, v)) = header.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            length = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let request = Request {
                    method,
                    path,
                    body: String::from_utf8(body).unwrap(),
                };
                let (code, reply) = handler(&request);
                seen.lock().unwrap().push(request);
                let response = format!(
                    "HTTP/1.1 {code} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        Server { url, log }
    }

    fn requests(&self, path_prefix: &str) -> Vec<Request> {
        self.log
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.path.starts_with(path_prefix))
            .cloned()
            .collect()
    }
}

fn health() -> (u16, String) {
    (
        200,
        json!({"status": "ok", "model": "m1", "mask_token": "<mask>"}).to_string(),
    )
}

fn masks() -> Value {
    json!({
        "v": 1,
        "masks": [
            [{"token": "apple", "prob": 0.5}, {"token": "pear", "logprob": (0.25f64).ln()}],
            [{"token": "Ġpie", "prob": 0.9}]
        ]
    })
}

fn no_wait() -> Duration {
    Duration::from_millis(1)
}

#[test]
fn health_and_fill_mask_round_trip() {
    let server = Server::start(|r| match r.path.as_str() {
        "/health" => health(),
        "/fill-mask" => (200, masks().to_string()),
        _ => (404, "{}".into()),
    });
    let backend = ServiceBackend::connect(&server.url, 0, no_wait())
        .unwrap()
        .with_max_top_n(50);
    assert_eq!(backend.identity(), "m1");
    assert_eq!(backend.mask_token(), "<mask>");

    let rankings = backend.fill_mask("Fruits like <mask><mask>.", 500).unwrap();
    assert_eq!(rankings.len(), 2);
    assert_eq!(rankings[0][1].token, "pear");
    assert!((rankings[0][1].probability - 0.25).abs() < 1e-12);
    assert_eq!(rankings[1][0].token, "Ġpie");

    let sent = server.requests("/fill-mask");
    assert_eq!(sent.len(), 1);
    assert_eq!(sent[0].method, "POST");
    let body: Value = serde_json::from_str(&sent[0].body).unwrap();
    assert_eq!(
        body,
        json!({"v": 1, "prompt": "Fruits like <mask><mask>.", "top_n": 50})
    );
}

#[test]
fn server_errors_are_retried() {
    let calls = Arc::new(Mutex::new(0));
    let counter = calls.clone();
    let server = Server::start(move |r| match r.path.as_str() {
        "/health" => health(),
        _ => {
            let mut n = counter.lock().unwrap();
            *n += 1;
            if *n <= 2 {
                (503, "{\"error\":\"busy\"}".into())
            } else {
                (200, masks().to_string())
            }
        }
    });
    let backend = ServiceBackend::connect(&server.url, 3, no_wait()).unwrap();
    assert!(backend.fill_mask("<mask>", 5).is_ok());
    assert_eq!(server.requests("/fill-mask").len(), 3);
}

#[test]
fn exhausted_retries_are_backend_errors() {
    let server = Server::start(|r| match r.path.as_str() {
        "/health" => health(),
        _ => (500, "{}".into()),
    });
    let backend = ServiceBackend::connect(&server.url, 2, no_wait()).unwrap();
    let err = backend.fill_mask("<mask>", 5).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Backend);
    assert!(err.to_string().contains("3 attempts"), "{err}");
    assert_eq!(server.requests("/fill-mask").len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = Server::start(|r| match r.path.as_str() {
        "/health" => health(),
        _ => (422, "{\"error\":\"bad prompt\"}".into()),
    });
    let backend = ServiceBackend::connect(&server.url, 5, no_wait()).unwrap();
    let err = backend.fill_mask("no mask here", 5).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Backend);
    assert!(err.to_string().contains("bad prompt"), "{err}");
    assert_eq!(server.requests("/fill-mask").len(), 1);
}

#[test]
fn malformed_rankings_are_rejected() {
    for reply in [
        json!({"v": 1, "masks": [[{"token": "a", "prob": 0.1}, {"token": "b", "prob": 0.2}]]}),
        json!({"v": 1, "masks": [[{"token": "a", "prob": 0.7}, {"token": "b", "prob": 0.6}]]}),
        json!({"v": 1, "masks": []}),
        json!({"v": 2, "masks": [[{"token": "a", "prob": 0.1}]]}),
        json!({"v": 1, "masks": [[{"token": "a"}]]}),
    ] {
        let body = reply.to_string();
        let server = Server::start(move |r| match r.path.as_str() {
            "/health" => health(),
            _ => (200, body.clone()),
        });
        let backend = ServiceBackend::connect(&server.url, 0, no_wait()).unwrap();
        let err = backend.fill_mask("<mask>", 5).unwrap_err();
        assert_eq!(err.class(), ErrorClass::Backend, "{reply}: {err}");
    }
}

#[test]
fn unhealthy_or_absent_service_fails_to_connect() {
    let server = Server::start(|_| {
        (
            200,
            json!({"status": "loading", "model": "m", "mask_token": "[MASK]"}).to_string(),
        )
    });
    let err = ServiceBackend::connect(&server.url, 0, no_wait()).err().unwrap();
    assert_eq!(err.class(), ErrorClass::Backend);

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = ServiceBackend::connect(&format!("http://127.0.0.1:{port}"), 1, no_wait())
        .err()
        .unwrap();
    assert_eq!(err.class(), ErrorClass::Backend);
}

#[test]
fn recorded_responses_replay_through_the_fixture_backend() {
    let server = Server::start(|r| match r.path.as_str() {
        "/health" => health(),
        _ => (200, masks().to_string()),
    });
    let service: Arc<dyn MaskScoringBackend> = Arc::new(ServiceBackend::connect(&server.url, 0, no_wait()).unwrap());
    let cached = CachedBackend::new(service);
    let live = cached.fill_mask("A <mask><mask>.", 10).unwrap();
    // Served from memory: no second request.
    assert_eq!(cached.fill_mask("A <mask><mask>.", 1).unwrap()[0].len(), 1);
    assert_eq!(server.requests("/fill-mask").len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("recorded.json");
    std::fs::write(&path, cached.to_fixture().to_json()).unwrap();
    let replay = FixtureBackend::load(&path).unwrap();
    assert_eq!(replay.identity(), "m1");
    assert_eq!(replay.fill_mask("A <mask><mask>.", 10).unwrap(), live);
    assert_eq!(FixtureFile::load(&path).unwrap().top_n["A <mask><mask>."], 10);
}

fn edge(start: &str, end: &str, rel: &str) -> Value {
    json!({"start": {"@id": start}, "end": {"@id": end}, "rel": {"@id": rel}})
}

/// Serves `/query` pages of two edges each from a fixed edge list.
fn edge_server() -> Server {
    Server::start(|r| {
        let query = r.path.split_once('?').map(|(_, q)| q).unwrap_or_default();
        let param = |k: &str| {
            query
                .split('&')
                .find_map(|kv| kv.strip_prefix(&format!("{k}=")))
                .unwrap_or_default()
                .to_string()
        };
        let rel = param("rel");
        let offset: usize = param("offset").parse().unwrap_or(0);
        let all: Vec<Value> = match rel.as_str() {
            "/r/IsA" => vec![
                edge("/c/en/apple", "/c/en/fruit", "/r/IsA"),
                edge("/c/en/pear/n", "/c/en/fruit", "/r/IsA"),
                edge("/c/fr/pomme", "/c/en/fruit", "/r/IsA"),
                edge("/c/en/star_fruit", "/c/en/fruit", "/r/IsA"),
                edge("/c/en/fruit", "/c/en/fruit", "/r/IsA"),
            ],
            _ => vec![edge("/c/en/fig", "/c/en/fruit", "/r/PartOf")],
        };
        let page: Vec<Value> = all.iter().skip(offset).take(2).cloned().collect();
        let mut body = json!({"edges": page});
        if offset + 2 < all.len() {
            body["view"] = json!({"nextPage": format!("/query?offset={}", offset + 2)});
        }
        (200, body.to_string())
    })
}

/// Forces two-edge pages so pagination is exercised.
struct Paged(HttpEdgeSource);

impl EdgeSource for Paged {
    fn edges_into(
        &self,
        concept: &str,
        relation: &str,
        offset: usize,
        limit: usize,
    ) -> fluency_core::Result<fluency_core::corpus::EdgePage> {
        self.0.edges_into(concept, relation, offset, limit)
    }

    fn page_size(&self) -> usize {
        2
    }
}

#[test]
fn edge_pages_are_followed_and_cached() {
    let server = edge_server();
    let cache = tempfile::tempdir().unwrap();
    let source = Paged(HttpEdgeSource::new(server.url.clone()).with_response_cache(cache.path()));
    let lex = fetch_category_lexicon("fruits", &["/r/IsA", "/r/PartOf"], &source).unwrap();
    let words: Vec<&str> = lex.instances.iter().map(String::as_str).collect();
    assert_eq!(words, vec!["apple", "fig", "pear", "star fruit"]);
    let pages = server.requests("/query");
    assert_eq!(pages.len(), 4, "three IsA pages and one PartOf page");
    assert!(pages[0].path.contains("end=/c/en/fruit"), "{}", pages[0].path);

    // Cached bodies answer without the network.
    let offline = Paged(HttpEdgeSource::new(server.url.clone()).with_response_cache(cache.path()));
    let again = fetch_category_lexicon("fruits", &["/r/IsA", "/r/PartOf"], &offline).unwrap();
    assert_eq!(again.instances, lex.instances);
    assert_eq!(server.requests("/query").len(), 4);
}

#[test]
fn edge_retrieval_failures_are_backend_class() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let source = HttpEdgeSource::new(format!("http://127.0.0.1:{port}"));
    let err = fetch_category_lexicon("fruits", &["/r/IsA"], &source).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Backend);

    let server = Server::start(|_| (200, "not json".into()));
    let err = fetch_category_lexicon("fruits", &["/r/IsA"], &HttpEdgeSource::new(server.url.clone())).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Backend);
}
