use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use paradetect::genclient::{
    cache_key, chat_response_body, render_prompt, Backoff, CacheEntry, ChatClient, Clock,
    GenError, GenerationJob, HttpResponse, HttpTransport, MockClock, MockServer, PromptTemplate,
    RateLimiter, Transport,
};
use paradetect::{Label, ParagraphRecord};
use proptest::prelude::*;

fn source() -> ParagraphRecord {
    ParagraphRecord {
        id: "h7".into(),
        title: "Grow Basil".into(),
        headline: "Pick a Sunny Spot".into(),
        section_label: "Planting".into(),
        text: "Basil likes warm soil and plenty of light.".into(),
        label: Label::Human,
        pair_id: Some("p7".into()),
    }
}

fn job(endpoint: &str, cache: &Path) -> GenerationJob {
    GenerationJob {
        source: source(),
        endpoint: endpoint.into(),
        model_name: "mock-model".into(),
        max_retries: 3,
        rate_limit: 60,
        cache_dir: cache.to_path_buf(),
        max_tokens: None,
        api_key_env: "PARADETECT_TEST_UNSET_KEY".into(),
    }
}

fn client(clock: Arc<MockClock>) -> ChatClient {
    ChatClient::new(Box::new(HttpTransport::default()), clock)
}

#[test]
fn template_without_placeholders_is_verbatim() {
    let t = PromptTemplate::new("Write anything you like.").unwrap();
    assert_eq!(render_prompt(&t, &source()).unwrap(), "Write anything you like.");
}

#[test]
fn missing_headline_is_named() {
    let mut r = source();
    r.headline.clear();
    let err = render_prompt(&PromptTemplate::default(), &r).unwrap_err();
    assert!(matches!(err, GenError::MissingField { field: "headline", .. }), "{err}");
}

#[test]
fn length_is_word_count() {
    let t = PromptTemplate::new("{length} words on {title}").unwrap();
    assert_eq!(render_prompt(&t, &source()).unwrap(), "8 words on Grow Basil");
}

#[test]
fn cache_ignores_unrelated_job_fields() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start(vec![(200, chat_response_body("Basil wants sun."))]).unwrap();
    let c = client(Arc::new(MockClock::default()));
    let t = PromptTemplate::default();
    let first = c.generate(&job(server.url(), dir.path()), &t).unwrap();
    assert_eq!(first.text, "Basil wants sun.");
    assert_eq!(first.label, Label::Chatbot);

    let mut other = job(server.url(), dir.path());
    other.max_retries = 0;
    other.rate_limit = 1;
    other.max_tokens = Some(50);
    other.source.id = "another-id".into();
    other.source.text = "Eight words of a different human paragraph here.".into();
    c.generate(&other, &t).unwrap();
    assert_eq!(server.hits(), 1);

    other.model_name = "other-model".into();
    c.generate(&other, &t).unwrap();
    assert_eq!(server.hits(), 2);
}

#[test]
fn cache_file_holds_request_and_response() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start(vec![(200, chat_response_body("Cached text."))]).unwrap();
    let t = PromptTemplate::default();
    client(Arc::new(MockClock::default())).generate(&job(server.url(), dir.path()), &t).unwrap();
    let prompt = render_prompt(&t, &source()).unwrap();
    let path = dir.path().join(format!("{}.json", cache_key("mock-model", &prompt)));
    let entry: CacheEntry = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(entry.request["model"], "mock-model");
    assert_eq!(entry.request["messages"][0]["content"], prompt.as_str());
    assert_eq!(entry.response["choices"][0]["message"]["content"], "Cached text.");
    let sent: serde_json::Value = serde_json::from_str(&server.requests()[0]).unwrap();
    assert_eq!(sent, entry.request);
}

#[test]
fn server_errors_exhaust_retries() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start(vec![(503, "{}".into())]).unwrap();
    let clock = Arc::new(MockClock::default());
    let err = client(clock.clone()).generate(&job(server.url(), dir.path()), &PromptTemplate::default()).unwrap_err();
    assert!(matches!(err, GenError::RetriesExhausted { attempts: 4, .. }), "{err}");
    assert_eq!(server.hits(), 4);
    let b = Backoff::default();
    assert_eq!(clock.sleeps(), vec![b.delay(0), b.delay(1), b.delay(2)]);
}

#[test]
fn bad_bodies_are_rejected() {
    for (body, empty) in [("not json".to_string(), false), (chat_response_body("   "), true)] {
        let dir = tempfile::tempdir().unwrap();
        let server = MockServer::start(vec![(200, body)]).unwrap();
        let err = client(Arc::new(MockClock::default()))
            .generate(&job(server.url(), dir.path()), &PromptTemplate::default())
            .unwrap_err();
        if empty {
            assert!(matches!(err, GenError::EmptyCompletion), "{err}");
        } else {
            assert!(matches!(err, GenError::MalformedResponse(_)), "{err}");
        }
        assert_eq!(std::fs::read_dir(dir.path()).map(|d| d.count()).unwrap_or(0), 0);
    }
}

#[test]
fn client_errors_are_not_retried() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start(vec![(400, "{\"error\":\"bad\"}".into())]).unwrap();
    let err = client(Arc::new(MockClock::default()))
        .generate(&job(server.url(), dir.path()), &PromptTemplate::default())
        .unwrap_err();
    assert!(matches!(err, GenError::Http { status: 400, .. }), "{err}");
    assert_eq!(server.hits(), 1);
}

#[derive(Default)]
struct Recorder {
    headers: Mutex<Vec<Vec<(String, String)>>>,
}

struct Shared(Arc<Recorder>);

impl Transport for Shared {
    fn post_json(&self, _url: &str, headers: &[(String, String)], _body: &str) -> Result<HttpResponse, String> {
        self.0.headers.lock().unwrap().push(headers.to_vec());
        Ok(HttpResponse {
            status: 200,
            body: chat_response_body("ok"),
        })
    }
}

#[test]
fn bearer_token_comes_from_named_variable() {
    let var = "PARADETECT_TEST_BEARER_KEY";
    std::env::set_var(var, "secret-123");
    let rec = Arc::new(Recorder::default());
    let c = ChatClient::new(Box::new(Shared(rec.clone())), Arc::new(MockClock::default()));
    let dir = tempfile::tempdir().unwrap();
    let mut j = job("http://unused.invalid", dir.path());
    j.api_key_env = var.into();
    c.generate(&j, &PromptTemplate::default()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    c.generate(&job("http://unused.invalid", dir.path()), &PromptTemplate::default()).unwrap();

    let headers = rec.headers.lock().unwrap();
    assert_eq!(headers[0], vec![("Authorization".to_string(), "Bearer secret-123".to_string())]);
    assert!(headers[1].is_empty());
}

#[test]
fn concurrent_acquisition_respects_limit() {
    let clock = Arc::new(MockClock::default());
    let limiter = Arc::new(RateLimiter::default());
    std::thread::scope(|s| {
        for _ in 0..4 {
            let (clock, limiter) = (clock.clone(), limiter.clone());
            s.spawn(move || {
                for _ in 0..10 {
                    limiter.acquire(clock.as_ref(), 7);
                }
            });
        }
    });
    let admitted = limiter.admitted();
    assert_eq!(admitted.len(), 40);
    assert_window(&admitted, 7).unwrap();
}

fn assert_window(admitted: &[Duration], limit: u32) -> Result<(), String> {
    let mut times = admitted.to_vec();
    times.sort();
    for (i, start) in times.iter().enumerate() {
        let inside = times[i..].iter().take_while(|t| **t < *start + Duration::from_secs(60)).count();
        if inside > limit as usize {
            return Err(format!("{inside} requests in the window starting at {start:?}"));
        }
    }
    Ok(())
}

proptest! {
    #[test]
    fn limiter_window_holds(limit in 1u32..10, gaps in prop::collection::vec(0u64..30_000, 1..60)) {
        let clock = MockClock::default();
        let limiter = RateLimiter::default();
        for g in gaps {
            clock.advance(Duration::from_millis(g));
            limiter.acquire(&clock, limit);
        }
        assert_window(&limiter.admitted(), limit).map_err(TestCaseError::fail)?;
        let _ = clock.now();
    }

    #[test]
    fn rendering_is_pure(title in "[A-Za-z][A-Za-z ]{0,19}", headline in "[A-Za-z][A-Za-z ]{0,19}", words in 1usize..50) {
        let mut r = source();
        r.title = title.clone();
        r.headline = headline;
        r.text = vec!["w"; words].join(" ");
        let before = r.clone();
        let t = PromptTemplate::default();
        let a = render_prompt(&t, &r).unwrap();
        prop_assert_eq!(&a, &render_prompt(&t, &r).unwrap());
        prop_assert_eq!(&r, &before);
        let needle = format!("of length {words} ");
        prop_assert!(a.contains(&needle));
        prop_assert!(a.contains(&title));
    }
}
