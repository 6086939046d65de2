//! Chat-completion client that writes the chatbot half of a paired corpus.
//!
//! Requests go through a [`Transport`] and a shared [`RateLimiter`]; waits
//! go through a [`Clock`] so tests can run against [`MockServer`] and
//! [`MockClock`] without real time passing.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Label, ParagraphRecord};

pub const DEFAULT_TEMPLATE: &str = "I am writing an article titled {title} for a WikiHow page. Write a paragraph of length {length} whose title is {headline} for the {sectionLabel} section of this article.";

pub const DEFAULT_API_KEY_ENV: &str = "API_KEY";

const WINDOW: Duration = Duration::from_secs(60);

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("template has unknown placeholder `{{{0}}}`")]
    UnknownPlaceholder(String),
    #[error("record `{id}` is missing field `{field}`")]
    MissingField { id: String, field: &'static str },
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("completion is empty")]
    EmptyCompletion,
    #[error("cache {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Length,
    Headline,
    SectionLabel,
}

impl Field {
    fn parse(name: &str) -> Option<Field> {
        match name {
            "title" => Some(Field::Title),
            "length" => Some(Field::Length),
            "headline" => Some(Field::Headline),
            "sectionLabel" => Some(Field::SectionLabel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(Field),
}

/// A prompt with `{title}`, `{length}`, `{headline}` and `{sectionLabel}`
/// placeholders. Braces that do not enclose an identifier are literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    source: String,
    pieces: Vec<Piece>,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::new(DEFAULT_TEMPLATE).expect("default template is valid")
    }
}

impl PromptTemplate {
    pub fn new(source: &str) -> Result<PromptTemplate, GenError> {
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut rest = source;
        while let Some(open) = rest.find('{') {
            text.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let ident_len = after
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(after.len());
            if ident_len > 0 && after[ident_len..].starts_with('}') {
                let name = &after[..ident_len];
                let field = Field::parse(name).ok_or_else(|| GenError::UnknownPlaceholder(name.to_string()))?;
                if !text.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut text)));
                }
                pieces.push(Piece::Slot(field));
                rest = &after[ident_len + 1..];
            } else {
                text.push('{');
                rest = after;
            }
        }
        text.push_str(rest);
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        Ok(PromptTemplate {
            source: source.to_string(),
            pieces,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Substitutes the record's fields; `length` is the word count of the
    /// record text.
    pub fn render(&self, r: &ParagraphRecord) -> Result<String, GenError> {
        let mut out = String::with_capacity(self.source.len() + 64);
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(field) => {
                    let (value, name) = match field {
                        Field::Title => (r.title.clone(), "title"),
                        Field::Headline => (r.headline.clone(), "headline"),
                        Field::SectionLabel => (r.section_label.clone(), "section_label"),
                        Field::Length => {
                            let n = r.word_count();
                            (if n == 0 { String::new() } else { n.to_string() }, "text")
                        }
                    };
                    if value.trim().is_empty() {
                        return Err(GenError::MissingField {
                            id: r.id.clone(),
                            field: name,
                        });
                    }
                    out.push_str(&value);
                }
            }
        }
        Ok(out)
    }
}

pub fn render_prompt(t: &PromptTemplate, r: &ParagraphRecord) -> Result<String, GenError> {
    t.render(r)
}

/// One paragraph to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationJob {
    pub source: ParagraphRecord,
    pub endpoint: String,
    pub model_name: String,
    pub max_retries: u32,
    /// Requests per minute.
    pub rate_limit: u32,
    pub cache_dir: PathBuf,
    pub max_tokens: Option<u32>,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
}

impl GenerationJob {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.rate_limit == 0 {
            return Err(GenError::InvalidJob("rate_limit must be positive".into()));
        }
        if self.endpoint.is_empty() {
            return Err(GenError::InvalidJob("endpoint is empty".into()));
        }
        if self.model_name.is_empty() {
            return Err(GenError::InvalidJob("model name is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    /// Sends a JSON POST. `Err` means no HTTP response was received.
    fn post_json(&self, url: &str, headers: &[(String, String)], body: &str) -> Result<HttpResponse, String>;
}

/// Blocking HTTP transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> HttpTransport {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTransport { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(120))
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, url: &str, headers: &[(String, String)], body: &str) -> Result<HttpResponse, String> {
        let mut req = self.agent.post(url).header("Content-Type", "application/json");
        for (k, v) in headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

pub trait Clock: Send + Sync {
    /// Time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Virtual clock: `sleep` advances time instantly and is recorded.
#[derive(Default)]
pub struct MockClock {
    now: Mutex<Duration>,
    sleeps: Mutex<Vec<Duration>>,
}

impl MockClock {
    pub fn sleeps(&self) -> Vec<Duration> {
        self.sleeps.lock().unwrap().clone()
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for MockClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.sleeps.lock().unwrap().push(d);
        *self.now.lock().unwrap() += d;
    }
}

/// Sliding 60-second window shared by every request of a client.
#[derive(Default)]
pub struct RateLimiter {
    sent: Mutex<VecDeque<Duration>>,
    log: Mutex<Vec<Duration>>,
}

impl RateLimiter {
    /// Blocks until a request may go out under `per_minute`, then records it.
    pub fn acquire(&self, clock: &dyn Clock, per_minute: u32) {
        loop {
            let wait = {
                let mut sent = self.sent.lock().unwrap();
                let now = clock.now();
                while sent.front().is_some_and(|t| now.saturating_sub(*t) >= WINDOW) {
                    sent.pop_front();
                }
                if sent.len() < per_minute as usize {
                    sent.push_back(now);
                    self.log.lock().unwrap().push(now);
                    return;
                }
                (sent[0] + WINDOW).saturating_sub(now)
            };
            clock.sleep(wait.max(Duration::from_millis(1)));
        }
    }

    /// Times at which requests were admitted.
    pub fn admitted(&self) -> Vec<Duration> {
        self.log.lock().unwrap().clone()
    }
}

/// Exponential backoff: `base · 2^attempt`, capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub cap: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_millis(500),
            cap: Duration::from_secs(30),
        }
    }
}

impl Backoff {
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.min(31)).unwrap_or(u32::MAX);
        self.base.saturating_mul(factor).min(self.cap)
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Serialize)]
struct CacheKey<'a> {
    model: &'a str,
    prompt: &'a str,
}

/// Hex SHA-256 of the model name and rendered prompt.
pub fn cache_key(model: &str, prompt: &str) -> String {
    let json = serde_json::to_string(&CacheKey { model, prompt }).expect("key serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: serde_json::Value,
    pub response: serde_json::Value,
    pub content: String,
}

/// Text of `choices[0].message.content`.
pub fn chat_response_content(body: &str) -> Result<String, GenError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| GenError::MalformedResponse(e.to_string()))?;
    let content = v
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .ok_or_else(|| GenError::MalformedResponse("missing choices[0].message.content".into()))?
        .as_str()
        .ok_or_else(|| GenError::MalformedResponse("content is not a string".into()))?;
    if content.trim().is_empty() {
        return Err(GenError::EmptyCompletion);
    }
    Ok(content.to_string())
}

pub struct ChatClient {
    transport: Box<dyn Transport>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
    backoff: Backoff,
}

impl ChatClient {
    pub fn new(transport: Box<dyn Transport>, clock: Arc<dyn Clock>) -> ChatClient {
        ChatClient {
            transport,
            clock,
            limiter: RateLimiter::default(),
            backoff: Backoff::default(),
        }
    }

    pub fn http() -> ChatClient {
        ChatClient::new(Box::new(HttpTransport::default()), Arc::new(SystemClock::default()))
    }

    pub fn with_backoff(mut self, backoff: Backoff) -> ChatClient {
        self.backoff = backoff;
        self
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    /// Generates the chatbot counterpart of `job.source`, from the cache when
    /// the same (model, prompt) was seen before.
    pub fn generate(&self, job: &GenerationJob, t: &PromptTemplate) -> Result<ParagraphRecord, GenError> {
        job.validate()?;
        let prompt = t.render(&job.source)?;
        let key = cache_key(&job.model_name, &prompt);
        let path = job.cache_dir.join(format!("{key}.json"));
        let content = match read_cache(&path) {
            Some(entry) => entry.content,
            None => {
                let request = ChatRequest {
                    model: &job.model_name,
                    messages: [Message {
                        role: "user",
                        content: &prompt,
                    }],
                    max_tokens: job.max_tokens,
                };
                let body = serde_json::to_string(&request).expect("request serializes");
                let response = self.send_with_retry(job, &body)?;
                let content = chat_response_content(&response)?;
                let entry = CacheEntry {
                    request: serde_json::to_value(&request).expect("request serializes"),
                    response: serde_json::from_str(&response).expect("validated above"),
                    content: content.clone(),
                };
                write_cache(&job.cache_dir, &path, &entry)?;
                content
            }
        };
        let s = &job.source;
        Ok(ParagraphRecord {
            id: format!("{}-gen", s.id),
            title: s.title.clone(),
            headline: s.headline.clone(),
            section_label: s.section_label.clone(),
            text: content.trim().to_string(),
            label: Label::Chatbot,
            pair_id: Some(s.pair_id.clone().unwrap_or_else(|| s.id.clone())),
        })
    }

    fn send_with_retry(&self, job: &GenerationJob, body: &str) -> Result<String, GenError> {
        let mut headers = Vec::new();
        match std::env::var(&job.api_key_env) {
            Ok(key) if !key.is_empty() => headers.push(("Authorization".to_string(), format!("Bearer {key}"))),
            _ => log::warn!("{} is not set; sending without authorization", job.api_key_env),
        }
        let mut attempt = 0u32;
        loop {
            self.limiter.acquire(self.clock.as_ref(), job.rate_limit);
            let last = match self.transport.post_json(&job.endpoint, &headers, body) {
                Ok(r) if (200..300).contains(&r.status) => return Ok(r.body),
                Ok(r) if r.status == 429 || r.status >= 500 => format!("HTTP {}", r.status),
                Ok(r) => {
                    return Err(GenError::Http {
                        status: r.status,
                        body: r.body.chars().take(200).collect(),
                    })
                }
                Err(e) => e,
            };
            if attempt >= job.max_retries {
                return Err(GenError::RetriesExhausted {
                    attempts: attempt + 1,
                    last,
                });
            }
            log::info!("retrying after {last}");
            self.clock.sleep(self.backoff.delay(attempt));
            attempt += 1;
        }
    }
}

fn read_cache(path: &Path) -> Option<CacheEntry> {
    let text = std::fs::read_to_string(path).ok()?;
    match serde_json::from_str(&text) {
        Ok(e) => Some(e),
        Err(e) => {
            log::warn!("{}: ignoring unreadable cache entry: {e}", path.display());
            None
        }
    }
}

fn write_cache(dir: &Path, path: &Path, entry: &CacheEntry) -> Result<(), GenError> {
    let err = |source| GenError::Cache {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    let text = serde_json::to_string_pretty(entry).expect("cache entry serializes");
    tmp.write_all(text.as_bytes()).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// Splits a multi-paragraph completion at blank lines into sibling records
/// `<id>-1`, `<id>-2`, … sharing the pair id.
pub fn split_paragraphs(r: &ParagraphRecord) -> Vec<ParagraphRecord> {
    let parts: Vec<String> = r
        .text
        .split("\n\n")
        .flat_map(|p| p.split("\r\n\r\n"))
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect();
    if parts.len() <= 1 {
        return vec![r.clone()];
    }
    parts
        .into_iter()
        .enumerate()
        .map(|(i, text)| ParagraphRecord {
            id: format!("{}-{}", r.id, i + 1),
            text,
            ..r.clone()
        })
        .collect()
}

/// Builds a minimal chat-completion response body around `content`.
pub fn chat_response_body(content: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}

/// Local HTTP server replaying a script of `(status, body)` responses; the
/// last one repeats once the script runs out.
pub struct MockServer {
    url: String,
    hits: Arc<AtomicUsize>,
    requests: Arc<Mutex<Vec<String>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(script: Vec<(u16, String)>) -> std::io::Result<MockServer> {
        assert!(!script.is_empty(), "script needs at least one response");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let hits = Arc::new(AtomicUsize::new(0));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let (hits, requests, stop) = (hits.clone(), requests.clone(), stop.clone());
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(mut stream) = stream else { continue };
                    let Some(body) = read_request(&mut stream) else { continue };
                    let n = hits.fetch_add(1, Ordering::SeqCst);
                    requests.lock().unwrap().push(body);
                    let (status, reply) = &script[n.min(script.len() - 1)];
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status} Scripted\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                        reply.len()
                    );
                    let _ = stream.flush();
                    let _ = stream.shutdown(Shutdown::Both);
                }
            })
        };
        Ok(MockServer {
            url: format!("http://{addr}/v1/chat/completions"),
            hits,
            requests,
            stop,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Request bodies in arrival order.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(addr) = self.url.strip_prefix("http://").and_then(|s| s.split('/').next()) {
            let _ = TcpStream::connect(addr);
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn read_request(stream: &mut TcpStream) -> Option<String> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut length = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            break;
        }
        if let Some((k, v)) = trimmed.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body).ok()?;
    String::from_utf8(body).ok()
}
