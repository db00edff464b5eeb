//! Thin client for a MediaWiki-compatible revisions endpoint.
//!
//! Pages are fetched oldest revision first and appended to a corpus file in
//! the JSON Lines form read by [`crate::corpus::load_corpus`]. Progress goes
//! to a cursor file after every batch, so an interrupted run picks up where
//! it stopped.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread::sleep;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::timestamp;

pub const MIN_INTERVAL: Duration = Duration::from_millis(100);

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server answered {status} for page {page_id}")]
    Status { status: u16, page_id: u64 },
    #[error("unexpected response for page {page_id}: {message}")]
    Response { page_id: u64, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cursor {path}: {message}")]
    Cursor { path: PathBuf, message: String },
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    /// API endpoint, e.g. `https://en.wikipedia.org/w/api.php`.
    pub base_url: String,
    pub lang: String,
    pub topic: String,
    /// Raised to [`MIN_INTERVAL`] when shorter.
    pub interval: Duration,
    /// Revisions per request.
    pub batch: usize,
    pub user_agent: String,
}

impl FetchConfig {
    pub fn new(base_url: impl Into<String>, lang: impl Into<String>, topic: impl Into<String>) -> Self {
        FetchConfig {
            base_url: base_url.into(),
            lang: lang.into(),
            topic: topic.into(),
            interval: MIN_INTERVAL,
            batch: 50,
            user_agent: concat!(env!("CARGO_PKG_NAME"), "/", env!("CARGO_PKG_VERSION")).into(),
        }
    }
}

/// Resume point. `output_len` is the corpus file length when the cursor was
/// written; anything past it came from an unfinished batch and is cut off.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cursor {
    pub done: Vec<u64>,
    pub page_id: Option<u64>,
    pub rvcontinue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ts")]
    pub started_at: Option<DateTime<Utc>>,
    pub output_len: u64,
}

mod opt_ts {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.serialize_str(&super::timestamp::format(t)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DateTime<Utc>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| super::timestamp::parse(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl Cursor {
    pub fn load(path: &Path) -> Result<Self, FetchError> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| FetchError::Cursor { path: path.into(), message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Cursor::default()),
            Err(e) => Err(FetchError::Io { path: path.into(), source: e }),
        }
    }

    fn save(&self, path: &Path) -> Result<(), FetchError> {
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string_pretty(self).expect("cursor serializes");
        std::fs::write(&tmp, text).map_err(|e| FetchError::Io { path: tmp.clone(), source: e })?;
        std::fs::rename(&tmp, path).map_err(|e| FetchError::Io { path: path.into(), source: e })
    }
}

struct Throttle {
    interval: Duration,
    last: Option<Instant>,
}

impl Throttle {
    fn wait(&mut self) {
        if let Some(last) = self.last {
            let due = last + self.interval;
            let now = Instant::now();
            if due > now {
                sleep(due - now);
            }
        }
        self.last = Some(Instant::now());
    }
}

pub struct Fetcher {
    cfg: FetchConfig,
    client: reqwest::blocking::Client,
    throttle: Throttle,
}

impl Fetcher {
    pub fn new(cfg: FetchConfig) -> Result<Self, FetchError> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(cfg.user_agent.clone())
            .timeout(Duration::from_secs(60))
            .build()?;
        let throttle = Throttle { interval: cfg.interval.max(MIN_INTERVAL), last: None };
        Ok(Fetcher { cfg, client, throttle })
    }

    /// Fetches the full history of every page in `page_ids` into `output`.
    /// Pages already listed in the cursor are skipped.
    pub fn fetch_pages(&mut self, page_ids: &[u64], output: &Path, cursor_path: &Path) -> Result<Cursor, FetchError> {
        let mut cursor = Cursor::load(cursor_path)?;
        let io = |e| FetchError::Io { path: output.into(), source: e };
        let mut out = OpenOptions::new().create(true).append(true).open(output).map_err(io)?;
        // drop lines written after the last saved cursor
        out.set_len(cursor.output_len).map_err(io)?;
        for &page_id in page_ids {
            if cursor.done.contains(&page_id) {
                continue;
            }
            if cursor.page_id != Some(page_id) {
                cursor.page_id = Some(page_id);
                cursor.rvcontinue = None;
                cursor.started_at = Some(Utc::now());
            }
            let mut title = None;
            loop {
                let body = self.request(page_id, cursor.rvcontinue.as_deref())?;
                let (page_title, lines, next) = self.parse(page_id, &body)?;
                title = title.or(page_title);
                let mut text = String::new();
                for l in lines {
                    text.push_str(&l.to_string());
                    text.push('\n');
                }
                let done = next.is_none();
                if done {
                    let meta = json!({"meta": {
                        "lang": self.cfg.lang,
                        "topic": self.cfg.topic,
                        "page_id": page_id,
                        "title": title.clone().unwrap_or_default(),
                        "retrieved_at": timestamp::format(&cursor.started_at.unwrap_or_else(Utc::now)),
                    }});
                    text.push_str(&meta.to_string());
                    text.push('\n');
                }
                out.write_all(text.as_bytes()).map_err(io)?;
                out.flush().map_err(io)?;
                cursor.output_len = out.metadata().map_err(io)?.len();
                cursor.rvcontinue = next;
                if done {
                    cursor.done.push(page_id);
                    cursor.page_id = None;
                    cursor.started_at = None;
                }
                cursor.save(cursor_path)?;
                if done {
                    break;
                }
            }
        }
        Ok(cursor)
    }

    fn request(&mut self, page_id: u64, rvcontinue: Option<&str>) -> Result<Value, FetchError> {
        let batch = self.cfg.batch.clamp(1, 500).to_string();
        let id = page_id.to_string();
        let mut query = vec![
            ("action", "query"),
            ("format", "json"),
            ("formatversion", "2"),
            ("prop", "revisions"),
            ("pageids", id.as_str()),
            ("rvprop", "ids|timestamp|user|flags|content"),
            ("rvslots", "main"),
            ("rvdir", "newer"),
            ("rvlimit", batch.as_str()),
        ];
        if let Some(c) = rvcontinue {
            query.push(("rvcontinue", c));
        }
        let url = url::Url::parse_with_params(&self.cfg.base_url, &query)
            .map_err(|e| FetchError::Response { page_id, message: format!("base url: {e}") })?;
        self.throttle.wait();
        let resp = self.client.get(url).send()?;
        if !resp.status().is_success() {
            return Err(FetchError::Status { status: resp.status().as_u16(), page_id });
        }
        let text = resp.text()?;
        serde_json::from_str(&text).map_err(|e| FetchError::Response { page_id, message: e.to_string() })
    }

    #[allow(clippy::type_complexity)]
    fn parse(&self, page_id: u64, body: &Value) -> Result<(Option<String>, Vec<Value>, Option<String>), FetchError> {
        let bad = |m: &str| FetchError::Response { page_id, message: m.to_string() };
        if let Some(err) = body.get("error") {
            return Err(bad(&format!("api error {err}")));
        }
        let page = body
            .pointer("/query/pages/0")
            .ok_or_else(|| bad("missing query.pages"))?;
        if page.get("missing").and_then(Value::as_bool).unwrap_or(false) {
            return Err(bad("page does not exist"));
        }
        let title = page.get("title").and_then(Value::as_str).map(str::to_string);
        let mut lines = Vec::new();
        for rev in page.get("revisions").and_then(Value::as_array).into_iter().flatten() {
            let rev_id = rev.get("revid").and_then(Value::as_u64).ok_or_else(|| bad("revision without revid"))?;
            let ts = rev.get("timestamp").and_then(Value::as_str).ok_or_else(|| bad("revision without timestamp"))?;
            timestamp::parse(ts).map_err(|e| bad(&e))?;
            let anon = rev.get("anon").and_then(Value::as_bool).unwrap_or(false);
            // hidden user names become one shared anonymous editor
            let (user, registered) = match rev.get("user").and_then(Value::as_str) {
                Some(u) => (u.to_string(), !anon),
                None => ("(hidden)".to_string(), false),
            };
            let content = rev.pointer("/slots/main/content").and_then(Value::as_str).unwrap_or("");
            let parent = rev.get("parentid").and_then(Value::as_u64).filter(|&p| p != 0);
            lines.push(json!({
                "lang": self.cfg.lang,
                "topic": self.cfg.topic,
                "page_id": page_id,
                "title": title.clone().unwrap_or_default(),
                "rev_id": rev_id,
                "parent_id": parent,
                "timestamp": ts,
                "user": user,
                "registered": registered,
                "wikitext": content,
            }));
        }
        let next = body.pointer("/continue/rvcontinue").and_then(Value::as_str).map(str::to_string);
        Ok((title, lines, next))
    }
}
