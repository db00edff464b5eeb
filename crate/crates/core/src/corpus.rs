//! Revision data model and the JSON Lines fixture format.
//!
//! A corpus file holds one revision per line. Each article may carry one
//! additional `{"meta": {...}}` line recording when its history was
//! retrieved; without it the newest revision timestamp is used.
//!
//! ```text
//! {"meta":{"lang":"en","topic":"climate","page_id":7,"title":"Ice","retrieved_at":"2024-01-01T00:00:00Z"}}
//! {"lang":"en","topic":"climate","page_id":7,"title":"Ice","rev_id":1,"parent_id":null,"timestamp":"2020-01-01T00:00:00Z","user":"Alice","registered":true,"urls":["https://ex.com/a"]}
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate revision id {rev_id} on page {page_id}")]
    DuplicateRevision { line: usize, page_id: u64, rev_id: u64 },
    #[error("page {page_id}: revision {rev_id} is older than its parent {parent_id}")]
    TimestampRegression { page_id: u64, rev_id: u64, parent_id: u64 },
    #[error("page {page_id}: retrieved-at precedes the last revision")]
    RetrievedBeforeLastRevision { page_id: u64 },
    #[error("line {line}: page {page_id} disagrees with earlier lines on {field}")]
    InconsistentPage { line: usize, page_id: u64, field: &'static str },
    #[error("page {page_id}: metadata line without any revision")]
    OrphanMeta { page_id: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serde adapter for `YYYY-MM-DDThh:mm:ssZ` timestamps.
pub mod timestamp {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn format(t: &DateTime<Utc>) -> String {
        t.format(TIMESTAMP_FORMAT).to_string()
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, String> {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
            .map(|n| n.and_utc())
            .map_err(|e| format!("bad timestamp {s:?}: {e}"))
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Citation content of one revision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// URLs already pulled out of the page text.
    Urls(Vec<String>),
    /// Raw page source, parsed by the extractor.
    Wikitext(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisionRecord {
    pub lang: String,
    pub topic: String,
    pub page_id: u64,
    pub title: String,
    pub rev_id: u64,
    pub parent_id: Option<u64>,
    pub timestamp: DateTime<Utc>,
    pub user: String,
    pub registered: bool,
    pub payload: Payload,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RevisionLine {
    lang: String,
    topic: String,
    page_id: u64,
    title: String,
    rev_id: u64,
    #[serde(default)]
    parent_id: Option<u64>,
    #[serde(with = "timestamp")]
    timestamp: DateTime<Utc>,
    user: String,
    registered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    urls: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wikitext: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageMeta {
    pub lang: String,
    pub topic: String,
    pub page_id: u64,
    pub title: String,
    #[serde(with = "timestamp")]
    pub retrieved_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    meta: PageMeta,
}

impl TryFrom<RevisionLine> for RevisionRecord {
    type Error = String;

    fn try_from(l: RevisionLine) -> Result<Self, String> {
        let payload = match (l.urls, l.wikitext) {
            (Some(urls), None) => Payload::Urls(urls),
            (None, Some(text)) => Payload::Wikitext(text),
            (Some(_), Some(_)) => return Err("both `urls` and `wikitext` present".into()),
            (None, None) => return Err("missing payload: expected `urls` or `wikitext`".into()),
        };
        Ok(RevisionRecord {
            lang: l.lang,
            topic: l.topic,
            page_id: l.page_id,
            title: l.title,
            rev_id: l.rev_id,
            parent_id: l.parent_id,
            timestamp: l.timestamp,
            user: l.user,
            registered: l.registered,
            payload,
        })
    }
}

impl From<&RevisionRecord> for RevisionLine {
    fn from(r: &RevisionRecord) -> Self {
        let (urls, wikitext) = match &r.payload {
            Payload::Urls(u) => (Some(u.clone()), None),
            Payload::Wikitext(t) => (None, Some(t.clone())),
        };
        RevisionLine {
            lang: r.lang.clone(),
            topic: r.topic.clone(),
            page_id: r.page_id,
            title: r.title.clone(),
            rev_id: r.rev_id,
            parent_id: r.parent_id,
            timestamp: r.timestamp,
            user: r.user.clone(),
            registered: r.registered,
            urls,
            wikitext,
        }
    }
}

/// Full edit history of one article, sorted by (timestamp, revision id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleHistory {
    pub meta: PageMeta,
    pub revisions: Vec<RevisionRecord>,
}

impl ArticleHistory {
    pub fn first_timestamp(&self) -> Option<DateTime<Utc>> {
        self.revisions.first().map(|r| r.timestamp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    High,
    Mid,
    Low,
    Unassigned,
}

/// Identifies a topic-language dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DatasetKey {
    pub topic: String,
    pub lang: String,
}

impl DatasetKey {
    pub fn new(topic: impl Into<String>, lang: impl Into<String>) -> Self {
        DatasetKey { topic: topic.into(), lang: lang.into() }
    }
}

impl std::fmt::Display for DatasetKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.topic, self.lang)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub key: DatasetKey,
    /// Sorted by page id.
    pub articles: Vec<ArticleHistory>,
    pub tier: Tier,
}

impl Dataset {
    pub fn revision_count(&self) -> usize {
        self.articles.iter().map(|a| a.revisions.len()).sum()
    }
}

/// Per-dataset normalizers: summed article ages and distinct editors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgeTotals {
    pub article_days: f64,
    pub article_revisions: u64,
    pub unique_users: u64,
}

/// Article age in days and merged revisions, summed over the dataset, plus
/// the number of distinct user names. Merged revisions are maximal runs of
/// one user's consecutive edits.
pub fn dataset_age_totals(d: &Dataset) -> AgeTotals {
    let mut seconds: i64 = 0;
    let mut revisions = 0u64;
    let mut users: HashSet<&str> = HashSet::new();
    for a in &d.articles {
        let Some(first) = a.first_timestamp() else { continue };
        seconds += (a.meta.retrieved_at - first).num_seconds();
        let mut prev: Option<&str> = None;
        for r in &a.revisions {
            if prev != Some(r.user.as_str()) {
                revisions += 1;
            }
            prev = Some(&r.user);
            users.insert(&r.user);
        }
    }
    AgeTotals {
        article_days: seconds as f64 / SECONDS_PER_DAY,
        article_revisions: revisions,
        unique_users: users.len() as u64,
    }
}

enum Line {
    Revision(RevisionRecord),
    Meta(PageMeta),
}

fn parse_line(text: &str) -> Result<Line, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if value.get("meta").is_some() {
        let m: MetaLine = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(Line::Meta(m.meta))
    } else {
        let r: RevisionLine = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(Line::Revision(RevisionRecord::try_from(r)?))
    }
}

#[derive(Default)]
struct PageAcc {
    revisions: Vec<(usize, RevisionRecord)>,
    meta: Option<(usize, PageMeta)>,
}

/// Reads a JSON Lines corpus from any reader.
pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<Dataset>, CorpusError> {
    let mut pages: BTreeMap<u64, PageAcc> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(&line)
            .map_err(|message| CorpusError::Malformed { line: line_no, message })?;
        match parsed {
            Line::Revision(r) => {
                let acc = pages.entry(r.page_id).or_default();
                acc.revisions.push((line_no, r));
            }
            Line::Meta(m) => {
                let acc = pages.entry(m.page_id).or_default();
                if acc.meta.is_some() {
                    return Err(CorpusError::Malformed {
                        line: line_no,
                        message: format!("second metadata line for page {}", m.page_id),
                    });
                }
                acc.meta = Some((line_no, m));
            }
        }
    }

    let mut datasets: BTreeMap<DatasetKey, Vec<ArticleHistory>> = BTreeMap::new();
    for (page_id, acc) in pages {
        let article = assemble_article(page_id, acc)?;
        let key = DatasetKey::new(&article.meta.topic, &article.meta.lang);
        datasets.entry(key).or_default().push(article);
    }
    Ok(datasets
        .into_iter()
        .map(|(key, articles)| Dataset { key, articles, tier: Tier::Unassigned })
        .collect())
}

fn assemble_article(page_id: u64, acc: PageAcc) -> Result<ArticleHistory, CorpusError> {
    let PageAcc { mut revisions, meta } = acc;
    if revisions.is_empty() {
        return Err(CorpusError::OrphanMeta { page_id });
    }
    let (_, head) = &revisions[0];
    let (lang, topic, title) = (head.lang.clone(), head.topic.clone(), head.title.clone());

    let mut seen = HashSet::new();
    for (line, r) in &revisions {
        let field = if r.lang != lang {
            Some("lang")
        } else if r.topic != topic {
            Some("topic")
        } else if r.title != title {
            Some("title")
        } else {
            None
        };
        if let Some(field) = field {
            return Err(CorpusError::InconsistentPage { line: *line, page_id, field });
        }
        if !seen.insert(r.rev_id) {
            return Err(CorpusError::DuplicateRevision { line: *line, page_id, rev_id: r.rev_id });
        }
    }
    if let Some((line, m)) = &meta {
        let field = if m.lang != lang {
            Some("lang")
        } else if m.topic != topic {
            Some("topic")
        } else if m.title != title {
            Some("title")
        } else {
            None
        };
        if let Some(field) = field {
            return Err(CorpusError::InconsistentPage { line: *line, page_id, field });
        }
    }

    revisions.sort_by_key(|(_, r)| (r.timestamp, r.rev_id));
    let revisions: Vec<RevisionRecord> = revisions.into_iter().map(|(_, r)| r).collect();

    let by_id: BTreeMap<u64, &RevisionRecord> = revisions.iter().map(|r| (r.rev_id, r)).collect();
    for r in &revisions {
        if let Some(parent) = r.parent_id.and_then(|p| by_id.get(&p)) {
            if parent.timestamp > r.timestamp {
                return Err(CorpusError::TimestampRegression {
                    page_id,
                    rev_id: r.rev_id,
                    parent_id: parent.rev_id,
                });
            }
        }
    }

    let last = revisions.last().map(|r| r.timestamp).expect("non-empty");
    let meta = match meta {
        Some((_, m)) => {
            if m.retrieved_at < last {
                return Err(CorpusError::RetrievedBeforeLastRevision { page_id });
            }
            m
        }
        None => PageMeta { lang, topic, page_id, title, retrieved_at: last },
    };
    Ok(ArticleHistory { meta, revisions })
}

/// Loads a corpus file. `.jsonl` is the only supported format.
pub fn load_corpus(path: &Path) -> Result<Vec<Dataset>, CorpusError> {
    let file = std::fs::File::open(path)?;
    read_corpus(file)
}

/// Writes datasets back in the fixture format: per article, the metadata
/// line followed by its revisions in order.
pub fn write_corpus<W: Write>(datasets: &[Dataset], mut w: W) -> std::io::Result<()> {
    for d in datasets {
        for a in &d.articles {
            let meta = MetaLine { meta: a.meta.clone() };
            serde_json::to_writer(&mut w, &meta)?;
            w.write_all(b"\n")?;
            for r in &a.revisions {
                serde_json::to_writer(&mut w, &RevisionLine::from(r))?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Merges datasets of the same language into one `topic` dataset. Pages
/// listed under several topics are kept once.
pub fn pool_topics(datasets: &[Dataset], topic: &str) -> Vec<Dataset> {
    let mut by_lang: BTreeMap<String, BTreeMap<u64, ArticleHistory>> = BTreeMap::new();
    for d in datasets {
        let pages = by_lang.entry(d.key.lang.clone()).or_default();
        for a in &d.articles {
            pages.entry(a.meta.page_id).or_insert_with(|| a.clone());
        }
    }
    by_lang
        .into_iter()
        .map(|(lang, pages)| Dataset {
            key: DatasetKey::new(topic, lang),
            articles: pages.into_values().collect(),
            tier: Tier::Unassigned,
        })
        .collect()
}

/// Keeps only revisions strictly before `end`, clamps retrieved-at to `end`
/// and drops articles left empty.
pub fn truncate_before(d: &Dataset, end: DateTime<Utc>) -> Dataset {
    let articles = d
        .articles
        .iter()
        .filter_map(|a| {
            let revisions: Vec<_> =
                a.revisions.iter().filter(|r| r.timestamp < end).cloned().collect();
            if revisions.is_empty() {
                return None;
            }
            let mut meta = a.meta.clone();
            meta.retrieved_at = meta.retrieved_at.min(end);
            Some(ArticleHistory { meta, revisions })
        })
        .collect();
    Dataset { key: d.key.clone(), articles, tier: d.tier }
}

/// Distinct user names across the dataset.
pub fn dataset_users(d: &Dataset) -> BTreeSet<&str> {
    d.articles.iter().flat_map(|a| a.revisions.iter().map(|r| r.user.as_str())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        timestamp::parse(s).unwrap()
    }

    fn rev(page: u64, rev: u64, t: &str, user: &str) -> String {
        format!(
            r#"{{"lang":"en","topic":"t","page_id":{page},"title":"P{page}","rev_id":{rev},"parent_id":null,"timestamp":"{t}","user":"{user}","registered":true,"urls":[]}}"#
        )
    }

    #[test]
    fn empty_input_gives_no_datasets() {
        assert!(read_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn revisions_are_sorted() {
        let text = [
            rev(1, 3, "2020-01-03T00:00:00Z", "a"),
            rev(1, 1, "2020-01-01T00:00:00Z", "b"),
            rev(1, 2, "2020-01-02T00:00:00Z", "a"),
        ]
        .join("\n");
        let ds = read_corpus(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 1);
        let ids: Vec<u64> = ds[0].articles[0].revisions.iter().map(|r| r.rev_id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(ds[0].articles[0].meta.retrieved_at, ts("2020-01-03T00:00:00Z"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\nnot json\n", rev(1, 1, "2020-01-01T00:00:00Z", "a"));
        match read_corpus(text.as_bytes()) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn payload_must_be_exactly_one() {
        let both = r#"{"lang":"en","topic":"t","page_id":1,"title":"P","rev_id":1,"timestamp":"2020-01-01T00:00:00Z","user":"a","registered":true,"urls":[],"wikitext":""}"#;
        let none = r#"{"lang":"en","topic":"t","page_id":1,"title":"P","rev_id":1,"timestamp":"2020-01-01T00:00:00Z","user":"a","registered":true}"#;
        assert!(matches!(read_corpus(both.as_bytes()), Err(CorpusError::Malformed { line: 1, .. })));
        assert!(matches!(read_corpus(none.as_bytes()), Err(CorpusError::Malformed { line: 1, .. })));
    }

    #[test]
    fn duplicate_revision_rejected() {
        let text = [rev(1, 1, "2020-01-01T00:00:00Z", "a"), rev(1, 1, "2020-01-02T00:00:00Z", "a")]
            .join("\n");
        assert!(matches!(
            read_corpus(text.as_bytes()),
            Err(CorpusError::DuplicateRevision { line: 2, rev_id: 1, .. })
        ));
    }

    #[test]
    fn parent_newer_than_child_rejected() {
        let parent = rev(1, 1, "2020-01-05T00:00:00Z", "a");
        let child = r#"{"lang":"en","topic":"t","page_id":1,"title":"P1","rev_id":2,"parent_id":1,"timestamp":"2020-01-01T00:00:00Z","user":"a","registered":true,"urls":[]}"#;
        let text = format!("{parent}\n{child}");
        assert!(matches!(
            read_corpus(text.as_bytes()),
            Err(CorpusError::TimestampRegression { rev_id: 2, parent_id: 1, .. })
        ));
    }

    #[test]
    fn meta_line_sets_retrieved_at() {
        let meta = r#"{"meta":{"lang":"en","topic":"t","page_id":1,"title":"P1","retrieved_at":"2020-02-01T00:00:00Z"}}"#;
        let text = format!("{meta}\n{}", rev(1, 1, "2020-01-01T00:00:00Z", "a"));
        let ds = read_corpus(text.as_bytes()).unwrap();
        assert_eq!(ds[0].articles[0].meta.retrieved_at, ts("2020-02-01T00:00:00Z"));

        let early = r#"{"meta":{"lang":"en","topic":"t","page_id":1,"title":"P1","retrieved_at":"2019-01-01T00:00:00Z"}}"#;
        let text = format!("{early}\n{}", rev(1, 1, "2020-01-01T00:00:00Z", "a"));
        assert!(matches!(
            read_corpus(text.as_bytes()),
            Err(CorpusError::RetrievedBeforeLastRevision { page_id: 1 })
        ));
    }

    #[test]
    fn age_totals_single_and_additive() {
        let meta = |p: u64| {
            format!(
                r#"{{"meta":{{"lang":"en","topic":"t","page_id":{p},"title":"P{p}","retrieved_at":"2020-01-11T00:00:00Z"}}}}"#
            )
        };
        // users a, b, a, c -> 4 merged revisions, 3 distinct users
        let one = [
            meta(1),
            rev(1, 1, "2020-01-01T00:00:00Z", "a"),
            rev(1, 2, "2020-01-02T00:00:00Z", "b"),
            rev(1, 3, "2020-01-03T00:00:00Z", "a"),
            rev(1, 4, "2020-01-04T00:00:00Z", "c"),
        ]
        .join("\n");
        let ds = read_corpus(one.as_bytes()).unwrap();
        let t = dataset_age_totals(&ds[0]);
        assert_eq!(t, AgeTotals { article_days: 10.0, article_revisions: 4, unique_users: 3 });

        let two = format!(
            "{one}\n{}",
            [
                meta(2),
                rev(2, 11, "2020-01-01T00:00:00Z", "d"),
                rev(2, 12, "2020-01-02T00:00:00Z", "e"),
                rev(2, 13, "2020-01-03T00:00:00Z", "d"),
                rev(2, 14, "2020-01-04T00:00:00Z", "f"),
            ]
            .join("\n")
        );
        let ds = read_corpus(two.as_bytes()).unwrap();
        let t = dataset_age_totals(&ds[0]);
        assert_eq!(t, AgeTotals { article_days: 20.0, article_revisions: 8, unique_users: 6 });
    }

    #[test]
    fn serialize_then_load_is_identity() {
        let text = [
            rev(1, 1, "2020-01-01T00:00:00Z", "a"),
            rev(2, 5, "2020-03-01T00:00:00Z", "b"),
            rev(1, 2, "2020-01-02T00:00:00Z", "c"),
        ]
        .join("\n");
        let ds = read_corpus(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_corpus(&ds, &mut buf).unwrap();
        assert_eq!(read_corpus(buf.as_slice()).unwrap(), ds);
    }
}
