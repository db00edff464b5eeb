//! From revision payloads to domain-level source edits.
//!
//! Each revision's payload becomes a set of canonical URLs and a per-domain
//! URL count. Consecutive revisions by the same user are collapsed into one
//! [`MergedRevision`], and adjacent merged revisions are diffed into
//! [`SourceEdit`] events whenever a domain's URL count crosses zero.

mod url;
mod wikitext;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleHistory, Payload};

pub use self::url::{
    extract_domain, normalize_url, RedirectMap, RedirectMapError, SuffixList, UrlRejection,
};
pub use self::wikitext::extract_urls;

/// Turns payloads into canonical URL and domain sets.
#[derive(Debug, Clone)]
pub struct Canonicalizer<'a> {
    pub redirects: RedirectMap,
    pub suffixes: &'a SuffixList,
}

impl Default for Canonicalizer<'static> {
    fn default() -> Self {
        Canonicalizer { redirects: RedirectMap::default(), suffixes: SuffixList::bundled() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CanonicalState {
    pub urls: BTreeSet<String>,
    /// domain -> number of distinct canonical URLs on it
    pub domains: BTreeMap<String, usize>,
    pub rejected: usize,
}

impl<'a> Canonicalizer<'a> {
    pub fn new(redirects: RedirectMap, suffixes: &'a SuffixList) -> Self {
        Canonicalizer { redirects, suffixes }
    }

    pub fn canonical_url(&self, raw: &str) -> Result<String, UrlRejection> {
        let map = (!self.redirects.is_empty()).then_some(&self.redirects);
        normalize_url(raw, map)
    }

    pub fn domain(&self, canonical: &str) -> String {
        extract_domain(canonical, self.suffixes)
    }

    pub fn state<'p, I: IntoIterator<Item = &'p str>>(&self, raw_urls: I) -> CanonicalState {
        let mut st = CanonicalState::default();
        for raw in raw_urls {
            match self.canonical_url(raw) {
                Ok(u) => {
                    st.urls.insert(u);
                }
                Err(_) => st.rejected += 1,
            }
        }
        for u in &st.urls {
            *st.domains.entry(self.domain(u)).or_insert(0) += 1;
        }
        st
    }

    pub fn payload_state(&self, payload: &Payload) -> CanonicalState {
        match payload {
            Payload::Urls(urls) => self.state(urls.iter().map(String::as_str)),
            Payload::Wikitext(text) => {
                let urls = extract_urls(text);
                self.state(urls.iter().map(String::as_str))
            }
        }
    }
}

/// A maximal run of one user's consecutive revisions, holding the run's
/// final citation state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedRevision {
    pub index: usize,
    pub user: String,
    pub registered: bool,
    /// Timestamp of the last revision in the run.
    pub timestamp: DateTime<Utc>,
    /// Timestamp of the first revision in the run.
    pub started_at: DateTime<Utc>,
    pub urls: BTreeSet<String>,
    pub domains: BTreeMap<String, usize>,
    pub rejected_urls: usize,
}

pub fn merge_consecutive(article: &ArticleHistory, canon: &Canonicalizer<'_>) -> Vec<MergedRevision> {
    let mut out: Vec<MergedRevision> = Vec::new();
    let revs = &article.revisions;
    let mut start = 0;
    while start < revs.len() {
        let mut end = start;
        while end + 1 < revs.len() && revs[end + 1].user == revs[start].user {
            end += 1;
        }
        let last = &revs[end];
        let st = canon.payload_state(&last.payload);
        out.push(MergedRevision {
            index: out.len(),
            user: last.user.clone(),
            registered: last.registered,
            timestamp: last.timestamp,
            started_at: revs[start].timestamp,
            urls: st.urls,
            domains: st.domains,
            rejected_urls: st.rejected,
        });
        start = end + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEdit {
    pub page_id: u64,
    pub domain: String,
    pub action: Action,
    pub index: usize,
    pub timestamp: DateTime<Utc>,
    pub user: String,
    pub registered: bool,
    pub first_add: bool,
    pub last_remove: bool,
}

/// Domain presence transitions between adjacent merged revisions; the first
/// revision is compared with an empty page. Output is ordered by revision
/// index, then domain.
pub fn diff_to_source_edits(page_id: u64, merged: &[MergedRevision]) -> Vec<SourceEdit> {
    let empty: BTreeMap<String, usize> = BTreeMap::new();
    let mut edits = Vec::new();
    let mut prev = &empty;
    for rev in merged {
        let event = |domain: &str, action| SourceEdit {
            page_id,
            domain: domain.to_string(),
            action,
            index: rev.index,
            timestamp: rev.timestamp,
            user: rev.user.clone(),
            registered: rev.registered,
            first_add: false,
            last_remove: false,
        };
        let mut step: Vec<SourceEdit> = Vec::new();
        for (d, &n) in &rev.domains {
            if n > 0 && prev.get(d).copied().unwrap_or(0) == 0 {
                step.push(event(d, Action::Add));
            }
        }
        for (d, &n) in prev {
            if n > 0 && rev.domains.get(d).copied().unwrap_or(0) == 0 {
                step.push(event(d, Action::Remove));
            }
        }
        step.sort_by(|a, b| a.domain.cmp(&b.domain));
        edits.extend(step);
        prev = &rev.domains;
    }

    let mut seen_add: BTreeSet<&str> = BTreeSet::new();
    let mut first = vec![false; edits.len()];
    let mut last_removal: BTreeMap<&str, Option<usize>> = BTreeMap::new();
    for (i, e) in edits.iter().enumerate() {
        match e.action {
            Action::Add => {
                first[i] = seen_add.insert(&e.domain);
                last_removal.insert(&e.domain, None);
            }
            Action::Remove => {
                last_removal.insert(&e.domain, Some(i));
            }
        }
    }
    let last: BTreeSet<usize> = last_removal.values().filter_map(|v| *v).collect();
    for (i, e) in edits.iter_mut().enumerate() {
        e.first_add = first[i];
        e.last_remove = last.contains(&i);
    }
    edits
}
