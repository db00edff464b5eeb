//! Per (domain, article) presence timelines.
//!
//! Durations are kept in whole seconds so that sums over intervals are exact;
//! day-valued accessors divide by 86 400 at the end.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::corpus::SECONDS_PER_DAY;
use crate::extractor::{Action, MergedRevision, SourceEdit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("edit on {domain} references merged revision {index}, article has {len}")]
    UnknownRevision { domain: String, index: usize, len: usize },
    #[error("edits for {domain} do not alternate add/remove starting with add")]
    BrokenAlternation { domain: String },
}

/// Presence interval in merged-revision indices; `end` is the removing
/// revision, or `None` while the domain is still cited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: usize,
    pub end: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainTimeline {
    pub page_id: u64,
    pub domain: String,
    pub intervals: Vec<Interval>,
    pub permanence_seconds: i64,
    pub permanence_revisions: u64,
    pub age_seconds: i64,
    pub age_revisions: u64,
    pub currently_present: bool,
    pub adds: Vec<SourceEdit>,
    pub removes: Vec<SourceEdit>,
}

impl DomainTimeline {
    pub fn permanence_days(&self) -> f64 {
        self.permanence_seconds as f64 / SECONDS_PER_DAY
    }

    pub fn age_days(&self) -> f64 {
        self.age_seconds as f64 / SECONDS_PER_DAY
    }

    /// Share of the domain's age (in days) it spent cited; 0 when the age is 0.
    pub fn self_permanence_days(&self) -> f64 {
        if self.age_seconds > 0 {
            self.permanence_seconds as f64 / self.age_seconds as f64
        } else {
            0.0
        }
    }

    pub fn self_permanence_revisions(&self) -> f64 {
        if self.age_revisions > 0 {
            self.permanence_revisions as f64 / self.age_revisions as f64
        } else {
            0.0
        }
    }
}

/// Builds one timeline per domain cited at least once in the article.
///
/// Permanence in revisions counts the adding revision and excludes the
/// removing one; an open interval runs through the last merged revision.
/// Day-valued permanence of an open interval and all ages run to
/// `retrieved_at`.
pub fn build_timeline(
    merged: &[MergedRevision],
    edits: &[SourceEdit],
    retrieved_at: DateTime<Utc>,
) -> Result<BTreeMap<String, DomainTimeline>, TimelineError> {
    let n = merged.len();
    let mut by_domain: BTreeMap<&str, Vec<&SourceEdit>> = BTreeMap::new();
    for e in edits {
        if e.index >= n {
            return Err(TimelineError::UnknownRevision {
                domain: e.domain.clone(),
                index: e.index,
                len: n,
            });
        }
        by_domain.entry(&e.domain).or_default().push(e);
    }

    let mut out = BTreeMap::new();
    for (domain, mut events) in by_domain {
        events.sort_by_key(|e| e.index);
        let broken = || TimelineError::BrokenAlternation { domain: domain.to_string() };

        let mut intervals = Vec::new();
        let mut open: Option<usize> = None;
        for e in &events {
            match (e.action, open) {
                (Action::Add, None) => open = Some(e.index),
                (Action::Remove, Some(start)) if e.index > start => {
                    intervals.push(Interval { start, end: Some(e.index) });
                    open = None;
                }
                _ => return Err(broken()),
            }
        }
        if let Some(start) = open {
            intervals.push(Interval { start, end: None });
        }

        let mut permanence_seconds = 0i64;
        let mut permanence_revisions = 0u64;
        for iv in &intervals {
            let begin = merged[iv.start].timestamp;
            let (end_time, end_index) = match iv.end {
                Some(e) => (merged[e].timestamp, e),
                None => (retrieved_at, n),
            };
            permanence_seconds += (end_time - begin).num_seconds();
            permanence_revisions += (end_index - iv.start) as u64;
        }
        let first = intervals[0].start;
        let page_id = events[0].page_id;
        let (adds, removes): (Vec<SourceEdit>, Vec<SourceEdit>) =
            events.into_iter().cloned().partition(|e| e.action == Action::Add);

        out.insert(
            domain.to_string(),
            DomainTimeline {
                page_id,
                domain: domain.to_string(),
                currently_present: open.is_some(),
                intervals,
                permanence_seconds,
                permanence_revisions,
                age_seconds: (retrieved_at - merged[first].timestamp).num_seconds(),
                age_revisions: (n - first) as u64,
                adds,
                removes,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::timestamp;
    use crate::extractor::diff_to_source_edits;
    use std::collections::BTreeSet;

    fn day(d: i64) -> DateTime<Utc> {
        timestamp::parse("2020-01-01T00:00:00Z").unwrap() + chrono::Duration::days(d)
    }

    fn merged(days: &[i64], states: &[&[&str]]) -> Vec<MergedRevision> {
        days.iter()
            .zip(states)
            .enumerate()
            .map(|(i, (&d, s))| MergedRevision {
                index: i,
                user: format!("u{i}"),
                registered: true,
                timestamp: day(d),
                started_at: day(d),
                urls: BTreeSet::new(),
                domains: s.iter().map(|d| (d.to_string(), 1)).collect(),
                rejected_urls: 0,
            })
            .collect()
    }

    #[test]
    fn closed_interval() {
        let m = merged(&[0, 10, 30], &[&[], &["a.com"], &[]]);
        let e = diff_to_source_edits(1, &m);
        let t = &build_timeline(&m, &e, day(40)).unwrap()["a.com"];
        assert_eq!(t.permanence_days(), 20.0);
        assert_eq!(t.permanence_revisions, 1);
        assert_eq!(t.age_days(), 30.0);
        assert_eq!(t.age_revisions, 2);
        assert!(!t.currently_present);
    }

    #[test]
    fn open_interval_spans_age() {
        let m = merged(&[0, 10, 30], &[&["a.com"], &["a.com"], &["a.com"]]);
        let e = diff_to_source_edits(1, &m);
        let t = &build_timeline(&m, &e, day(40)).unwrap()["a.com"];
        assert_eq!(t.permanence_days(), 40.0);
        assert_eq!(t.age_days(), 40.0);
        assert_eq!(t.self_permanence_days(), 1.0);
        assert_eq!(t.permanence_revisions, 3);
        assert!(t.currently_present);
    }

    #[test]
    fn uncited_domain_absent() {
        let m = merged(&[0, 1], &[&["a.com"], &[]]);
        let e = diff_to_source_edits(1, &m);
        assert!(!build_timeline(&m, &e, day(2)).unwrap().contains_key("b.org"));
    }

    #[test]
    fn re_addition_sums_intervals() {
        let m = merged(&[0, 5, 7, 20, 22], &[&["a"], &[], &["a"], &[], &["a"]]);
        let e = diff_to_source_edits(1, &m);
        let t = &build_timeline(&m, &e, day(30)).unwrap()["a"];
        assert_eq!(t.intervals.len(), 3);
        assert_eq!(t.permanence_days(), 5.0 + 13.0 + 8.0);
        assert_eq!(t.permanence_revisions, 1 + 1 + 1);
        assert_eq!(t.age_revisions, 5);
        assert!(t.currently_present);
    }

    #[test]
    fn bad_index_rejected() {
        let m = merged(&[0], &[&["a"]]);
        let mut e = diff_to_source_edits(1, &m);
        e[0].index = 3;
        assert!(matches!(
            build_timeline(&m, &e, day(1)),
            Err(TimelineError::UnknownRevision { index: 3, .. })
        ));
    }
}
