//! Naive replay oracle for timelines and features.
//!
//! Shares nothing with the library past URL canonicalization: runs are found
//! by scanning, presence is tracked step by step, permanence accumulates one
//! revision gap at a time, and every feature is recomputed from its
//! definition.

use std::collections::{BTreeMap, BTreeSet};

use wikicred::corpus::{Dataset, Payload};
use wikicred::extractor::{extract_urls, Canonicalizer};

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub index: usize,
    pub user: String,
    pub registered: bool,
    /// First add on the article (adds) or final remove (removes).
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTimeline {
    pub intervals: Vec<(usize, Option<usize>)>,
    pub perm_seconds: i64,
    pub perm_revisions: u64,
    pub age_seconds: i64,
    pub age_revisions: u64,
    pub present: bool,
    pub adds: Vec<Event>,
    pub removes: Vec<Event>,
}

pub struct OracleArticle {
    pub page_id: u64,
    pub merged_len: usize,
    pub age_seconds: i64,
    pub timelines: BTreeMap<String, OracleTimeline>,
}

struct Step {
    user: String,
    registered: bool,
    time: i64,
    domains: BTreeSet<String>,
}

fn domains_of(payload: &Payload, canon: &Canonicalizer<'_>) -> BTreeSet<String> {
    let raw: Vec<String> = match payload {
        Payload::Urls(u) => u.clone(),
        Payload::Wikitext(t) => extract_urls(t).into_iter().collect(),
    };
    raw.iter()
        .filter_map(|u| canon.canonical_url(u).ok())
        .map(|u| canon.domain(&u))
        .collect()
}

pub fn replay(d: &Dataset, canon: &Canonicalizer<'_>) -> Vec<OracleArticle> {
    let mut out = Vec::new();
    for a in &d.articles {
        let revs = &a.revisions;
        if revs.is_empty() {
            continue;
        }
        // a revision closes a run when the next one has another author
        let mut steps: Vec<Step> = Vec::new();
        for (i, r) in revs.iter().enumerate() {
            let last_of_run = i + 1 == revs.len() || revs[i + 1].user != r.user;
            if last_of_run {
                steps.push(Step {
                    user: r.user.clone(),
                    registered: r.registered,
                    time: r.timestamp.timestamp(),
                    domains: domains_of(&r.payload, canon),
                });
            }
        }
        let retrieved = a.meta.retrieved_at.timestamp();
        let n = steps.len();
        let all: BTreeSet<&String> = steps.iter().flat_map(|s| &s.domains).collect();
        let mut timelines = BTreeMap::new();
        for dom in all {
            let present: Vec<bool> = steps.iter().map(|s| s.domains.contains(dom)).collect();
            let mut t = OracleTimeline {
                intervals: vec![],
                perm_seconds: 0,
                perm_revisions: 0,
                age_seconds: 0,
                age_revisions: 0,
                present: present[n - 1],
                adds: vec![],
                removes: vec![],
            };
            let first = present.iter().position(|&p| p).unwrap();
            for i in 0..n {
                let next_time = if i + 1 < n { steps[i + 1].time } else { retrieved };
                if present[i] {
                    t.perm_revisions += 1;
                    t.perm_seconds += next_time - steps[i].time;
                }
                let before = i > 0 && present[i - 1];
                if present[i] && !before {
                    t.adds.push(Event {
                        index: i,
                        user: steps[i].user.clone(),
                        registered: steps[i].registered,
                        boundary: i == first,
                    });
                    t.intervals.push((i, None));
                }
                if !present[i] && before {
                    let later = present[i..].iter().any(|&p| p);
                    t.removes.push(Event {
                        index: i,
                        user: steps[i].user.clone(),
                        registered: steps[i].registered,
                        boundary: !later,
                    });
                    t.intervals.last_mut().unwrap().1 = Some(i);
                }
            }
            t.age_seconds = retrieved - steps[first].time;
            t.age_revisions = (n - first) as u64;
            timelines.insert(dom.clone(), t);
        }
        out.push(OracleArticle {
            page_id: a.meta.page_id,
            merged_len: n,
            // article age runs from the very first revision, merged or not
            age_seconds: retrieved - revs[0].timestamp.timestamp(),
            timelines,
        });
    }
    out
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Distinct users, distinct registered users, per-article user counts
/// summed, the same for registered users, event count, registered event
/// count, number of articles with at least one event.
fn user_stats(per_article: &[Vec<&Event>]) -> [f64; 7] {
    let mut users = BTreeSet::new();
    let mut reg = BTreeSet::new();
    let (mut pa_u, mut pa_r, mut ev, mut rev, mut arts) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for events in per_article {
        if events.is_empty() {
            continue;
        }
        arts += 1;
        let mut u = BTreeSet::new();
        let mut r = BTreeSet::new();
        for e in events {
            ev += 1;
            u.insert(&e.user);
            users.insert(&e.user);
            if e.registered {
                rev += 1;
                r.insert(&e.user);
                reg.insert(&e.user);
            }
        }
        pa_u += u.len();
        pa_r += r.len();
    }
    [users.len() as f64, reg.len() as f64, pa_u as f64, pa_r as f64, ev as f64, rev as f64, arts as f64]
}

fn user_features(adds: &[Vec<&Event>], rems: &[Vec<&Event>], dataset_users: f64) -> Vec<f64> {
    let a = user_stats(adds);
    let r = user_stats(rems);
    vec![
        a[0],
        r[0],
        a[1],
        r[1],
        div(a[0], dataset_users),
        div(r[0], dataset_users),
        div(a[1], dataset_users),
        div(r[1], dataset_users),
        div(a[2], a[6]),
        div(r[2], r[6]),
        div(a[3], a[6]),
        div(r[3], r[6]),
        div(a[1], a[0]),
        div(r[1], r[0]),
        div(a[5], a[4]),
        div(r[5], r[4]),
    ]
}

/// Catalog-ordered feature rows keyed by domain.
pub fn features(d: &Dataset, canon: &Canonicalizer<'_>) -> BTreeMap<String, Vec<f64>> {
    let arts = replay(d, canon);
    let day = 86400.0;
    let n_articles = d.articles.len() as f64;
    let article_days: f64 = arts.iter().map(|a| a.age_seconds as f64).sum::<f64>() / day;
    let article_revs: f64 = arts.iter().map(|a| a.merged_len as f64).sum();
    let users: BTreeSet<&str> = d.articles.iter().flat_map(|a| a.revisions.iter().map(|r| r.user.as_str())).collect();
    let dataset_users = users.len() as f64;

    let domains: BTreeSet<&String> = arts.iter().flat_map(|a| a.timelines.keys()).collect();
    let mut out = BTreeMap::new();
    for dom in domains {
        let ts: Vec<&OracleTimeline> = arts.iter().filter_map(|a| a.timelines.get(dom)).collect();
        let n = ts.len() as f64;
        let curr: Vec<&&OracleTimeline> = ts.iter().filter(|t| t.present).collect();
        let perm_d = ts.iter().map(|t| t.perm_seconds).sum::<i64>() as f64 / day;
        let perm_r = ts.iter().map(|t| t.perm_revisions).sum::<u64>() as f64;
        let age_d = ts.iter().map(|t| t.age_seconds).sum::<i64>() as f64 / day;
        let age_r = ts.iter().map(|t| t.age_revisions).sum::<u64>() as f64;
        let self_d: f64 = ts.iter().map(|t| div(t.perm_seconds as f64, t.age_seconds as f64)).sum();
        let self_r: f64 = ts.iter().map(|t| div(t.perm_revisions as f64, t.age_revisions as f64)).sum();
        let mut row = vec![
            n,
            n / n_articles,
            curr.len() as f64,
            curr.len() as f64 / n_articles,
            perm_d,
            perm_r,
            curr.iter().map(|t| t.perm_seconds).sum::<i64>() as f64 / day,
            curr.iter().map(|t| t.perm_revisions).sum::<u64>() as f64,
            div(perm_d, article_days),
            div(perm_r, article_revs),
            perm_d / n,
            perm_r / n,
            self_d / n,
            self_r / n,
            age_d,
            age_r,
            age_d / n,
            age_r / n,
        ];
        let adds: Vec<Vec<&Event>> = ts.iter().map(|t| t.adds.iter().collect()).collect();
        let rems: Vec<Vec<&Event>> = ts.iter().map(|t| t.removes.iter().collect()).collect();
        row.extend(user_features(&adds, &rems, dataset_users));
        let starts: Vec<Vec<&Event>> = ts.iter().map(|t| t.adds.iter().filter(|e| e.boundary).collect()).collect();
        let ends: Vec<Vec<&Event>> = ts.iter().map(|t| t.removes.iter().filter(|e| e.boundary).collect()).collect();
        row.extend(user_features(&starts, &ends, dataset_users));
        assert_eq!(row.len(), 50);
        out.insert(dom.clone(), row);
    }
    out
}

/// Relative difference, measured against max(|a|, |b|, 1e-300).
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}
