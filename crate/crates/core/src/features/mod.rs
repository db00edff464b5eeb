//! Per-domain feature catalog over one dataset.
//!
//! Every aggregate over articles is an arithmetic mean. Ratios and
//! probabilities whose denominator is zero are reported as 0. Per-article
//! user averages only cover articles where the domain has at least one event
//! of the kind being counted.

mod catalog;
mod matrix;
mod quantile;

use std::collections::{BTreeMap, BTreeSet};

pub use catalog::{
    catalog, catalog_ids, descriptor, fingerprint, EventScope, Family, FeatureDescriptor,
    Normalization, Unit, CATALOG_LEN,
};
pub use matrix::{format_g17, FeatureMatrix, MatrixError};
pub use quantile::{average_ranks, quantile_normalize};

use crate::extractor::SourceEdit;
use crate::pipeline::PreparedDataset;
use crate::timeline::DomainTimeline;

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Sums in ascending order so the result does not depend on article order.
fn ordered_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// The 16 user features for one pair of event kinds (added/removed, or
/// started/ended), in catalog order.
fn user_block<'a, F, G>(
    timelines: &[&'a DomainTimeline],
    first_kind: F,
    second_kind: G,
    dataset_users: f64,
) -> [f64; 16]
where
    F: Fn(&'a DomainTimeline) -> Vec<&'a SourceEdit>,
    G: Fn(&'a DomainTimeline) -> Vec<&'a SourceEdit>,
{
    struct Kind {
        users: BTreeSet<String>,
        registered: BTreeSet<String>,
        events: usize,
        registered_events: usize,
        articles: usize,
        per_article_users: usize,
        per_article_registered: usize,
    }

    let tally = |select: &dyn Fn(&'a DomainTimeline) -> Vec<&'a SourceEdit>| {
        let mut k = Kind {
            users: BTreeSet::new(),
            registered: BTreeSet::new(),
            events: 0,
            registered_events: 0,
            articles: 0,
            per_article_users: 0,
            per_article_registered: 0,
        };
        for t in timelines {
            let events = select(t);
            if events.is_empty() {
                continue;
            }
            k.articles += 1;
            let mut users = BTreeSet::new();
            let mut registered = BTreeSet::new();
            for e in events {
                k.events += 1;
                users.insert(e.user.as_str());
                if e.registered {
                    k.registered_events += 1;
                    registered.insert(e.user.as_str());
                }
            }
            k.per_article_users += users.len();
            k.per_article_registered += registered.len();
            k.users.extend(users.into_iter().map(str::to_string));
            k.registered.extend(registered.into_iter().map(str::to_string));
        }
        k
    };
    let a = tally(&first_kind);
    let r = tally(&second_kind);
    let (ua, ur) = (a.users.len() as f64, r.users.len() as f64);
    let (ra, rr) = (a.registered.len() as f64, r.registered.len() as f64);
    [
        ua,
        ur,
        ra,
        rr,
        ratio(ua, dataset_users),
        ratio(ur, dataset_users),
        ratio(ra, dataset_users),
        ratio(rr, dataset_users),
        ratio(a.per_article_users as f64, a.articles as f64),
        ratio(r.per_article_users as f64, r.articles as f64),
        ratio(a.per_article_registered as f64, a.articles as f64),
        ratio(r.per_article_registered as f64, r.articles as f64),
        ratio(ra, ua),
        ratio(rr, ur),
        ratio(a.registered_events as f64, a.events as f64),
        ratio(r.registered_events as f64, r.events as f64),
    ]
}

/// Catalog values for one domain given its timelines across the dataset.
pub fn domain_features(
    timelines: &[&DomainTimeline],
    n_articles_total: usize,
    article_days_total: f64,
    article_revisions_total: f64,
    dataset_users: f64,
) -> Vec<f64> {
    let n = timelines.len() as f64;
    let curr: Vec<&&DomainTimeline> = timelines.iter().filter(|t| t.currently_present).collect();
    let total_articles = n_articles_total as f64;

    // integer accumulation keeps sums independent of iteration order
    let perm_s: i64 = timelines.iter().map(|t| t.permanence_seconds).sum();
    let perm_r: u64 = timelines.iter().map(|t| t.permanence_revisions).sum();
    let curr_perm_s: i64 = curr.iter().map(|t| t.permanence_seconds).sum();
    let curr_perm_r: u64 = curr.iter().map(|t| t.permanence_revisions).sum();
    let age_s: i64 = timelines.iter().map(|t| t.age_seconds).sum();
    let age_r: u64 = timelines.iter().map(|t| t.age_revisions).sum();
    let days = |s: i64| s as f64 / crate::corpus::SECONDS_PER_DAY;
    let mean_self_d = ratio(ordered_sum(timelines.iter().map(|t| t.self_permanence_days())), n);
    let mean_self_r = ratio(ordered_sum(timelines.iter().map(|t| t.self_permanence_revisions())), n);

    let mut out = vec![
        n,
        ratio(n, total_articles),
        curr.len() as f64,
        ratio(curr.len() as f64, total_articles),
        days(perm_s),
        perm_r as f64,
        days(curr_perm_s),
        curr_perm_r as f64,
        ratio(days(perm_s), article_days_total),
        ratio(perm_r as f64, article_revisions_total),
        ratio(days(perm_s), n),
        ratio(perm_r as f64, n),
        mean_self_d,
        mean_self_r,
        days(age_s),
        age_r as f64,
        ratio(days(age_s), n),
        ratio(age_r as f64, n),
    ];
    out.extend(user_block(
        timelines,
        |t| t.adds.iter().collect(),
        |t| t.removes.iter().collect(),
        dataset_users,
    ));
    out.extend(user_block(
        timelines,
        |t| t.adds.iter().filter(|e| e.first_add).collect(),
        |t| t.removes.iter().filter(|e| e.last_remove).collect(),
        dataset_users,
    ));
    debug_assert_eq!(out.len(), CATALOG_LEN);
    out
}

/// One row per domain cited anywhere in the dataset, sorted by domain, in
/// catalog column order. Rows are unlabeled.
pub fn compute_features(d: &PreparedDataset) -> FeatureMatrix {
    let totals = d.totals();
    let mut by_domain: BTreeMap<&str, Vec<&DomainTimeline>> = BTreeMap::new();
    for a in &d.articles {
        for (domain, t) in &a.timelines {
            by_domain.entry(domain).or_default().push(t);
        }
    }
    let mut m = FeatureMatrix::new(d.key.clone(), catalog_ids());
    for (domain, timelines) in by_domain {
        let row = domain_features(
            &timelines,
            d.articles.len(),
            totals.article_days,
            totals.article_revisions as f64,
            totals.unique_users as f64,
        );
        m.push_row(domain.to_string(), &row, None);
    }
    m
}
