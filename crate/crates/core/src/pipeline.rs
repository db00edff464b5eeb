//! Corpus datasets prepared for feature computation: merged revisions,
//! source edits and timelines per article.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};

use crate::corpus::{AgeTotals, Dataset, DatasetKey, Tier, SECONDS_PER_DAY};
use crate::extractor::{diff_to_source_edits, merge_consecutive, Canonicalizer, MergedRevision, SourceEdit};
use crate::labels::CitedDomains;
use crate::timeline::{build_timeline, DomainTimeline, TimelineError};

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedArticle {
    pub page_id: u64,
    pub retrieved_at: DateTime<Utc>,
    pub merged: Vec<MergedRevision>,
    pub edits: Vec<SourceEdit>,
    pub timelines: BTreeMap<String, DomainTimeline>,
}

impl PreparedArticle {
    /// Diffs and builds timelines for an already merged history. Indices are
    /// rewritten to 0..n so subsampled histories stay consistent.
    pub fn from_merged(
        page_id: u64,
        retrieved_at: DateTime<Utc>,
        mut merged: Vec<MergedRevision>,
    ) -> Result<Self, TimelineError> {
        for (i, m) in merged.iter_mut().enumerate() {
            m.index = i;
        }
        let edits = diff_to_source_edits(page_id, &merged);
        let timelines = build_timeline(&merged, &edits, retrieved_at)?;
        Ok(PreparedArticle { page_id, retrieved_at, merged, edits, timelines })
    }

    pub fn age_seconds(&self) -> i64 {
        self.merged.first().map(|m| (self.retrieved_at - m.started_at).num_seconds()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset {
    pub key: DatasetKey,
    pub tier: Tier,
    pub articles: Vec<PreparedArticle>,
}

impl PreparedDataset {
    pub fn prepare(d: &Dataset, canon: &Canonicalizer<'_>) -> Result<Self, TimelineError> {
        let articles = d
            .articles
            .iter()
            .map(|a| {
                let merged = merge_consecutive(a, canon);
                PreparedArticle::from_merged(a.meta.page_id, a.meta.retrieved_at, merged)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PreparedDataset { key: d.key.clone(), tier: d.tier, articles })
    }

    /// Same quantities as [`crate::corpus::dataset_age_totals`], read from
    /// the merged histories.
    pub fn totals(&self) -> AgeTotals {
        let seconds: i64 = self.articles.iter().map(PreparedArticle::age_seconds).sum();
        let revisions = self.articles.iter().map(|a| a.merged.len() as u64).sum();
        let users: BTreeSet<&str> =
            self.articles.iter().flat_map(|a| a.merged.iter().map(|m| m.user.as_str())).collect();
        AgeTotals {
            article_days: seconds as f64 / SECONDS_PER_DAY,
            article_revisions: revisions,
            unique_users: users.len() as u64,
        }
    }

    pub fn merged_revision_count(&self) -> usize {
        self.articles.iter().map(|a| a.merged.len()).sum()
    }

    pub fn rejected_urls(&self) -> usize {
        self.articles.iter().flat_map(|a| &a.merged).map(|m| m.rejected_urls).sum()
    }

    pub fn edits(&self) -> impl Iterator<Item = &SourceEdit> {
        self.articles.iter().flat_map(|a| &a.edits)
    }
}

impl CitedDomains for PreparedDataset {
    fn cited_domains(&self) -> BTreeSet<&str> {
        self.articles.iter().flat_map(|a| a.timelines.keys().map(String::as_str)).collect()
    }
}

impl CitedDomains for crate::features::FeatureMatrix {
    fn cited_domains(&self) -> BTreeSet<&str> {
        self.domains.iter().map(String::as_str).collect()
    }
}
