//! Reliability ground truth and language tiers.
//!
//! Label files are CSV with a `domain,category` header. Leading `#` lines are
//! comments; one of them may carry the snapshot date as `# snapshot: DATE`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Tier;
use crate::extractor::Canonicalizer;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("unknown perennial category {0:?}")]
    UnknownCategory(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Reliable,
    Unreliable,
}

impl Label {
    /// Positive class is reliable.
    pub fn target(self) -> f64 {
        match self {
            Label::Reliable => 1.0,
            Label::Unreliable => 0.0,
        }
    }

    pub fn from_bool(reliable: bool) -> Self {
        if reliable {
            Label::Reliable
        } else {
            Label::Unreliable
        }
    }

    pub fn is_reliable(self) -> bool {
        self == Label::Reliable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Reliable,
    Unreliable,
    Excluded,
}

impl Verdict {
    pub fn label(self) -> Option<Label> {
        match self {
            Verdict::Reliable => Some(Label::Reliable),
            Verdict::Unreliable => Some(Label::Unreliable),
            Verdict::Excluded => None,
        }
    }
}

fn squash(category: &str) -> String {
    category.trim().to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn map_perennial(category: &str) -> Result<Verdict, LabelError> {
    match squash(category).as_str() {
        "generally reliable" => Ok(Verdict::Reliable),
        "blacklisted" | "deprecated" | "generally unreliable" => Ok(Verdict::Unreliable),
        "no consensus" => Ok(Verdict::Excluded),
        _ => Err(LabelError::UnknownCategory(category.to_string())),
    }
}

pub fn map_mbfc(credibility: &str) -> Verdict {
    match squash(credibility).as_str() {
        "very high" | "high" => Verdict::Reliable,
        "low" | "very low" => Verdict::Unreliable,
        _ => Verdict::Excluded,
    }
}

fn map_custom(category: &str) -> Verdict {
    match squash(category).as_str() {
        "reliable" | "1" => Verdict::Reliable,
        "unreliable" | "0" => Verdict::Unreliable,
        _ => Verdict::Excluded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Perennial,
    Mbfc,
    Custom,
}

impl LabelSource {
    pub fn map(self, category: &str) -> Result<Verdict, LabelError> {
        match self {
            LabelSource::Perennial => map_perennial(category),
            LabelSource::Mbfc => Ok(map_mbfc(category)),
            LabelSource::Custom => Ok(map_custom(category)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    pub source: LabelSource,
    pub snapshot_date: Option<String>,
    pub categories: BTreeMap<String, String>,
    pub labels: BTreeMap<String, Label>,
    pub excluded: BTreeSet<String>,
}

impl LabelSet {
    pub fn new(source: LabelSource) -> Self {
        LabelSet {
            source,
            snapshot_date: None,
            categories: BTreeMap::new(),
            labels: BTreeMap::new(),
            excluded: BTreeSet::new(),
        }
    }

    /// Adds one canonical domain. A domain seen twice with different binary
    /// outcomes becomes excluded.
    pub fn insert(&mut self, domain: String, category: &str) -> Result<(), LabelError> {
        let verdict = self.source.map(category)?;
        let previous = self.categories.insert(domain.clone(), category.trim().to_string());
        if previous.is_some() {
            let before = match self.labels.get(&domain) {
                Some(Label::Reliable) => Verdict::Reliable,
                Some(Label::Unreliable) => Verdict::Unreliable,
                None => Verdict::Excluded,
            };
            if before != verdict {
                self.labels.remove(&domain);
                self.excluded.insert(domain);
            }
            return Ok(());
        }
        match verdict.label() {
            Some(l) => {
                self.labels.insert(domain, l);
            }
            None => {
                self.excluded.insert(domain);
            }
        }
        Ok(())
    }

    pub fn get(&self, domain: &str) -> Option<Label> {
        self.labels.get(domain).copied()
    }

    pub fn parse(text: &str, source: LabelSource, canon: &Canonicalizer<'_>) -> Result<Self, LabelError> {
        let mut set = LabelSet::new(source);
        for line in text.lines() {
            let Some(comment) = line.trim_start().strip_prefix('#') else { break };
            if let Some(date) = comment.trim().strip_prefix("snapshot:") {
                set.snapshot_date = Some(date.trim().to_string());
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| malformed(1, e))?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (Some(dcol), Some(ccol)) = (col("domain"), col("category")) else {
            return Err(LabelError::Malformed {
                line: 1,
                message: "expected `domain,category` header".into(),
            });
        };
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                malformed(line, e)
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let raw = rec.get(dcol).unwrap_or("");
            let category = rec.get(ccol).unwrap_or("");
            let domain = canonical_label_domain(raw, canon).ok_or_else(|| LabelError::Malformed {
                line,
                message: format!("not a domain: {raw:?}"),
            })?;
            set.insert(domain, category).map_err(|e| match e {
                LabelError::UnknownCategory(c) => LabelError::Malformed {
                    line,
                    message: format!("unknown category {c:?}"),
                },
                other => other,
            })?;
        }
        Ok(set)
    }

    pub fn load(path: &Path, source: LabelSource, canon: &Canonicalizer<'_>) -> Result<Self, LabelError> {
        Self::parse(&std::fs::read_to_string(path)?, source, canon)
    }
}

fn malformed(line: usize, e: csv::Error) -> LabelError {
    LabelError::Malformed { line, message: e.to_string() }
}

/// Registrable domain for a label-file entry, which may be a bare host or
/// a full URL.
pub fn canonical_label_domain(raw: &str, canon: &Canonicalizer<'_>) -> Option<String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    let url = if raw.contains("://") { raw.to_string() } else { format!("https://{raw}") };
    let canonical = canon.canonical_url(&url).ok()?;
    let d = canon.domain(&canonical);
    (!d.is_empty()).then_some(d)
}

/// Anything that can list the domains it cites.
pub trait CitedDomains {
    fn cited_domains(&self) -> BTreeSet<&str>;
}

/// Reliable and unreliable counts among `domains`.
pub fn class_counts<'a, I: IntoIterator<Item = &'a str>>(domains: I, labels: &LabelSet) -> (usize, usize) {
    let mut counts = (0, 0);
    for d in domains {
        match labels.get(d) {
            Some(Label::Reliable) => counts.0 += 1,
            Some(Label::Unreliable) => counts.1 += 1,
            None => {}
        }
    }
    counts
}

/// Keeps datasets with at least `min_per_class` labeled domains of each class.
pub fn filter_datasets<T: CitedDomains>(datasets: Vec<T>, labels: &LabelSet, min_per_class: usize) -> Vec<T> {
    datasets
        .into_iter()
        .filter(|d| {
            let (rel, unr) = class_counts(d.cited_domains(), labels);
            rel >= min_per_class && unr >= min_per_class
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTier {
    pub lang: String,
    pub active_users: u64,
    pub tier: Tier,
}

/// Top 5% of languages by active users are high-resource, the next 25% mid,
/// the rest low. Group sizes round up; ties break by language code.
pub fn assign_tiers(counts: &BTreeMap<String, u64>) -> Vec<LanguageTier> {
    let mut langs: Vec<(&String, &u64)> = counts.iter().collect();
    langs.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let n = langs.len();
    let high = (5 * n).div_ceil(100);
    let mid = ((25 * n).div_ceil(100)).min(n - high);
    langs
        .into_iter()
        .enumerate()
        .map(|(rank, (lang, &active_users))| LanguageTier {
            lang: lang.clone(),
            active_users,
            tier: if rank < high {
                Tier::High
            } else if rank < high + mid {
                Tier::Mid
            } else {
                Tier::Low
            },
        })
        .collect()
}
