//! Seeded generators for synthetic corpora, matrices and ensembles, used by
//! tests and simulations.

use chrono::{DateTime, Duration, Utc};
use rand::Rng;

use crate::boost::{Node, StumpEnsemble, Tree};
use crate::corpus::{ArticleHistory, Dataset, DatasetKey, PageMeta, Payload, RevisionRecord, Tier};
use crate::features::{fingerprint, FeatureMatrix};
use crate::labels::{Label, LabelSet, LabelSource};

const REGISTERED: [&str; 4] = ["Alice", "Bob", "Carol", "Dmitri"];
const ANONYMOUS: [&str; 3] = ["192.0.2.1", "192.0.2.77", "2001:db8::5"];

fn epoch() -> DateTime<Utc> {
    crate::corpus::timestamp::parse("2015-01-01T00:00:00Z").expect("valid")
}

fn pick_user<R: Rng>(rng: &mut R, anonymous_share: f64) -> (String, bool) {
    if rng.random_bool(anonymous_share) {
        (ANONYMOUS[rng.random_range(0..ANONYMOUS.len())].to_string(), false)
    } else {
        (REGISTERED[rng.random_range(0..REGISTERED.len())].to_string(), true)
    }
}

/// Size limits for [`random_dataset`].
#[derive(Debug, Clone, Copy)]
pub struct CorpusShape {
    pub max_articles: usize,
    pub max_revisions: usize,
    pub max_domains: usize,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape { max_articles: 8, max_revisions: 30, max_domains: 6 }
    }
}

/// A small dataset with URL payloads. Articles see consecutive runs by the
/// same user, equal timestamps, several URLs per domain, `www.` and
/// upper-case host variants, removals and re-additions.
pub fn random_dataset<R: Rng>(rng: &mut R, shape: CorpusShape) -> Dataset {
    let key = DatasetKey::new("synthetic", "xx");
    let n_domains = rng.random_range(1..=shape.max_domains);
    let n_articles = rng.random_range(1..=shape.max_articles);
    let mut articles = Vec::with_capacity(n_articles);
    let mut rev_id = 1000;
    for a in 0..n_articles {
        let page_id = 10 + a as u64;
        let title = format!("Article {a}");
        let n_revs = rng.random_range(1..=shape.max_revisions);
        let mut t = epoch() + Duration::seconds(rng.random_range(0..86_400 * 30));
        let mut urls: Vec<String> = Vec::new();
        let mut revisions = Vec::with_capacity(n_revs);
        let mut user = pick_user(rng, 0.3);
        let mut parent = None;
        for _ in 0..n_revs {
            if rng.random_bool(0.6) {
                user = pick_user(rng, 0.3);
            }
            // zero gaps happen: equal timestamps are ordered by revision id
            if rng.random_bool(0.85) {
                t += Duration::seconds(rng.random_range(1..86_400 * 20));
            }
            match rng.random_range(0..10) {
                0..=3 => {
                    let d = rng.random_range(0..n_domains);
                    let host = match rng.random_range(0..4) {
                        0 => format!("www.d{d}.org"),
                        1 => format!("D{d}.ORG"),
                        _ => format!("d{d}.org"),
                    };
                    let u = format!("https://{host}/p{}", rng.random_range(0..3));
                    if !urls.contains(&u) {
                        urls.push(u);
                    }
                }
                4..=6 if !urls.is_empty() => {
                    urls.remove(rng.random_range(0..urls.len()));
                }
                7 if rng.random_bool(0.3) => urls.clear(),
                _ => {}
            }
            rev_id += rng.random_range(1..5);
            revisions.push(RevisionRecord {
                lang: key.lang.clone(),
                topic: key.topic.clone(),
                page_id,
                title: title.clone(),
                rev_id,
                parent_id: parent,
                timestamp: t,
                user: user.0.clone(),
                registered: user.1,
                payload: Payload::Urls(urls.clone()),
            });
            parent = Some(rev_id);
        }
        let retrieved_at = t + Duration::seconds(rng.random_range(0..86_400 * 60));
        articles.push(ArticleHistory {
            meta: PageMeta { lang: key.lang.clone(), topic: key.topic.clone(), page_id, title, retrieved_at },
            revisions,
        });
    }
    Dataset { key, articles, tier: Tier::Unassigned }
}

/// A dataset in which reliable domains tend to stay cited and unreliable
/// ones tend to be removed soon after being added. The rule does not change
/// over time. Domains are
/// `rel{k}.com` and `unrel{k}.net`, labeled through the returned set.
pub fn signal_corpus<R: Rng>(
    rng: &mut R,
    key: DatasetKey,
    n_articles: usize,
    revisions_per_article: usize,
    domains_per_class: usize,
) -> (Dataset, LabelSet) {
    let mut labels = LabelSet::new(LabelSource::Perennial);
    for k in 0..domains_per_class {
        labels.insert(format!("rel{k}.com"), "generally reliable").expect("known category");
        labels.insert(format!("unrel{k}.net"), "generally unreliable").expect("known category");
    }
    let mut articles = Vec::with_capacity(n_articles);
    let mut rev_id = 1;
    for a in 0..n_articles {
        let page_id = 1 + a as u64;
        let title = format!("Topic page {a}");
        let mut t = epoch() + Duration::seconds(rng.random_range(0..86_400 * 365));
        let mut urls: Vec<(String, bool)> = Vec::new();
        let mut revisions = Vec::new();
        let mut parent = None;
        for _ in 0..revisions_per_article {
            let user = pick_user(rng, 0.35);
            t += Duration::seconds(rng.random_range(3_600..86_400 * 10));
            urls.retain(|(_, reliable)| rng.random_bool(if *reliable { 0.97 } else { 0.6 }));
            if rng.random_bool(0.5) {
                let reliable = rng.random_bool(0.5);
                let k = rng.random_range(0..domains_per_class);
                let u = if reliable {
                    format!("https://rel{k}.com/a{}", rng.random_range(0..5))
                } else {
                    format!("http://unrel{k}.net/s{}", rng.random_range(0..5))
                };
                if !urls.iter().any(|(x, _)| *x == u) {
                    urls.push((u, reliable));
                }
            }
            revisions.push(RevisionRecord {
                lang: key.lang.clone(),
                topic: key.topic.clone(),
                page_id,
                title: title.clone(),
                rev_id,
                parent_id: parent,
                timestamp: t,
                user: user.0,
                registered: user.1,
                payload: Payload::Urls(urls.iter().map(|(u, _)| u.clone()).collect()),
            });
            parent = Some(rev_id);
            rev_id += 1;
        }
        articles.push(ArticleHistory {
            meta: PageMeta {
                lang: key.lang.clone(),
                topic: key.topic.clone(),
                page_id,
                title,
                retrieved_at: t + Duration::days(1),
            },
            revisions,
        });
    }
    (Dataset { key, articles, tier: Tier::Unassigned }, labels)
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("x{j}")).collect()
}

/// Integer-valued features in 0..levels (so ties are common) with random
/// labels; both classes always present.
pub fn random_matrix<R: Rng>(rng: &mut R, n_rows: usize, n_cols: usize, levels: u32) -> FeatureMatrix {
    assert!(n_rows >= 2);
    let mut m = FeatureMatrix::new(DatasetKey::new("random", "xx"), ids(n_cols));
    for i in 0..n_rows {
        let row: Vec<f64> = (0..n_cols).map(|_| rng.random_range(0..levels) as f64).collect();
        let label = match i {
            0 => Label::Reliable,
            1 => Label::Unreliable,
            _ => Label::from_bool(rng.random_bool(0.5)),
        };
        m.push_row(format!("r{i}.org"), &row, Some(label));
    }
    m
}

/// Rows uniform in [-1, 1]^n_cols labeled by the sign of a random linear
/// score, keeping only rows at least `gap` away from the boundary.
pub fn separable_matrix<R: Rng>(rng: &mut R, n_rows: usize, n_cols: usize, gap: f64) -> FeatureMatrix {
    let w: Vec<f64> = (0..n_cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = FeatureMatrix::new(DatasetKey::new("separable", "xx"), ids(n_cols));
    while m.n_rows() < n_rows {
        let row: Vec<f64> = (0..n_cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let score: f64 = row.iter().zip(&w).map(|(x, w)| x * w).sum();
        if score.abs() >= gap {
            let i = m.n_rows();
            m.push_row(format!("s{i}.org"), &row, Some(Label::from_bool(score > 0.0)));
        }
    }
    m
}

/// Two languages over the same domains and labels. Each feature is a noisy
/// shift of the label, drawn independently per language; the second
/// language then passes every column through its own strictly increasing
/// distortion that moves its unreliable rows onto the first language's
/// reliable range.
pub fn language_pair<R: Rng>(rng: &mut R, n_domains: usize, n_cols: usize) -> (FeatureMatrix, FeatureMatrix) {
    let labels: Vec<bool> = (0..n_domains).map(|i| i % 2 == 0).collect();
    let draw = |lang: &str, distort: bool, rng: &mut R| {
        let mut m = FeatureMatrix::new(DatasetKey::new("paired", lang), ids(n_cols));
        for (i, &y) in labels.iter().enumerate() {
            let row: Vec<f64> = (0..n_cols)
                .map(|j| {
                    let x = if y { 1.5 } else { 0.0 } + normal(rng);
                    if distort {
                        // increasing in x for every column
                        1.5 + x + 0.2 * j as f64 * x * x * x
                    } else {
                        x
                    }
                })
                .collect();
            m.push_row(format!("p{i}.org"), &row, Some(Label::from_bool(y)));
        }
        m
    };
    let a = draw("aa", false, rng);
    let b = draw("bb", true, rng);
    (a, b)
}

/// Standard normal draw (Box-Muller).
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
}

/// An ensemble of random full trees of the given depth over `n_cols`
/// features, with thresholds and leaves drawn uniformly.
pub fn random_ensemble<R: Rng>(rng: &mut R, n_cols: usize, n_trees: usize, depth: usize) -> StumpEnsemble {
    fn build<R: Rng>(rng: &mut R, nodes: &mut Vec<Node>, n_cols: usize, depth: usize) -> usize {
        let id = nodes.len();
        if depth == 0 {
            nodes.push(Node::Leaf { value: rng.random_range(-1.0..1.0) });
            return id;
        }
        nodes.push(Node::Leaf { value: 0.0 });
        let feature = rng.random_range(0..n_cols);
        let threshold = rng.random_range(-1.0..1.0);
        let left = build(rng, nodes, n_cols, depth - 1);
        let right = build(rng, nodes, n_cols, depth - 1);
        nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
    let trees = (0..n_trees)
        .map(|_| {
            let mut nodes = Vec::new();
            build(rng, &mut nodes, n_cols, depth);
            Tree { nodes }
        })
        .collect();
    StumpEnsemble {
        trees,
        ..StumpEnsemble::constant(fingerprint(&ids(n_cols)), n_cols, rng.random_range(-0.5..0.5))
    }
}

/// Unlabeled rows uniform in [-1, 1]^n_cols, column ids matching
/// [`random_ensemble`].
pub fn uniform_rows<R: Rng>(rng: &mut R, n_rows: usize, n_cols: usize) -> FeatureMatrix {
    let mut m = FeatureMatrix::new(DatasetKey::new("uniform", "xx"), ids(n_cols));
    for i in 0..n_rows {
        let row: Vec<f64> = (0..n_cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        m.push_row(format!("u{i}.org"), &row, None);
    }
    m
}
