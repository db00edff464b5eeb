//! Module invariants as property tests over seeded synthetic inputs.

use std::collections::BTreeMap;

use proptest::prelude::*;
use wikicred::boost::{train, train_traced, Explainer, TrainConfig};
use wikicred::corpus::{dataset_age_totals, read_corpus, write_corpus, Dataset};
use wikicred::eval::{bootstrap_metrics, loo_validate, random_baseline, seeded_rng};
use wikicred::extractor::{Action, Canonicalizer};
use wikicred::features::{compute_features, descriptor, quantile_normalize, FeatureMatrix, Unit};
use wikicred::labels::{assign_tiers, filter_datasets, Label, LabelSet, LabelSource};
use wikicred::pipeline::PreparedDataset;
use wikicred::synth::{self, CorpusShape};

fn dataset(seed: u64) -> Dataset {
    synth::random_dataset(&mut seeded_rng(seed), CorpusShape::default())
}

fn prepared(seed: u64) -> PreparedDataset {
    PreparedDataset::prepare(&dataset(seed), &Canonicalizer::default()).unwrap()
}

proptest! {
    #[test]
    fn corpus_round_trips(seed in any::<u64>()) {
        let d = dataset(seed);
        let mut buf = Vec::new();
        write_corpus(std::slice::from_ref(&d), &mut buf).unwrap();
        let back = read_corpus(buf.as_slice()).unwrap();
        prop_assert_eq!(back, vec![d]);
    }

    #[test]
    fn age_totals_are_additive(seed in any::<u64>(), cut in 0usize..8) {
        let d = dataset(seed);
        let cut = cut.min(d.articles.len());
        let part = |arts: &[wikicred::corpus::ArticleHistory]| Dataset { articles: arts.to_vec(), ..d.clone() };
        let (a, b) = (part(&d.articles[..cut]), part(&d.articles[cut..]));
        let (ta, tb, t) = (dataset_age_totals(&a), dataset_age_totals(&b), dataset_age_totals(&d));
        // article pages are disjoint, but user names are shared across them
        prop_assert_eq!(t.article_revisions, ta.article_revisions + tb.article_revisions);
        prop_assert!((t.article_days - (ta.article_days + tb.article_days)).abs() <= 1e-9 * t.article_days.max(1.0));
        prop_assert!(t.unique_users <= ta.unique_users + tb.unique_users);
    }

    #[test]
    fn events_alternate_and_match_presence(seed in any::<u64>()) {
        let p = prepared(seed);
        let mut adds_by_domain = 0;
        for a in &p.articles {
            for (dom, t) in &a.timelines {
                let diff = t.adds.len() as i64 - t.removes.len() as i64;
                prop_assert!(diff == 0 || diff == 1);
                prop_assert_eq!(t.currently_present, diff == 1);
                prop_assert_eq!(t.currently_present, t.intervals.last().unwrap().end.is_none());
                prop_assert_eq!(t.adds.iter().filter(|e| e.first_add).count(), 1);
                prop_assert_eq!(t.removes.iter().filter(|e| e.last_remove).count(), usize::from(!t.currently_present));
                prop_assert!(t.permanence_seconds <= t.age_seconds);
                prop_assert!(t.permanence_revisions <= t.age_revisions);
                for s in [t.self_permanence_days(), t.self_permanence_revisions()] {
                    prop_assert!((0.0..=1.0).contains(&s), "{} self-permanence {}", dom, s);
                }
                adds_by_domain += t.adds.len();
            }
        }
        prop_assert_eq!(adds_by_domain, p.edits().filter(|e| e.action == Action::Add).count());
    }

    #[test]
    fn feature_ranges(seed in any::<u64>()) {
        let m = compute_features(&prepared(seed));
        let col = |id: &str| m.feature_ids.iter().position(|f| f == id).unwrap();
        for i in 0..m.n_rows() {
            for (j, id) in m.feature_ids.iter().enumerate() {
                let v = m.get(i, j);
                let d = descriptor(id).unwrap();
                prop_assert!(v.is_finite() && v >= 0.0);
                if d.unit == Unit::Ratio {
                    prop_assert!(v <= 1.0, "{} = {}", id, v);
                }
                if d.unit == Unit::Count && id.starts_with(['n', 'c', 'u', 'r']) && !id.starts_with("ratio") {
                    prop_assert_eq!(v.fract(), 0.0, "{} = {}", id, v);
                }
            }
            let le = |a: &str, b: &str| m.get(i, col(a)) <= m.get(i, col(b));
            prop_assert!(le("curr_n_articles", "n_articles"));
            prop_assert!(le("sum_curr_perm_days", "sum_perm_days"));
            prop_assert!(le("sum_curr_perm_revs", "sum_perm_revs"));
            for k in ["add", "rem", "start", "end"] {
                let ok = le(&format!("r_{k}"), &format!("u_{k}"));
                prop_assert!(ok, "r_{} exceeds u_{}", k, k);
            }
        }
    }

    #[test]
    fn features_ignore_article_order(seed in any::<u64>()) {
        let mut d = dataset(seed);
        let canon = Canonicalizer::default();
        let a = compute_features(&PreparedDataset::prepare(&d, &canon).unwrap());
        d.articles.reverse();
        let b = compute_features(&PreparedDataset::prepare(&d, &canon).unwrap());
        prop_assert_eq!(a.domains, b.domains);
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn domains_are_bare_hosts(
        scheme in prop::sample::select(vec!["http", "https", "HTTP", "Https"]),
        host in "[A-Za-z0-9]{1,8}(\\.[A-Za-z0-9]{1,8}){0,3}\\.(com|org|co\\.uk|de)",
        www in any::<bool>(),
        port in prop::option::of(1u16..65535),
        path in "(/[a-zA-Z0-9%._~-]{0,6}){0,3}",
    ) {
        let url = format!(
            "{scheme}://{}{host}{}{path}#frag",
            if www { "www." } else { "" },
            port.map(|p| format!(":{p}")).unwrap_or_default()
        );
        let canon = Canonicalizer::default();
        let c = canon.canonical_url(&url).unwrap();
        let d = canon.domain(&c);
        prop_assert!(!d.is_empty());
        prop_assert!(!d.contains(['/', ':', '#']), "{}", d);
        prop_assert_eq!(d.to_lowercase(), d.clone());
    }

    #[test]
    fn labels_partition_domains(cats in prop::collection::vec(0usize..5, 1..30)) {
        const CATEGORIES: [&str; 5] =
            ["generally reliable", "generally unreliable", "deprecated", "blacklisted", "no consensus"];
        let mut text = String::from("domain,category\n");
        for (i, c) in cats.iter().enumerate() {
            text.push_str(&format!("site{i}.org,{}\n", CATEGORIES[*c]));
        }
        let set = LabelSet::parse(&text, LabelSource::Perennial, &Canonicalizer::default()).unwrap();
        for (i, c) in cats.iter().enumerate() {
            let want = match c {
                0 => Some(Label::Reliable),
                4 => None,
                _ => Some(Label::Unreliable),
            };
            prop_assert_eq!(set.get(&format!("site{i}.org")), want);
        }
    }

    #[test]
    fn filtering_and_tiers(seeds in prop::collection::vec(any::<u64>(), 0..6), min in 0usize..3, counts in prop::collection::btree_map("[a-z]{2,3}", 0u64..10_000, 0..60)) {
        let text = "domain,category\nd0.org,generally reliable\nd1.org,generally reliable\nd2.org,deprecated\nd3.org,generally unreliable\n";
        let labels = LabelSet::parse(text, LabelSource::Perennial, &Canonicalizer::default()).unwrap();
        let sets: Vec<PreparedDataset> = seeds.iter().map(|&s| prepared(s)).collect();
        let n = sets.len();
        prop_assert!(filter_datasets(sets, &labels, min).len() <= n);
        let tiers = assign_tiers(&counts);
        let langs: BTreeMap<&str, u64> = tiers.iter().map(|t| (t.lang.as_str(), t.active_users)).collect();
        prop_assert_eq!(tiers.len(), counts.len());
        prop_assert_eq!(langs.len(), counts.len());
        for (l, c) in &counts {
            prop_assert_eq!(langs[l.as_str()], *c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn training_is_deterministic_and_descends(seed in any::<u64>(), depth in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let m = synth::random_matrix(&mut rng, 30, 3, 6);
        let cfg = TrainConfig { max_depth: depth, rounds: 30, ..TrainConfig::default() };
        let all: Vec<usize> = (0..m.n_rows()).collect();
        let (a, trace) = train_traced(&m, &all, &cfg).unwrap();
        prop_assert_eq!(a.to_json(), train(&m, &cfg).unwrap().to_json());
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn informative_feature_gets_positive_attribution(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let mut m = synth::random_matrix(&mut rng, 40, 3, 5);
        // column 0 rises with the label by construction
        for i in 0..m.n_rows() {
            let shift = if m.labels[i] == Some(Label::Reliable) { 3.0 } else { 0.0 };
            m.row_mut(i)[0] += shift;
        }
        let model = train(&m, &TrainConfig::default()).unwrap();
        let ex = Explainer::new(&model, &m).unwrap();
        let reliable: Vec<usize> = (0..m.n_rows()).filter(|&i| m.labels[i] == Some(Label::Reliable)).collect();
        let mean = reliable.iter().map(|&i| ex.attribute(m.row(i)).unwrap().contributions[0]).sum::<f64>()
            / reliable.len() as f64;
        prop_assert!(mean >= 0.0, "mean attribution {}", mean);
    }

    #[test]
    fn loo_predicts_each_labeled_domain_once(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let mut m = synth::random_matrix(&mut rng, 16, 2, 4);
        m.labels[5] = None;
        let cfg = TrainConfig { rounds: 10, ..TrainConfig::default() };
        let p = loo_validate(&m, &cfg).unwrap();
        let mut got: Vec<&str> = p.predictions.iter().map(|x| x.domain.as_str()).collect();
        got.sort_unstable();
        let mut want: Vec<&str> = m.labeled_rows().into_iter().map(|r| m.domains[r].as_str()).collect();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn resampling_is_reproducible(seed in any::<u64>(), n in 2usize..50) {
        let mut rng = seeded_rng(seed);
        let m = synth::random_matrix(&mut rng, n, 1, 2);
        let labels: Vec<Label> = m.labels.iter().flatten().copied().collect();
        let pairs: Vec<(Label, Label)> = labels.iter().zip(labels.iter().rev()).map(|(a, b)| (*a, *b)).collect();
        prop_assert_eq!(bootstrap_metrics(&pairs, 30, seed), bootstrap_metrics(&pairs, 30, seed));
        prop_assert_eq!(random_baseline(&labels, 30, seed, true), random_baseline(&labels, 30, seed, true));
    }

    #[test]
    fn quantile_then_stumps_is_transform_proof(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let m = synth::random_matrix(&mut rng, 30, 3, 8);
        let mut t: FeatureMatrix = m.clone();
        for j in 0..t.n_cols() {
            let c: Vec<f64> = m.column(j).iter().map(|x| libm::exp(*x) - 2.0 * j as f64).collect();
            t.set_column(j, &c);
        }
        let cfg = TrainConfig { rounds: 20, ..TrainConfig::default() };
        let (qa, qb) = (quantile_normalize(&m), quantile_normalize(&t));
        prop_assert_eq!(&qa, &qb);
        let a = train(&m, &cfg).unwrap().predict_matrix(&m).unwrap();
        let b = train(&t, &cfg).unwrap().predict_matrix(&t).unwrap();
        prop_assert_eq!(a, b);
    }
}
