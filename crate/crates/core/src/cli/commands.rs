use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use super::output::{digests, write_atomic, InputDigest, Report};
use super::{
    AdaptCmd, BaselineCmd, Cli, CliError, Command, CommonArgs, CorpusArgs, EvalArgs, EvaluateCmd, ExperimentCmd,
    ExplainCmd, RunConfig, ScalingCmd, ScoreCmd, TrainArgs, TrainCmd,
};
use crate::boost::{train, Explainer, StumpEnsemble};
use crate::corpus::{load_corpus, Dataset, DatasetKey};
use crate::eval::{
    adapt, derive_seed, random_baseline, scaling_experiment, training_keys, AdaptOptions, Condition, EvalReport,
    PredictionSet, ScalingOptions,
};
use crate::extractor::{Action, Canonicalizer, RedirectMap, SuffixList};
use crate::features::{compute_features, format_g17, FeatureMatrix};
use crate::labels::{Label, LabelSet};
use crate::pipeline::PreparedDataset;

pub(super) fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::Usage(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Extract(a) => {
            apply_corpus(&mut cfg, &a);
            extract(&cfg)
        }
        Command::Features(a) => {
            apply_corpus(&mut cfg, &a);
            features(&cfg)
        }
        Command::Train(a) => {
            apply_common(&mut cfg, &a.common);
            apply_train(&mut cfg, &a.train);
            train_cmd(&cfg, &a)
        }
        Command::Score(a) => {
            apply_common(&mut cfg, &a.common);
            score(&cfg, &a)
        }
        Command::Explain(a) => {
            apply_common(&mut cfg, &a.common);
            if let Some(k) = a.top_k {
                cfg.top_k = k;
            }
            explain(&cfg, &a)
        }
        Command::Evaluate(a) => {
            apply_common(&mut cfg, &a.common);
            apply_train(&mut cfg, &a.train);
            apply_eval(&mut cfg, &a.eval);
            if let Some(n) = a.normalize {
                cfg.normalization = n;
            }
            evaluate(&cfg, &a)
        }
        Command::Adapt(a) => {
            apply_common(&mut cfg, &a.common);
            apply_train(&mut cfg, &a.train);
            apply_eval(&mut cfg, &a.eval);
            if let Some(c) = a.condition {
                cfg.condition = c;
            }
            if let Some(n) = a.normalize {
                cfg.normalization = n;
            }
            if let Some(h) = a.holdout {
                cfg.holdout = h;
            }
            adapt_cmd(&cfg, &a)
        }
        Command::Baseline(a) => {
            apply_common(&mut cfg, &a.common);
            if let Some(n) = a.bootstrap {
                cfg.bootstrap = n;
            }
            cfg.prior_matched |= a.prior_matched;
            baseline(&cfg, &a)
        }
        Command::Experiment(ExperimentCmd::Scaling(a)) => {
            apply_corpus(&mut cfg, &a.corpus);
            apply_train(&mut cfg, &a.train);
            if let Some(g) = &a.grid {
                cfg.experiment.grid = Some(g.clone());
            }
            if let Some(r) = a.repeats {
                cfg.experiment.repeats = r;
            }
            if a.cutoff.is_some() {
                cfg.experiment.cutoff = a.cutoff;
            }
            if !a.dataset.is_empty() {
                cfg.experiment.datasets = a.dataset.clone();
            }
            scaling(&cfg, &a)
        }
        #[cfg(feature = "fetch")]
        Command::Fetch(a) => fetch(&a),
    }
}

#[cfg(feature = "fetch")]
fn fetch(a: &super::FetchCmd) -> Result<(), CliError> {
    use crate::fetch::{FetchConfig, Fetcher};
    let mut cfg = FetchConfig::new(a.base_url.clone(), a.lang.clone(), a.topic.clone());
    cfg.interval = std::time::Duration::from_millis(a.interval_ms);
    let cursor = a.cursor.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".cursor");
        p.into()
    });
    let done = Fetcher::new(cfg)?.fetch_pages(&a.page_id, &a.output, &cursor)?;
    eprintln!("{} pages complete in {}", done.done.len(), a.output.display());
    Ok(())
}

fn apply_common(cfg: &mut RunConfig, a: &CommonArgs) {
    if let Some(o) = &a.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
}

fn apply_corpus(cfg: &mut RunConfig, a: &CorpusArgs) {
    apply_common(cfg, &a.common);
    if !a.corpus.is_empty() {
        cfg.corpus = a.corpus.clone();
    }
    if a.labels.is_some() {
        cfg.labels = a.labels.clone();
    }
    if let Some(s) = a.label_source {
        cfg.label_source = s;
    }
    if a.redirects.is_some() {
        cfg.redirects = a.redirects.clone();
    }
}

fn apply_train(cfg: &mut RunConfig, a: &TrainArgs) {
    let t = &mut cfg.train;
    if let Some(v) = a.rounds {
        t.rounds = v;
    }
    if let Some(v) = a.learning_rate {
        t.learning_rate = v;
    }
    if let Some(v) = a.max_depth {
        t.max_depth = v;
    }
    if let Some(v) = a.lambda {
        t.lambda = v;
    }
    if let Some(v) = a.gamma {
        t.gamma = v;
    }
    if a.pos_weight.is_some() {
        t.pos_weight = a.pos_weight;
    }
    if let Some(v) = a.min_per_class {
        cfg.min_per_class = v;
    }
}

fn apply_eval(cfg: &mut RunConfig, a: &EvalArgs) {
    if let Some(n) = a.bootstrap {
        cfg.bootstrap = n;
    }
    if let Some(x) = a.alpha {
        cfg.alpha = x;
    }
    if let Some(m) = a.comparisons {
        cfg.comparisons = m;
    }
    cfg.prior_matched |= a.prior_matched;
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_settings(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.train.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.bootstrap == 0 {
        return Err(usage("bootstrap must be at least 1"));
    }
    if cfg.min_per_class == 0 {
        return Err(usage("min_per_class must be at least 1"));
    }
    Ok(())
}

fn canonicalizer(cfg: &RunConfig) -> anyhow::Result<Canonicalizer<'static>> {
    let redirects = match &cfg.redirects {
        Some(p) => RedirectMap::load(p).with_context(|| format!("redirect map {}", p.display()))?,
        None => RedirectMap::default(),
    };
    Ok(Canonicalizer::new(redirects, SuffixList::bundled()))
}

/// Loads every corpus file and merges datasets that share a key.
fn load_datasets(cfg: &RunConfig) -> Result<Vec<Dataset>, CliError> {
    if cfg.corpus.is_empty() {
        return Err(usage("no corpus given (use --corpus or `corpus` in the config file)"));
    }
    let mut merged: BTreeMap<DatasetKey, Dataset> = BTreeMap::new();
    for path in &cfg.corpus {
        let sets = load_corpus(path).with_context(|| format!("corpus {}", path.display()))?;
        for d in sets {
            match merged.get_mut(&d.key) {
                None => {
                    merged.insert(d.key.clone(), d);
                }
                Some(existing) => {
                    for a in d.articles {
                        if existing.articles.iter().any(|b| b.meta.page_id == a.meta.page_id) {
                            return Err(anyhow!(
                                "corpus {}: page {} of {} already loaded from another file",
                                path.display(),
                                a.meta.page_id,
                                d.key
                            )
                            .into());
                        }
                        existing.articles.push(a);
                    }
                    existing.articles.sort_by_key(|a| a.meta.page_id);
                }
            }
        }
    }
    Ok(merged.into_values().collect())
}

fn load_labels(cfg: &RunConfig, canon: &Canonicalizer<'_>) -> anyhow::Result<Option<LabelSet>> {
    cfg.labels
        .as_ref()
        .map(|p| LabelSet::load(p, cfg.label_source, canon).with_context(|| format!("labels {}", p.display())))
        .transpose()
}

fn corpus_inputs(cfg: &RunConfig) -> anyhow::Result<Vec<InputDigest>> {
    digests(cfg.corpus.iter().chain(&cfg.labels).chain(&cfg.redirects))
}

/// `<topic>.<lang>` from a matrix file name such as `climate.en.csv`.
fn key_from_path(path: &Path) -> DatasetKey {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match stem.rsplit_once('.') {
        Some((topic, lang)) => DatasetKey::new(topic, lang),
        None => DatasetKey::new(stem, ""),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "matrix".into())
}

fn read_matrix(path: &Path) -> anyhow::Result<FeatureMatrix> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FeatureMatrix::read_csv(key_from_path(path), file).with_context(|| format!("matrix {}", path.display()))
}

fn read_model(path: &Path) -> anyhow::Result<StumpEnsemble> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    StumpEnsemble::from_json(&text).with_context(|| format!("model {}", path.display()))
}

fn write_report<T: Serialize>(
    path: &Path,
    command: &str,
    cfg: &RunConfig,
    inputs: &[InputDigest],
    result: T,
) -> anyhow::Result<()> {
    write_atomic(path, &Report::new(command, cfg, inputs, result).to_json())
}

fn bit(l: Label) -> &'static str {
    if l.is_reliable() {
        "1"
    } else {
        "0"
    }
}

fn prepare_all(datasets: &[Dataset], canon: &Canonicalizer<'_>) -> anyhow::Result<Vec<PreparedDataset>> {
    datasets
        .iter()
        .map(|d| PreparedDataset::prepare(d, canon).with_context(|| format!("dataset {}", d.key)))
        .collect()
}

#[derive(Serialize)]
struct ExtractSummary {
    dataset: String,
    articles: usize,
    revisions: usize,
    merged_revisions: usize,
    source_edits: usize,
    adds: usize,
    removes: usize,
    domains: usize,
    rejected_urls: usize,
}

fn extract(cfg: &RunConfig) -> Result<(), CliError> {
    let canon = canonicalizer(cfg)?;
    let datasets = load_datasets(cfg)?;
    let inputs = corpus_inputs(cfg)?;
    let dir = cfg.out_dir.join("extract");
    let mut summaries = Vec::new();
    for (d, p) in datasets.iter().zip(prepare_all(&datasets, &canon)?) {
        let mut edits = String::from(
            "page_id,index,timestamp,domain,action,user,registered,first_add,last_remove\n",
        );
        let mut adds = 0;
        for e in p.edits() {
            adds += usize::from(e.action == Action::Add);
            edits.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                e.page_id,
                e.index,
                crate::corpus::timestamp::format(&e.timestamp),
                e.domain,
                if e.action == Action::Add { "add" } else { "remove" },
                csv_text(&e.user),
                e.registered,
                e.first_add,
                e.last_remove
            ));
        }
        let mut timelines = String::from(
            "page_id,domain,intervals,permanence_days,permanence_revisions,age_days,age_revisions,currently_present,adds,removes\n",
        );
        let mut domains = std::collections::BTreeSet::new();
        for a in &p.articles {
            for (domain, t) in &a.timelines {
                domains.insert(domain.as_str());
                timelines.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    t.page_id,
                    domain,
                    t.intervals.len(),
                    format_g17(t.permanence_days()),
                    t.permanence_revisions,
                    format_g17(t.age_days()),
                    t.age_revisions,
                    t.currently_present,
                    t.adds.len(),
                    t.removes.len()
                ));
            }
        }
        write_atomic(&dir.join(format!("{}.edits.csv", d.key)), &edits)?;
        write_atomic(&dir.join(format!("{}.timelines.csv", d.key)), &timelines)?;
        let n_edits = p.edits().count();
        summaries.push(ExtractSummary {
            dataset: d.key.to_string(),
            articles: d.articles.len(),
            revisions: d.revision_count(),
            merged_revisions: p.merged_revision_count(),
            source_edits: n_edits,
            adds,
            removes: n_edits - adds,
            domains: domains.len(),
            rejected_urls: p.rejected_urls(),
        });
    }
    #[derive(Serialize)]
    struct Out<'a> {
        suffix_list: &'a str,
        datasets: Vec<ExtractSummary>,
    }
    let out = Out { suffix_list: canon.suffixes.version(), datasets: summaries };
    write_report(&dir.join("report.json"), "extract", cfg, &inputs, out)?;
    Ok(())
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct FeatureSummary {
    dataset: String,
    file: String,
    domains: usize,
    reliable: usize,
    unreliable: usize,
    meets_min_per_class: bool,
}

fn features(cfg: &RunConfig) -> Result<(), CliError> {
    let canon = canonicalizer(cfg)?;
    let datasets = load_datasets(cfg)?;
    let labels = load_labels(cfg, &canon)?;
    let inputs = corpus_inputs(cfg)?;
    let dir = cfg.out_dir.join("features");
    let mut summaries = Vec::new();
    for p in prepare_all(&datasets, &canon)? {
        let mut m = compute_features(&p);
        if let Some(l) = &labels {
            m.attach_labels(l);
        }
        let file = format!("{}.csv", p.key);
        write_atomic(&dir.join(&file), &m.to_csv_string())?;
        let (reliable, unreliable) = m.class_counts();
        summaries.push(FeatureSummary {
            dataset: p.key.to_string(),
            file,
            domains: m.n_rows(),
            reliable,
            unreliable,
            meets_min_per_class: reliable >= cfg.min_per_class && unreliable >= cfg.min_per_class,
        });
    }
    #[derive(Serialize)]
    struct Out {
        feature_fingerprint: String,
        datasets: Vec<FeatureSummary>,
    }
    let out = Out { feature_fingerprint: crate::features::fingerprint(&crate::features::catalog_ids()), datasets: summaries };
    write_report(&dir.join("report.json"), "features", cfg, &inputs, out)?;
    Ok(())
}

fn require_classes(m: &FeatureMatrix, min: usize) -> anyhow::Result<()> {
    let (reliable, unreliable) = m.class_counts();
    if reliable < min || unreliable < min {
        return Err(anyhow!(
            "{}: {reliable} reliable and {unreliable} unreliable labeled domains, need {min} of each",
            m.key
        ));
    }
    Ok(())
}

fn train_cmd(cfg: &RunConfig, a: &TrainCmd) -> Result<(), CliError> {
    check_settings(cfg)?;
    let m = read_matrix(&a.matrix)?;
    require_classes(&m, cfg.min_per_class)?;
    let model = train(&m, &cfg.train).with_context(|| format!("training on {}", a.matrix.display()))?;
    let path = a.model.clone().unwrap_or_else(|| cfg.out_dir.join("model").join(format!("{}.json", stem(&a.matrix))));
    write_atomic(&path, &model.to_json())?;
    Ok(())
}

fn score(cfg: &RunConfig, a: &ScoreCmd) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let m = read_matrix(&a.matrix)?;
    let margins = model.predict_matrix(&m).with_context(|| format!("scoring {}", a.matrix.display()))?;
    let mut out = String::from("domain,label,probability,predicted\n");
    for (i, margin) in margins.iter().enumerate() {
        let p = crate::boost::sigmoid(*margin);
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_text(&m.domains[i]),
            m.labels[i].map(bit).unwrap_or(""),
            format_g17(p),
            bit(Label::from_bool(p >= crate::eval::THRESHOLD))
        ));
    }
    write_atomic(&cfg.out_dir.join("score").join(format!("{}.csv", stem(&a.matrix))), &out)?;
    Ok(())
}

#[derive(Serialize)]
struct TopFeature {
    feature: String,
    mean_abs: f64,
    mean: f64,
}

fn explain(cfg: &RunConfig, a: &ExplainCmd) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let m = read_matrix(&a.matrix)?;
    let bg = match &a.background {
        Some(p) => read_matrix(p)?,
        None => m.clone(),
    };
    model.check_matrix(&m).with_context(|| format!("matrix {}", a.matrix.display()))?;
    let explainer = Explainer::new(&model, &bg).context("background")?;
    let mut csv = format!("domain,base,margin,{}\n", m.feature_ids.join(","));
    let mut sum_abs = vec![0.0; m.n_cols()];
    let mut sum = vec![0.0; m.n_cols()];
    for (i, row) in m.rows().enumerate() {
        let at = explainer.attribute(row).context("attribution")?;
        let margin = model.predict_margin(row).context("margin")?;
        csv.push_str(&format!("{},{},{}", csv_text(&m.domains[i]), format_g17(at.base), format_g17(margin)));
        for (j, c) in at.contributions.iter().enumerate() {
            csv.push(',');
            csv.push_str(&format_g17(*c));
            sum_abs[j] += c.abs();
            sum[j] += c;
        }
        csv.push('\n');
    }
    let n = m.n_rows().max(1) as f64;
    let mut top: Vec<TopFeature> = m
        .feature_ids
        .iter()
        .enumerate()
        .map(|(j, f)| TopFeature { feature: f.clone(), mean_abs: sum_abs[j] / n, mean: sum[j] / n })
        .collect();
    // stable sort keeps column order among equal importances
    top.sort_by(|x, y| y.mean_abs.total_cmp(&x.mean_abs));
    top.truncate(cfg.top_k);
    let dir = cfg.out_dir.join("explain");
    let name = stem(&a.matrix);
    write_atomic(&dir.join(format!("{name}.attributions.csv")), &csv)?;
    let mut paths = vec![a.model.clone(), a.matrix.clone()];
    paths.extend(a.background.clone());
    #[derive(Serialize)]
    struct Out {
        base_value: f64,
        rows: usize,
        top_features: Vec<TopFeature>,
    }
    let out = Out { base_value: explainer.base_value(), rows: m.n_rows(), top_features: top };
    write_report(&dir.join(format!("{name}.summary.json")), "explain", cfg, &digests(&paths)?, out)?;
    Ok(())
}

fn finish_eval(
    cfg: &RunConfig,
    report: EvalReport,
    labels: &[Label],
    with_baseline: bool,
) -> EvalReport {
    if !with_baseline {
        return report;
    }
    let b = random_baseline(labels, cfg.bootstrap, derive_seed(cfg.seed, 1), cfg.prior_matched);
    report.with_significance(&b.f1_samples, cfg.alpha, cfg.comparisons)
}

fn write_eval(
    cfg: &RunConfig,
    command: &str,
    name: &str,
    inputs: &[InputDigest],
    report: &EvalReport,
    predictions: &PredictionSet,
) -> anyhow::Result<()> {
    let dir = cfg.out_dir.join(command);
    write_atomic(&dir.join(format!("{name}.predictions.csv")), &predictions.to_csv())?;
    write_report(&dir.join(format!("{name}.report.json")), command, cfg, inputs, report)
}

fn evaluate(cfg: &RunConfig, a: &EvaluateCmd) -> Result<(), CliError> {
    check_settings(cfg)?;
    let m = read_matrix(&a.matrix)?;
    let opts = AdaptOptions {
        condition: Condition::Native,
        normalization: cfg.normalization,
        holdout: cfg.holdout,
        min_per_class: cfg.min_per_class,
    };
    let p = adapt(&[], &m, &opts, &cfg.train).with_context(|| format!("evaluating {}", a.matrix.display()))?;
    let report = EvalReport::new(
        Condition::Native,
        cfg.normalization,
        vec![m.key.to_string()],
        m.key.to_string(),
        &p,
        cfg.bootstrap,
        derive_seed(cfg.seed, 0),
    );
    let labels: Vec<Label> = p.predictions.iter().map(|x| x.label).collect();
    let report = finish_eval(cfg, report, &labels, a.eval.with_baseline);
    write_eval(cfg, "evaluate", &stem(&a.matrix), &digests([&a.matrix])?, &report, &p)?;
    Ok(())
}

fn adapt_cmd(cfg: &RunConfig, a: &AdaptCmd) -> Result<(), CliError> {
    check_settings(cfg)?;
    let test = read_matrix(&a.test)?;
    let train_sets = a.train_matrix.iter().map(|p| read_matrix(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let opts = AdaptOptions {
        condition: cfg.condition,
        normalization: cfg.normalization,
        holdout: cfg.holdout,
        min_per_class: cfg.min_per_class,
    };
    let p = adapt(&train_sets, &test, &opts, &cfg.train).with_context(|| format!("adapting to {}", test.key))?;
    if p.is_empty() {
        return Err(anyhow!("{} has no labeled domains to evaluate", a.test.display()).into());
    }
    let report = EvalReport::new(
        cfg.condition,
        cfg.normalization,
        training_keys(&train_sets, &test, cfg.condition),
        test.key.to_string(),
        &p,
        cfg.bootstrap,
        derive_seed(cfg.seed, 0),
    );
    let labels: Vec<Label> = p.predictions.iter().map(|x| x.label).collect();
    let report = finish_eval(cfg, report, &labels, a.eval.with_baseline);
    let condition = serde_json::to_value(cfg.condition).expect("enum serializes");
    let name = format!("{}.{}", stem(&a.test), condition.as_str().unwrap_or("adapt"));
    let mut paths = a.train_matrix.clone();
    paths.push(a.test.clone());
    write_eval(cfg, "adapt", &name, &digests(&paths)?, &report, &p)?;
    Ok(())
}

fn baseline(cfg: &RunConfig, a: &BaselineCmd) -> Result<(), CliError> {
    check_settings(cfg)?;
    let m = read_matrix(&a.matrix)?;
    let labels: Vec<Label> = m.labels.iter().flatten().copied().collect();
    if labels.is_empty() {
        return Err(anyhow!("{} has no labeled domains", a.matrix.display()).into());
    }
    let b = random_baseline(&labels, cfg.bootstrap, derive_seed(cfg.seed, 1), cfg.prior_matched);
    let path = cfg.out_dir.join("baseline").join(format!("{}.report.json", stem(&a.matrix)));
    write_report(&path, "baseline", cfg, &digests([&a.matrix])?, b)?;
    Ok(())
}

fn scaling(cfg: &RunConfig, _a: &ScalingCmd) -> Result<(), CliError> {
    check_settings(cfg)?;
    if cfg.labels.is_none() {
        return Err(usage("the scaling experiment needs --labels"));
    }
    if cfg.experiment.repeats == 0 {
        return Err(usage("repeats must be at least 1"));
    }
    let grid = cfg.experiment.grid.clone().unwrap_or_else(crate::eval::default_grid);
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("grid must be strictly ascending"));
    }
    let canon = canonicalizer(cfg)?;
    let mut datasets = load_datasets(cfg)?;
    if !cfg.experiment.datasets.is_empty() {
        let wanted = &cfg.experiment.datasets;
        for w in wanted {
            if !datasets.iter().any(|d| &d.key.to_string() == w) {
                return Err(anyhow!("dataset {w} not found in the corpus").into());
            }
        }
        datasets.retain(|d| wanted.contains(&d.key.to_string()));
    }
    let labels = load_labels(cfg, &canon)?.expect("checked above");
    let opts = ScalingOptions {
        grid,
        repeats: cfg.experiment.repeats,
        cutoff: cfg.experiment.cutoff,
        seed: cfg.seed,
        min_per_class: cfg.min_per_class,
    };
    let curve = scaling_experiment(&datasets, &labels, &canon, &opts, &cfg.train).context("scaling experiment")?;
    let dir = cfg.out_dir.join("experiment");
    write_atomic(&dir.join("scaling.csv"), &curve.to_csv())?;
    write_report(&dir.join("scaling.report.json"), "experiment scaling", cfg, &corpus_inputs(cfg)?, &curve)?;
    Ok(())
}
