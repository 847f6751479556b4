//! Fully resolved jobs. A job is what gets recorded in a run manifest and
//! what `replay` executes again.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use mediasent_core::analytics::{
    align_with_deaths, cooccurrence_matrix, negative_labels, quarterly_aggregate, read_distribution_csv,
    read_quarterly_csv, sentiment_distribution, write_distribution_csv, write_quarterly_csv, CooccurrenceMatrix,
    DeathAlignment, PolarityStrategy, PolarityWeights,
};
use mediasent_core::corpus::{
    load_articles, load_death_series, normalize_section, quarter_counts, section_counts, write_articles_csv, Article,
    CorpusSelection, DateWindow, Quarter, SchemaMap,
};
use mediasent_core::labels::parse_label_list;
use mediasent_core::metrics::{evaluate, save_comparison_csv};
use mediasent_core::model::{predict_articles, train, Classifier, EncoderSource, Precision, ScratchDims, TrainConfig};
use mediasent_core::ngram::{sentiment_conditioned_ngrams, top_k, GramSize, NGramTable};
use mediasent_core::prediction::{labels_by_id, read_jsonl, write_jsonl};
use mediasent_core::report::{
    render_figures, sample_articles, slug, write_sample_csv, FigureKind, FigureTables, ImageFormat,
};
use mediasent_core::senwave::{fingerprint, load_senwave, split, stratified_subset, write_senwave_csv, SenwaveColumns};
use mediasent_core::synth::{synthetic_articles, synthetic_deaths, synthetic_tweets, ArticleSpec};
use mediasent_core::textprep::{CleanedDoc, StopwordPolicy};
use mediasent_core::{Error, LabelVector, Prediction, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Ingest(IngestJob),
    Clean(CleanJob),
    Ngrams(NgramsJob),
    Train(TrainJob),
    Evaluate(EvaluateJob),
    Predict(PredictJob),
    Polarity(PolarityJob),
    Timeseries(TimeseriesJob),
    Report(ReportJob),
    Sample(SampleJob),
    Synth(SynthJob),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleInput {
    pub path: PathBuf,
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopwordJob {
    pub extra_stopwords: Option<PathBuf>,
    pub apply_extras: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestJob {
    pub input: ArticleInput,
    pub sections: Vec<String>,
    pub excluded_sections: Vec<String>,
    pub window: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanJob {
    pub input: ArticleInput,
    pub stopwords: StopwordJob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramsJob {
    pub input: ArticleInput,
    pub section: Option<String>,
    pub quarter: Option<Quarter>,
    pub n: usize,
    pub k: usize,
    pub labels: Vec<String>,
    pub predictions: Option<PathBuf>,
    pub stopwords: StopwordJob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScratchJob {
    pub dims: ScratchDims,
    pub vocab_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainJob {
    pub dataset: PathBuf,
    pub train: TrainConfig,
    pub split_ratio: f64,
    pub subset: Option<usize>,
    pub scratch: Option<ScratchJob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateJob {
    pub models: Vec<PathBuf>,
    pub test: PathBuf,
    pub threshold: Option<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictJob {
    pub model: PathBuf,
    pub input: ArticleInput,
    pub stride: Option<usize>,
    pub threshold: Option<f32>,
    pub argmax_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityJob {
    pub predictions: PathBuf,
    pub input: Option<ArticleInput>,
    pub weights: Option<PathBuf>,
    pub strategy: PolarityStrategy,
    pub exclude_official_report: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesJob {
    pub predictions: PathBuf,
    pub input: ArticleInput,
    pub deaths: PathBuf,
    pub region: String,
    pub sections: Vec<String>,
    pub weights: Option<PathBuf>,
    pub strategy: PolarityStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJob {
    pub runs: Vec<PathBuf>,
    pub format: ImageFormat,
    pub kinds: Vec<FigureKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJob {
    pub predictions: PathBuf,
    pub input: ArticleInput,
    pub labels: Vec<String>,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthJob {
    pub tweets: usize,
    pub articles: usize,
    pub seed: u64,
}

/// Files touched by a job, collected for the run manifest.
#[derive(Debug, Default)]
pub struct Ledger {
    pub inputs: Vec<PathBuf>,
    pub artifacts: Vec<PathBuf>,
}

impl Ledger {
    fn input(&mut self, path: &Path) {
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
    }

    fn artifact(&mut self, path: PathBuf) {
        self.artifacts.push(path);
    }
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Ingest(_) => "ingest",
            Job::Clean(_) => "clean",
            Job::Ngrams(_) => "ngrams",
            Job::Train(_) => "train",
            Job::Evaluate(_) => "evaluate",
            Job::Predict(_) => "predict",
            Job::Polarity(_) => "polarity",
            Job::Timeseries(_) => "timeseries",
            Job::Report(_) => "report",
            Job::Sample(_) => "sample",
            Job::Synth(_) => "synth",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Train(j) => Some(j.train.seed),
            Job::Sample(j) => Some(j.seed),
            Job::Synth(j) => Some(j.seed),
            _ => None,
        }
    }

    pub fn execute(&self, out: &Path, ledger: &mut Ledger) -> Result<()> {
        match self {
            Job::Ingest(j) => ingest(j, out, ledger),
            Job::Clean(j) => clean(j, out, ledger),
            Job::Ngrams(j) => ngrams(j, out, ledger),
            Job::Train(j) => train_job(j, out, ledger),
            Job::Evaluate(j) => evaluate_job(j, out, ledger),
            Job::Predict(j) => predict(j, out, ledger),
            Job::Polarity(j) => polarity(j, out, ledger),
            Job::Timeseries(j) => timeseries(j, out, ledger),
            Job::Report(j) => report(j, out, ledger),
            Job::Sample(j) => sample(j, out, ledger),
            Job::Synth(j) => synth(j, out, ledger),
        }
    }
}

fn need_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Data(format!("{what} {} does not exist", path.display())))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_articles(input: &ArticleInput, ledger: &mut Ledger) -> Result<Vec<Article>> {
    need_file(&input.path, "article file")?;
    ledger.input(&input.path);
    let schema = match &input.schema {
        Some(p) => {
            ledger.input(p);
            SchemaMap::from_json_file(p)?
        }
        None => SchemaMap::canonical(),
    };
    Ok(load_articles(&input.path, &schema)?.articles)
}

fn read_predictions(path: &Path, ledger: &mut Ledger) -> Result<Vec<Prediction>> {
    need_file(path, "prediction file")?;
    ledger.input(path);
    read_jsonl(path)
}

fn stopword_policy(job: &StopwordJob, ledger: &mut Ledger) -> Result<StopwordPolicy> {
    match &job.extra_stopwords {
        Some(p) => {
            need_file(p, "stop-word file")?;
            ledger.input(p);
            StopwordPolicy::from_extras_file(p, job.apply_extras)
        }
        None if job.apply_extras => Ok(StopwordPolicy::default()),
        None => Ok(StopwordPolicy::without_extras()),
    }
}

fn weights(path: &Option<PathBuf>, ledger: &mut Ledger) -> Result<PolarityWeights> {
    match path {
        Some(p) => {
            need_file(p, "weights file")?;
            ledger.input(p);
            PolarityWeights::from_json_file(p)
        }
        None => Ok(PolarityWeights::default()),
    }
}

#[derive(Serialize)]
struct IngestSummary {
    rows_kept: usize,
    rows_loaded: usize,
    skipped: mediasent_core::corpus::SkipCounts,
    window_start: NaiveDate,
    window_end: NaiveDate,
    sections: BTreeMap<String, usize>,
    quarters: BTreeMap<String, usize>,
}

fn ingest(job: &IngestJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    need_file(&job.input.path, "article file")?;
    ledger.input(&job.input.path);
    let schema = match &job.input.schema {
        Some(p) => {
            ledger.input(p);
            SchemaMap::from_json_file(p)?
        }
        None => SchemaMap::canonical(),
    };
    let loaded = load_articles(&job.input.path, &schema)?;
    let selection = CorpusSelection {
        sections: job.sections.clone(),
        excluded_sections: job.excluded_sections.clone(),
        window: DateWindow::parse(&job.window)?,
    };
    let mut kept = selection.select(&loaded.articles)?;
    kept.sort_by(|a, b| (a.publication_date, &a.id).cmp(&(b.publication_date, &b.id)));
    if kept.is_empty() {
        log::warn!("no articles left after section and window filtering");
    }
    let path = out.join("articles.csv");
    write_articles_csv(&path, &kept)?;
    ledger.artifact(path);
    let summary = IngestSummary {
        rows_kept: kept.len(),
        rows_loaded: loaded.articles.len(),
        skipped: loaded.skipped,
        window_start: selection.window.start(),
        window_end: selection.window.end(),
        sections: section_counts(&kept).into_iter().collect(),
        quarters: quarter_counts(&kept)
            .into_iter()
            .map(|(q, n)| (q.to_string(), n))
            .collect(),
    };
    let path = out.join("ingest_summary.json");
    write_json(&path, &summary)?;
    ledger.artifact(path);
    Ok(())
}

fn clean(job: &CleanJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let articles = read_articles(&job.input, ledger)?;
    let policy = stopword_policy(&job.stopwords, ledger)?;
    let path = out.join("cleaned.jsonl");
    let mut w = create(&path)?;
    for a in &articles {
        let doc = CleanedDoc::from_text(&a.id, &a.body, &policy);
        serde_json::to_writer(&mut w, &doc)?;
        w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    ledger.artifact(path);
    Ok(())
}

fn ngrams(job: &NgramsJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let n = GramSize::try_from(job.n)?;
    let articles = read_articles(&job.input, ledger)?;
    let policy = stopword_policy(&job.stopwords, ledger)?;
    let section = job.section.as_deref().map(normalize_section);
    let docs: Vec<(String, Vec<String>)> = articles
        .iter()
        .filter(|a| section.as_ref().is_none_or(|s| normalize_section(&a.section) == *s))
        .filter(|a| job.quarter.is_none_or(|q| a.quarter() == q))
        .map(|a| {
            let doc = CleanedDoc::from_text(&a.id, &a.body, &policy);
            (doc.article_id, doc.ngram_tokens)
        })
        .collect();
    if docs.is_empty() {
        log::warn!("no articles match the section and quarter filter");
    }
    let table = if job.labels.is_empty() {
        let tokens: Vec<Vec<String>> = docs.into_iter().map(|(_, t)| t).collect();
        top_k(&tokens, n, job.k)?
    } else {
        let path = job
            .predictions
            .as_ref()
            .ok_or_else(|| Error::Config("--labels needs --predictions".into()))?;
        let preds = read_predictions(path, ledger)?;
        let targets: BTreeSet<_> = job
            .labels
            .iter()
            .map(|l| parse_label_list(l))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?
            .into_iter()
            .flatten()
            .collect();
        sentiment_conditioned_ngrams(&labels_by_id(&preds), &docs, &targets, n, job.k)?
    };
    let mut name = vec![slug(job.section.as_deref().unwrap_or("all"))];
    name.push(job.quarter.map_or("all".into(), |q| q.to_string()));
    if !job.labels.is_empty() {
        name.push(slug(&job.labels.join("_")));
    }
    name.push(if job.n == 2 {
        "bigrams".into()
    } else {
        "trigrams".into()
    });
    let path = out.join(format!("ngrams_{}.csv", name.join("_")));
    table.save_csv(&path)?;
    ledger.artifact(path);
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model_id: String,
    train_examples: usize,
    test_examples: usize,
    dataset_fingerprint: &'a str,
    epochs: &'a [mediasent_core::model::EpochStats],
}

fn train_job(job: &TrainJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    need_file(&job.dataset, "dataset")?;
    ledger.input(&job.dataset);
    let loaded = load_senwave(&job.dataset, &SenwaveColumns::default())?;
    let (train_set, test_set) = split(&loaded.tweets, job.split_ratio, job.train.seed)?;
    let train_set = match job.subset {
        Some(n) => stratified_subset(&train_set, n, job.train.seed),
        None => train_set,
    };
    let source = match &job.scratch {
        Some(s) => EncoderSource::Scratch {
            dims: s.dims,
            vocab_words: s.vocab_words,
            texts: train_set.iter().map(|t| t.text.clone()).collect(),
        },
        None => EncoderSource::Pretrained,
    };
    let mut model = Classifier::build(source, job.train.clone(), Precision::F32)?;
    log::info!(
        "training {} on {} tweets ({} held out)",
        model.model_id(),
        train_set.len(),
        test_set.len()
    );
    let trace = train(&mut model, &train_set, |_| {})?;
    let fp = fingerprint(&train_set);
    let model_dir = out.join("model");
    model.save(&model_dir, Some(&fp))?;
    for f in ["config.json", "model.safetensors", "tokenizer.json", "manifest.json"] {
        ledger.artifact(model_dir.join(f));
    }
    let path = out.join("test_split.csv");
    write_senwave_csv(&path, &test_set)?;
    ledger.artifact(path);
    let path = out.join("train_trace.json");
    write_json(
        &path,
        &TrainSummary {
            model_id: model.model_id(),
            train_examples: train_set.len(),
            test_examples: test_set.len(),
            dataset_fingerprint: &fp,
            epochs: &trace.epochs,
        },
    )?;
    ledger.artifact(path);
    if !test_set.is_empty() {
        let report = evaluate(&model, &test_set, job.train.threshold)?;
        let path = out.join("metrics.json");
        write_json(&path, &report)?;
        ledger.artifact(path);
    }
    Ok(())
}

fn evaluate_job(job: &EvaluateJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    need_file(&job.test, "test set")?;
    ledger.input(&job.test);
    let test = load_senwave(&job.test, &SenwaveColumns::default())?.tweets;
    if test.is_empty() {
        return Err(Error::Data(format!("{} holds no usable tweets", job.test.display())));
    }
    let mut reports = Vec::new();
    for dir in &job.models {
        let model = Classifier::load(dir, Precision::F32)?;
        ledger.input(&dir.join("model.safetensors"));
        let threshold = job.threshold.unwrap_or(model.train_config().threshold);
        let mut report = evaluate(&model, &test, threshold)?;
        if reports
            .iter()
            .any(|r: &mediasent_core::metrics::MetricsReport| r.model_id == report.model_id)
        {
            report.model_id = format!("{}#{}", report.model_id, reports.len() + 1);
        }
        reports.push(report);
    }
    let path = out.join("metrics.json");
    write_json(&path, &reports)?;
    ledger.artifact(path);
    let path = out.join("metrics_comparison.csv");
    save_comparison_csv(&reports, &path)?;
    ledger.artifact(path);
    Ok(())
}

#[derive(Serialize)]
struct PredictSummary {
    model_id: String,
    articles: usize,
    predicted: usize,
    empty_after_cleaning: Vec<String>,
    chunks: usize,
    threshold: f32,
    stride: usize,
    argmax_fallback: bool,
}

fn predict(job: &PredictJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let articles = read_articles(&job.input, ledger)?;
    let mut model = Classifier::load(&job.model, Precision::F32)?;
    ledger.input(&job.model.join("model.safetensors"));
    let cfg = model.train_config().clone();
    model.set_inference(
        job.threshold.unwrap_or(cfg.threshold),
        job.stride.unwrap_or(cfg.stride),
        job.argmax_fallback,
    )?;
    let result = predict_articles(&model, &articles)?;
    let path = out.join("predictions.jsonl");
    write_jsonl(&path, &result.predictions)?;
    ledger.artifact(path);
    let cfg = model.train_config();
    let path = out.join("predict_summary.json");
    write_json(
        &path,
        &PredictSummary {
            model_id: model.model_id(),
            articles: articles.len(),
            predicted: result.predictions.len(),
            chunks: result.predictions.iter().map(|p| p.chunk_count).sum(),
            empty_after_cleaning: result.skipped,
            threshold: cfg.threshold,
            stride: cfg.stride,
            argmax_fallback: cfg.argmax_fallback,
        },
    )?;
    ledger.artifact(path);
    Ok(())
}

fn polarity(job: &PolarityJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let preds = read_predictions(&job.predictions, ledger)?;
    let weights = weights(&job.weights, ledger)?;

    let path = out.join("polarity.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["article_id", "labels", "polarity"])?;
    for p in &preds {
        let labels: Vec<&str> = p.labels.labels().map(|l| l.name()).collect();
        let score = mediasent_core::analytics::polarity_score_with(&p.labels, &weights, job.strategy);
        w.write_record([p.article_id.clone(), labels.join(";"), format!("{score:.6}")])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    ledger.artifact(path);

    let mut columns = vec![(
        "all".to_string(),
        sentiment_distribution(&preds, job.exclude_official_report),
    )];
    if let Some(input) = &job.input {
        let articles = read_articles(input, ledger)?;
        let dates: BTreeMap<&str, NaiveDate> = articles.iter().map(|a| (a.id.as_str(), a.publication_date)).collect();
        for (name, window) in [
            ("pre_pandemic", DateWindow::pre_pandemic()),
            ("pandemic", DateWindow::pandemic()),
        ] {
            let subset: Vec<Prediction> = preds
                .iter()
                .filter(|p| dates.get(p.article_id.as_str()).is_some_and(|d| window.contains(*d)))
                .cloned()
                .collect();
            columns.push((
                name.to_string(),
                sentiment_distribution(&subset, job.exclude_official_report),
            ));
        }
        let rows = quarterly_aggregate(&preds, &articles, &weights, job.strategy)?;
        let path = out.join("quarterly.csv");
        write_quarterly_csv(&rows, create(&path)?)?;
        ledger.artifact(path);
    }
    let path = out.join("distribution.csv");
    write_distribution_csv(&columns, create(&path)?)?;
    ledger.artifact(path);

    if preds.len() >= 2 {
        let path = out.join("cooccurrence.csv");
        cooccurrence_matrix(&preds)?.write_csv(create(&path)?)?;
        ledger.artifact(path);
    } else {
        log::warn!("fewer than two predictions; co-occurrence skipped");
    }
    Ok(())
}

fn timeseries(job: &TimeseriesJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let preds = read_predictions(&job.predictions, ledger)?;
    let mut articles = read_articles(&job.input, ledger)?;
    if !job.sections.is_empty() {
        let keep: BTreeSet<String> = job.sections.iter().map(|s| normalize_section(s)).collect();
        articles.retain(|a| keep.contains(&normalize_section(&a.section)));
    }
    let ids: BTreeSet<&str> = articles.iter().map(|a| a.id.as_str()).collect();
    let preds: Vec<Prediction> = if job.sections.is_empty() {
        preds
    } else {
        preds
            .into_iter()
            .filter(|p| ids.contains(p.article_id.as_str()))
            .collect()
    };
    need_file(&job.deaths, "death series")?;
    ledger.input(&job.deaths);
    let deaths = load_death_series(&job.deaths, &job.region)?;
    if deaths.is_empty() {
        return Err(Error::Data(format!(
            "{} has no rows for region `{}`",
            job.deaths.display(),
            job.region
        )));
    }
    let weights = weights(&job.weights, ledger)?;
    let quarterly = quarterly_aggregate(&preds, &articles, &weights, job.strategy)?;
    let alignment = align_with_deaths(&quarterly, &deaths, &negative_labels());
    let stem = format!("deaths_{}", slug(&job.region));
    let path = out.join(format!("{stem}.csv"));
    alignment.write_csv(create(&path)?)?;
    ledger.artifact(path);
    let path = out.join(format!("{stem}.json"));
    write_json(&path, &alignment)?;
    ledger.artifact(path);
    Ok(())
}

fn report(job: &ReportJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let mut tables = FigureTables::default();
    let mut copies: BTreeMap<String, PathBuf> = BTreeMap::new();
    for run in &job.runs {
        if !run.is_dir() {
            return Err(Error::Data(format!("run directory {} does not exist", run.display())));
        }
        let mut entries: Vec<PathBuf> = std::fs::read_dir(run)
            .map_err(|e| Error::io(run, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for path in entries {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").to_string();
            let used = if let Some(stem) = name.strip_prefix("ngrams_").and_then(|n| n.strip_suffix(".csv")) {
                tables.ngrams.push((stem.to_string(), NGramTable::load_csv(&path)?));
                true
            } else if name == "distribution.csv" {
                tables.distribution = read_distribution_csv(&path)?;
                true
            } else if name == "quarterly.csv" {
                tables.quarterly = read_quarterly_csv(&path)?;
                true
            } else if name == "cooccurrence.csv" {
                tables.cooccurrence = Some(CooccurrenceMatrix::read_csv(&path)?);
                true
            } else if name.starts_with("deaths_") && name.ends_with(".json") {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let alignment: DeathAlignment =
                    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
                tables.deaths = Some(alignment);
                copies.insert(name.replace(".json", ".csv"), path.with_extension("csv"));
                true
            } else {
                false
            };
            if used {
                ledger.input(&path);
                copies.insert(name, path);
            }
        }
    }
    let kinds: BTreeSet<FigureKind> = job.kinds.iter().copied().collect();
    let figures = render_figures(&tables, &kinds, out, job.format)?;
    if figures.is_empty() {
        log::warn!("no figure could be drawn from the given runs");
    }
    ledger.artifacts.extend(figures);
    let tables_dir = out.join("tables");
    std::fs::create_dir_all(&tables_dir).map_err(|e| Error::io(&tables_dir, e))?;
    for (name, src) in copies {
        if !src.is_file() {
            continue;
        }
        let dst = tables_dir.join(&name);
        std::fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
        ledger.artifact(dst);
    }
    Ok(())
}

fn sample(job: &SampleJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let preds = read_predictions(&job.predictions, ledger)?;
    let articles = read_articles(&job.input, ledger)?;
    let mut filter = LabelVector::default();
    for l in &job.labels {
        for label in parse_label_list(l).map_err(|e| Error::Config(e.to_string()))? {
            filter.set(label, true);
        }
    }
    let rows = sample_articles(&preds, &articles, &filter, job.k, job.seed)?;
    let path = out.join("sample.csv");
    write_sample_csv(&path, &rows)?;
    ledger.artifact(path);
    Ok(())
}

fn synth(job: &SynthJob, out: &Path, ledger: &mut Ledger) -> Result<()> {
    let path = out.join("tweets.csv");
    write_senwave_csv(&path, &synthetic_tweets(job.tweets, job.seed))?;
    ledger.artifact(path);

    let window = DateWindow::study();
    let mut sections: Vec<String> = mediasent_core::corpus::STUDIED_SECTIONS
        .iter()
        .map(|s| s.to_string())
        .collect();
    sections.push("Sport".into());
    let articles = synthetic_articles(&ArticleSpec {
        count: job.articles,
        sections,
        start: window.start(),
        end: window.end(),
        pandemic_share: 0.6,
        seed: job.seed,
    });
    let path = out.join("articles.csv");
    write_articles_csv(&path, &articles)?;
    ledger.artifact(path);

    let quarters = DateWindow::pandemic().quarters();
    let deaths = synthetic_deaths("uk", &quarters, job.seed);
    let path = out.join("deaths.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["quarter", "region", "deaths"])?;
    for (q, d) in deaths.points() {
        w.write_record([q.to_string(), deaths.region.clone(), d.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    ledger.artifact(path);
    Ok(())
}
