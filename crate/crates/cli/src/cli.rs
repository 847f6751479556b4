//! Argument parsing and merging of flags with the configuration file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mediasent_core::corpus::{DateWindow, Quarter, EXCLUDED_SECTIONS, STUDIED_SECTIONS};
use mediasent_core::model::{EncoderFamily, ScratchDims, TrainConfig, SCRATCH_LEARNING_RATE};
use mediasent_core::report::{FigureKind, ImageFormat, RunManifest};
use mediasent_core::{Error, Result};

use crate::config::ConfigFile;
use crate::jobs::*;
use crate::run;

#[derive(Debug, Parser)]
#[command(
    name = "mediasent",
    version,
    about = "Multi-label sentiment analysis of newspaper coverage"
)]
pub struct Cli {
    /// JSON configuration with one section per module; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory for this invocation (must be new or empty).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Parent of automatically named run directories.
    #[arg(long, global = true, default_value = "runs")]
    pub runs_dir: PathBuf,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load an article dump, keep the studied sections and window.
    Ingest(IngestArgs),
    /// Clean article text for the classifier and for n-gram counting.
    Clean(CleanArgs),
    /// Top-k bigrams or trigrams for one section and quarter.
    Ngrams(NgramsArgs),
    /// Fine-tune a classifier on labelled tweets.
    Train(TrainArgs),
    /// Score saved models on a labelled test set.
    Evaluate(EvaluateArgs),
    /// Predict labels for every article.
    Predict(PredictArgs),
    /// Polarity, label distributions, quarterly table and co-occurrence.
    Polarity(PolarityArgs),
    /// Align quarterly negative sentiment with a death series.
    Timeseries(TimeseriesArgs),
    /// Render figures from tables of earlier runs.
    Report(ReportArgs),
    /// Random article sample for reading.
    Sample(SampleArgs),
    /// Write seeded synthetic tweets, articles and deaths for trying the pipeline.
    Synth(SynthArgs),
    /// Run the job recorded in a manifest again, into a new run directory.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    articles: Option<PathBuf>,
    /// JSON mapping of column names (id, date, section, title, body).
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sections: Option<Vec<String>>,
    /// pre_pandemic, pandemic, study, or START:END dates.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// Article CSV (canonical columns unless --schema is given).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    extra_stopwords: Option<PathBuf>,
    /// Keep the extra n-gram stop words out of the stop list.
    #[arg(long)]
    no_extra_stopwords: bool,
}

#[derive(Debug, Args)]
pub struct NgramsArgs {
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    section: Option<String>,
    #[arg(long)]
    quarter: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Restrict to articles predicted with any of these labels.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Predictions used by --labels.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    extra_stopwords: Option<PathBuf>,
    #[arg(long)]
    no_extra_stopwords: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// bert_base_uncased or roberta_base.
    #[arg(long)]
    encoder: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_seq_len: Option<usize>,
    /// Fraction of the dataset used for training.
    #[arg(long)]
    split: Option<f64>,
    /// Stratified subset size drawn from the training split.
    #[arg(long)]
    subset: Option<usize>,
    /// Train only the classification head.
    #[arg(long)]
    freeze_encoder: bool,
    /// Small randomly initialised encoder with a vocabulary built from the data.
    #[arg(long)]
    scratch: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model directory; repeat to compare several models.
    #[arg(long, required = true)]
    model: Vec<PathBuf>,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    threshold: Option<f32>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    threshold: Option<f32>,
    /// Give empty predictions their highest-scoring label.
    #[arg(long)]
    argmax_fallback: bool,
}

#[derive(Debug, Args)]
pub struct PolarityArgs {
    #[arg(long)]
    predictions: PathBuf,
    /// Articles for the quarterly and per-window tables.
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    exclude_official_report: bool,
}

#[derive(Debug, Args)]
pub struct TimeseriesArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    deaths: Option<PathBuf>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Section filter applied before aggregation (all sections by default).
    #[arg(long, value_delimiter = ',')]
    sections: Option<Vec<String>>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directory holding tables; repeatable.
    #[arg(long, required = true)]
    run: Vec<PathBuf>,
    /// svg (default) or png.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(short, long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    tweets: usize,
    #[arg(long, default_value_t = 400)]
    articles: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn required<T>(value: Option<T>, flag: &str, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required (or set `{key}` in the config file)")))
}

fn strategy(raw: Option<String>) -> Result<mediasent_core::analytics::PolarityStrategy> {
    match raw {
        None => Ok(Default::default()),
        Some(s) => serde_json::from_value(serde_json::Value::String(s.clone()))
            .map_err(|_| Error::Config(format!("unknown polarity strategy `{s}`"))),
    }
}

fn stopwords(flag: Option<PathBuf>, no_extras: bool, cfg: &ConfigFile) -> StopwordJob {
    StopwordJob {
        extra_stopwords: flag.or_else(|| cfg.textprep.extra_stopwords.clone()),
        apply_extras: !no_extras && cfg.textprep.apply_extra_stopwords.unwrap_or(true),
    }
}

fn articles_input(
    path: Option<PathBuf>,
    schema: Option<PathBuf>,
    cfg: &ConfigFile,
    flag: &str,
) -> Result<ArticleInput> {
    Ok(ArticleInput {
        path: required(path.or_else(|| cfg.corpus.articles.clone()), flag, "corpus.articles")?,
        schema: schema.or_else(|| cfg.corpus.schema.clone()),
    })
}

/// Resolves flags and the config file into a self-contained job.
pub fn resolve(command: Command, cfg: &ConfigFile) -> Result<Job> {
    let m = &cfg.model;
    Ok(match command {
        Command::Ingest(a) => Job::Ingest(IngestJob {
            input: articles_input(a.articles, a.schema, cfg, "articles")?,
            sections: a
                .sections
                .or_else(|| cfg.corpus.sections.clone())
                .unwrap_or_else(|| STUDIED_SECTIONS.iter().map(|s| s.to_string()).collect()),
            excluded_sections: cfg
                .corpus
                .excluded_sections
                .clone()
                .unwrap_or_else(|| EXCLUDED_SECTIONS.iter().map(|s| s.to_string()).collect()),
            window: {
                let w = a
                    .window
                    .or_else(|| cfg.corpus.window.clone())
                    .unwrap_or_else(|| "study".into());
                DateWindow::parse(&w)?;
                w
            },
        }),
        Command::Clean(a) => Job::Clean(CleanJob {
            input: articles_input(a.input, a.schema, cfg, "in")?,
            stopwords: stopwords(a.extra_stopwords, a.no_extra_stopwords, cfg),
        }),
        Command::Ngrams(a) => {
            let labels = a.labels.unwrap_or_default();
            if !labels.is_empty() && a.predictions.is_none() {
                return Err(Error::Config("--labels needs --predictions".into()));
            }
            let quarter = a
                .quarter
                .map(|q| q.parse::<Quarter>())
                .transpose()
                .map_err(|e| Error::Config(e.to_string()))?;
            Job::Ngrams(NgramsJob {
                input: articles_input(a.articles, a.schema, cfg, "articles")?,
                section: a.section,
                quarter,
                n: a.n.or(cfg.ngram.n).unwrap_or(2),
                k: a.k.or(cfg.ngram.k).unwrap_or(10),
                labels,
                predictions: a.predictions,
                stopwords: stopwords(a.extra_stopwords, a.no_extra_stopwords, cfg),
            })
        }
        Command::Train(a) => {
            let family = EncoderFamily::parse(a.encoder.as_deref().or(m.encoder.as_deref()).unwrap_or("roberta_base"))?;
            let scratch_on = a.scratch || m.scratch.unwrap_or(false);
            let mut base = TrainConfig::new(family);
            if scratch_on {
                base.learning_rate = SCRATCH_LEARNING_RATE;
            }
            let train = TrainConfig {
                encoder_family: family,
                max_seq_len: a.max_seq_len.or(m.max_seq_len).unwrap_or(base.max_seq_len),
                batch_size: a.batch_size.or(m.batch_size).unwrap_or(base.batch_size),
                epochs: a.epochs.or(m.epochs).unwrap_or(base.epochs),
                learning_rate: a.lr.or(m.learning_rate).unwrap_or(base.learning_rate),
                weight_decay: m.weight_decay.unwrap_or(base.weight_decay),
                dropout_rate: m.dropout_rate.unwrap_or(base.dropout_rate),
                seed: a.seed.or(m.seed).unwrap_or(base.seed),
                threshold: m.threshold.unwrap_or(base.threshold),
                stride: m.stride.unwrap_or(base.stride),
                freeze_encoder: a.freeze_encoder || m.freeze_encoder.unwrap_or(false),
                argmax_fallback: m.argmax_fallback.unwrap_or(false),
            };
            train.validate()?;
            let scratch = scratch_on.then(|| {
                let d = ScratchDims::default();
                ScratchJob {
                    dims: ScratchDims {
                        hidden_size: m.scratch_hidden_size.unwrap_or(d.hidden_size),
                        layers: m.scratch_layers.unwrap_or(d.layers),
                        heads: m.scratch_heads.unwrap_or(d.heads),
                        intermediate_size: m.scratch_intermediate_size.unwrap_or(d.intermediate_size),
                    },
                    vocab_words: m.scratch_vocab_words.unwrap_or(4000),
                }
            });
            Job::Train(TrainJob {
                dataset: required(a.dataset, "dataset", "")?,
                train,
                split_ratio: a.split.or(m.split_ratio).unwrap_or(0.9),
                subset: a.subset.or(m.subset),
                scratch,
            })
        }
        Command::Evaluate(a) => Job::Evaluate(EvaluateJob {
            models: a.model,
            test: a.test,
            threshold: a.threshold.or(cfg.metrics.threshold),
        }),
        Command::Predict(a) => Job::Predict(PredictJob {
            model: a.model,
            input: articles_input(a.articles, a.schema, cfg, "articles")?,
            stride: a.stride.or(m.stride),
            threshold: a.threshold.or(m.threshold),
            argmax_fallback: a.argmax_fallback || m.argmax_fallback.unwrap_or(false),
        }),
        Command::Polarity(a) => Job::Polarity(PolarityJob {
            predictions: a.predictions,
            input: match a.articles.or_else(|| cfg.corpus.articles.clone()) {
                Some(path) => Some(ArticleInput {
                    path,
                    schema: a.schema.or_else(|| cfg.corpus.schema.clone()),
                }),
                None => None,
            },
            weights: a.weights.or_else(|| cfg.analytics.weights.clone()),
            strategy: strategy(a.strategy.or_else(|| cfg.analytics.strategy.clone()))?,
            exclude_official_report: a.exclude_official_report
                || cfg.analytics.exclude_official_report.unwrap_or(false),
        }),
        Command::Timeseries(a) => Job::Timeseries(TimeseriesJob {
            predictions: a.predictions,
            input: articles_input(a.articles, a.schema, cfg, "articles")?,
            deaths: required(
                a.deaths.or_else(|| cfg.corpus.deaths.clone()),
                "deaths",
                "corpus.deaths",
            )?,
            region: required(
                a.region.or_else(|| cfg.corpus.region.clone()),
                "region",
                "corpus.region",
            )?,
            sections: a.sections.unwrap_or_default(),
            weights: a.weights.or_else(|| cfg.analytics.weights.clone()),
            strategy: strategy(a.strategy.or_else(|| cfg.analytics.strategy.clone()))?,
        }),
        Command::Report(a) => {
            let format = match a.format.or_else(|| cfg.report.format.clone()).as_deref() {
                None | Some("svg") => ImageFormat::Svg,
                Some("png") => ImageFormat::Png,
                Some(other) => return Err(Error::Config(format!("unknown image format `{other}`"))),
            };
            let kinds = match a.kinds.or_else(|| cfg.report.kinds.clone()) {
                None => FigureKind::ALL.to_vec(),
                Some(ks) => ks.iter().map(|k| FigureKind::parse(k)).collect::<Result<_>>()?,
            };
            Job::Report(ReportJob {
                runs: a.run,
                format,
                kinds,
            })
        }
        Command::Sample(a) => Job::Sample(SampleJob {
            predictions: a.predictions,
            input: articles_input(a.articles, a.schema, cfg, "articles")?,
            labels: a.labels.unwrap_or_default(),
            k: a.k,
            seed: a.seed.or(m.seed).unwrap_or(42),
        }),
        Command::Synth(a) => Job::Synth(SynthJob {
            tweets: a.tweets,
            articles: a.articles,
            seed: a.seed,
        }),
        Command::Replay(_) => unreachable!("replay is handled before resolution"),
    })
}

pub fn execute(cli: Cli) -> Result<PathBuf> {
    let job = match cli.command {
        Command::Replay(r) => {
            let manifest = RunManifest::load(&r.manifest)?;
            serde_json::from_value::<Job>(manifest.config)
                .map_err(|e| Error::Data(format!("{}: unreadable job: {e}", r.manifest.display())))?
        }
        command => {
            let cfg = match &cli.config {
                Some(path) => ConfigFile::load(path)?,
                None => ConfigFile::default(),
            };
            resolve(command, &cfg)?
        }
    };
    run::run(job, cli.out.as_deref(), &cli.runs_dir)
}
