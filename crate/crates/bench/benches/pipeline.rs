use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use mediasent_core::analytics::{cooccurrence_matrix, polarity_score, PolarityWeights};
use mediasent_core::metrics::MetricsReport;
use mediasent_core::model::{
    chunk_spans, predict_articles, Classifier, EncoderFamily, EncoderSource, Precision, ScratchDims, TrainConfig,
};
use mediasent_core::ngram::{top_k, GramSize};
use mediasent_core::synth::{synthetic_predictions, synthetic_tweets, world_news_2020_q1};
use mediasent_core::textprep::{clean_for_model, CleanedDoc, StopwordPolicy};
use mediasent_core::{LabelVector, ScoreVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 2000;
    let truth: Vec<LabelVector> = (0..n).map(|_| LabelVector::from_mask(rng.gen_range(0..1024))).collect();
    let scores: Vec<ScoreVector> = (0..n)
        .map(|_| ScoreVector::new(std::array::from_fn(|_| rng.gen::<f32>())).unwrap())
        .collect();
    c.bench_function("metrics/report_2000", |b| {
        b.iter(|| MetricsReport::compute("bench", "", 0.5, black_box(&truth), black_box(&scores)).unwrap())
    });
}

fn text(c: &mut Criterion) {
    let articles = world_news_2020_q1();
    let tweets = synthetic_tweets(1000, 3);
    let policy = StopwordPolicy::default();
    c.bench_function("textprep/clean_1000_tweets", |b| {
        b.iter(|| {
            tweets
                .iter()
                .map(|t| clean_for_model(black_box(&t.text)).len())
                .sum::<usize>()
        })
    });
    let docs: Vec<Vec<String>> = articles
        .iter()
        .map(|a| CleanedDoc::from_text(&a.id, &a.body, &policy).ngram_tokens)
        .collect();
    c.bench_function("ngram/top10_bigrams_200_articles", |b| {
        b.iter(|| top_k(black_box(&docs), GramSize::Bigram, 10).unwrap())
    });
}

fn analytics(c: &mut Criterion) {
    let ids: Vec<String> = (0..5000).map(|i| format!("a{i}")).collect();
    let preds = synthetic_predictions(&ids, 0.5, 4);
    let weights = PolarityWeights::default();
    c.bench_function("analytics/polarity_5000", |b| {
        b.iter(|| preds.iter().map(|p| polarity_score(&p.labels, &weights)).sum::<f64>())
    });
    c.bench_function("analytics/cooccurrence_5000", |b| {
        b.iter(|| cooccurrence_matrix(black_box(&preds)).unwrap())
    });
}

fn inference(c: &mut Criterion) {
    c.bench_function("model/chunk_spans_10k_tokens", |b| {
        b.iter(|| chunk_spans(black_box(10_000), 198, 50).unwrap())
    });
    let articles: Vec<_> = world_news_2020_q1().into_iter().take(20).collect();
    let cfg = TrainConfig {
        max_seq_len: 128,
        ..TrainConfig::new(EncoderFamily::RobertaBase)
    };
    let source = EncoderSource::Scratch {
        dims: ScratchDims::default(),
        vocab_words: 2000,
        texts: articles.iter().map(|a| a.body.clone()).collect(),
    };
    let model = Classifier::build(source, cfg, Precision::F32).unwrap();
    let mut group = c.benchmark_group("model");
    group.sample_size(10);
    group.bench_function("predict_20_articles_scratch", |b| {
        b.iter_batched(
            || articles.clone(),
            |a| predict_articles(&model, &a).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().without_plots();
    targets = metrics, text, analytics, inference
}
criterion_main!(benches);
