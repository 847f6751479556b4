//! Sliding-window inference over documents longer than the encoder input.

use super::classifier::Classifier;
use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::labels::ScoreVector;
use crate::prediction::Prediction;
use crate::textprep::clean_for_model;

/// Half-open token ranges covering `n_tokens` with windows of `window`
/// tokens, consecutive windows sharing `stride` tokens.
pub fn chunk_spans(n_tokens: usize, window: usize, stride: usize) -> Result<Vec<(usize, usize)>> {
    if window == 0 || stride >= window {
        return Err(Error::Config(format!(
            "stride {stride} must be smaller than window {window}"
        )));
    }
    if n_tokens == 0 {
        return Ok(Vec::new());
    }
    let step = window - stride;
    let mut spans = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + window).min(n_tokens);
        spans.push((start, end));
        if end == n_tokens {
            return Ok(spans);
        }
        start += step;
    }
}

/// Model-ready chunks of one cleaned text: ids with special tokens and the
/// number of content tokens in each.
pub fn chunk_document(model: &Classifier, cleaned: &str) -> Result<Vec<(Vec<u32>, usize)>> {
    let content = model.tokenizer().encode_content(cleaned)?;
    let cfg = model.train_config();
    let window = cfg.max_seq_len - 2;
    Ok(chunk_spans(content.len(), window, cfg.stride)?
        .into_iter()
        .map(|(s, e)| (model.tokenizer().wrap(&content[s..e]), e - s))
        .collect())
}

/// Token-count weighted mean of chunk scores. A single chunk is returned
/// unchanged.
pub fn aggregate_chunks(parts: &[(ScoreVector, usize)]) -> Result<ScoreVector> {
    match parts {
        [] => Err(Error::Data("no chunks to aggregate".into())),
        [(only, _)] => Ok(*only),
        _ => {
            let weighted: Vec<(ScoreVector, f64)> = parts.iter().map(|(s, n)| (*s, *n as f64)).collect();
            ScoreVector::weighted_mean(&weighted)
        }
    }
}

/// Scores of one document, or `None` when it has no tokens after cleaning.
pub fn predict_document(model: &Classifier, raw: &str) -> Result<Option<(ScoreVector, usize)>> {
    let chunks = chunk_document(model, &clean_for_model(raw))?;
    if chunks.is_empty() {
        return Ok(None);
    }
    let seqs: Vec<Vec<u32>> = chunks.iter().map(|(ids, _)| ids.clone()).collect();
    let scores = model.score_sequences(&seqs)?;
    let parts: Vec<(ScoreVector, usize)> = scores.into_iter().zip(chunks.iter().map(|c| c.1)).collect();
    Ok(Some((aggregate_chunks(&parts)?, parts.len())))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArticlePredictions {
    pub predictions: Vec<Prediction>,
    /// Articles whose body was empty after cleaning.
    pub skipped: Vec<String>,
}

/// Predicts every article body, batching chunks across articles.
pub fn predict_articles(model: &Classifier, articles: &[Article]) -> Result<ArticlePredictions> {
    let cfg = model.train_config();
    let mut out = ArticlePredictions::default();
    let mut owners = Vec::new();
    let mut seqs = Vec::new();
    let mut sizes = Vec::new();
    for (i, article) in articles.iter().enumerate() {
        let chunks = chunk_document(model, &clean_for_model(&article.body))?;
        if chunks.is_empty() {
            log::warn!("article {} has an empty body after cleaning; skipped", article.id);
            out.skipped.push(article.id.clone());
            continue;
        }
        for (ids, n) in chunks {
            owners.push(i);
            seqs.push(ids);
            sizes.push(n);
        }
    }
    let scores = model.score_sequences(&seqs)?;
    let mut start = 0;
    while start < owners.len() {
        let owner = owners[start];
        let end = owners[start..]
            .iter()
            .position(|&o| o != owner)
            .map_or(owners.len(), |p| start + p);
        let parts: Vec<(ScoreVector, usize)> = (start..end).map(|k| (scores[k], sizes[k])).collect();
        let agg = aggregate_chunks(&parts)?;
        let mut p = Prediction::new(articles[owner].id.clone(), agg, cfg.threshold, parts.len());
        if cfg.argmax_fallback {
            p = p.with_argmax_fallback();
        }
        out.predictions.push(p);
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_for_long_document() {
        let spans = chunk_spans(400, 200, 50).unwrap();
        assert_eq!(spans, vec![(0, 200), (150, 350), (300, 400)]);
        let starts: Vec<usize> = spans.iter().map(|s| s.0).collect();
        assert_eq!(starts, vec![0, 150, 300]);
    }

    #[test]
    fn short_and_exact_documents_fit_one_chunk() {
        assert_eq!(chunk_spans(10, 198, 50).unwrap(), vec![(0, 10)]);
        assert_eq!(chunk_spans(198, 198, 50).unwrap(), vec![(0, 198)]);
        assert_eq!(chunk_spans(199, 198, 50).unwrap(), vec![(0, 198), (148, 199)]);
        assert!(chunk_spans(0, 198, 50).unwrap().is_empty());
        assert!(chunk_spans(10, 50, 50).is_err());
    }

    #[test]
    fn spans_cover_every_token() {
        for n in 1..600 {
            let spans = chunk_spans(n, 198, 50).unwrap();
            assert_eq!(spans[0].0, 0);
            assert_eq!(spans.last().unwrap().1, n);
            for w in spans.windows(2) {
                assert_eq!(w[0].1 - w[1].0, 50.min(w[0].1 - w[0].0));
            }
        }
    }

    #[test]
    fn weighted_mean_of_chunks() {
        let a = ScoreVector::new([0.2; 10]).unwrap();
        let b = ScoreVector::new([0.8; 10]).unwrap();
        let m = aggregate_chunks(&[(a, 100), (b, 300)]).unwrap();
        assert!((m.values()[0] - 0.65).abs() < 1e-6);
        assert_eq!(aggregate_chunks(&[(a, 7)]).unwrap(), a);
    }
}
