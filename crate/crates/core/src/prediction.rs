//! Per-article classifier output and its JSON-lines file format.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelVector, ScoreVector, SentimentLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub article_id: String,
    pub scores: ScoreVector,
    pub labels: LabelVector,
    pub chunk_count: usize,
}

impl Prediction {
    pub fn new(article_id: impl Into<String>, scores: ScoreVector, threshold: f32, chunk_count: usize) -> Self {
        Prediction {
            article_id: article_id.into(),
            labels: scores.threshold(threshold),
            scores,
            chunk_count,
        }
    }

    /// Prediction carrying only labels (scores set to the 0/1 indicators).
    pub fn from_labels(article_id: impl Into<String>, labels: LabelVector) -> Self {
        let scores =
            ScoreVector::new(labels.bits().map(|b| if b { 1.0 } else { 0.0 })).expect("indicator scores are in range");
        Prediction {
            article_id: article_id.into(),
            scores,
            labels,
            chunk_count: 1,
        }
    }

    /// Assigns the highest-scoring label when thresholding left none.
    pub fn with_argmax_fallback(mut self) -> Self {
        if self.labels.is_empty() {
            self.labels = LabelVector::from_labels([argmax(&self.scores)]);
        }
        self
    }

    /// Labels equal the thresholded scores, or are the argmax fallback of
    /// an otherwise empty prediction.
    pub fn is_consistent(&self, threshold: f32) -> bool {
        let thresholded = self.scores.threshold(threshold);
        self.chunk_count >= 1
            && (thresholded == self.labels
                || (thresholded.is_empty() && self.labels == LabelVector::from_labels([argmax(&self.scores)])))
    }
}

fn argmax(scores: &ScoreVector) -> SentimentLabel {
    let v = scores.values();
    let best = (1..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    SentimentLabel::from_index(best).expect("index in range")
}

pub fn write_jsonl(path: &Path, predictions: &[Prediction]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in predictions {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Prediction>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction =
            serde_json::from_str(&line).map_err(|e| Error::Data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(p);
    }
    Ok(out)
}

/// Re-derives every label vector from its scores.
pub fn verify_consistency(predictions: &[Prediction], threshold: f32) -> Result<()> {
    match predictions.iter().find(|p| !p.is_consistent(threshold)) {
        None => Ok(()),
        Some(p) => Err(Error::Consistency(format!(
            "prediction for `{}` disagrees with its scores at threshold {threshold}",
            p.article_id
        ))),
    }
}

pub fn labels_by_id(predictions: &[Prediction]) -> HashMap<String, LabelVector> {
    predictions.iter().map(|p| (p.article_id.clone(), p.labels)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip_and_consistency() {
        let mut s = [0.1f32; 10];
        s[2] = 0.75;
        let p = Prediction::new("a1", ScoreVector::new(s).unwrap(), 0.5, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_jsonl(&path, std::slice::from_ref(&p)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"article_id\":\"a1\",\"scores\":[0.1,0.1,0.75,"));
        assert!(text.contains("\"labels\":[0,0,1,0,0,0,0,0,0,0],\"chunk_count\":2"));
        let back = read_jsonl(&path).unwrap();
        assert_eq!(back, vec![p.clone()]);
        verify_consistency(&back, 0.5).unwrap();
        assert!(verify_consistency(&back, 0.05).is_err());
    }

    #[test]
    fn argmax_fallback_fills_empty_predictions() {
        let mut s = [0.1f32; 10];
        s[4] = 0.3;
        let p = Prediction::new("a", ScoreVector::new(s).unwrap(), 0.5, 1);
        assert!(p.labels.is_empty());
        let f = p.with_argmax_fallback();
        assert_eq!(
            f.labels.labels().collect::<Vec<_>>(),
            vec![SentimentLabel::from_index(4).unwrap()]
        );
        assert!(f.is_consistent(0.5));
        assert!(!f.is_consistent(0.05));
    }
}
