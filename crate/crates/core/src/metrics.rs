//! Multi-label evaluation measures.
//!
//! Conventions: a sample whose true and predicted label sets are both empty
//! has Jaccard 1; a label with no true and no predicted positives has F1 0;
//! in LRAP tied scores share the largest rank of their tie group and samples
//! without true labels score 1.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelVector, ScoreVector, NUM_LABELS};
use crate::senwave::{fingerprint, LabeledTweet};

fn check_shapes(n_true: usize, n_other: usize) -> Result<()> {
    if n_true != n_other {
        return Err(Error::Data(format!(
            "shape mismatch: {n_true} true rows vs {n_other} predicted rows"
        )));
    }
    if n_true == 0 {
        return Err(Error::Data("metrics need at least one sample".into()));
    }
    Ok(())
}

pub fn hamming_loss(y_true: &[LabelVector], y_pred: &[LabelVector]) -> Result<f64> {
    check_shapes(y_true.len(), y_pred.len())?;
    let mismatched: usize = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t.mask() ^ p.mask()).count_ones() as usize)
        .sum();
    Ok(mismatched as f64 / (y_true.len() * NUM_LABELS) as f64)
}

/// Sample-averaged intersection over union.
pub fn jaccard_samples(y_true: &[LabelVector], y_pred: &[LabelVector]) -> Result<f64> {
    check_shapes(y_true.len(), y_pred.len())?;
    let total: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| {
            let union = (t.mask() | p.mask()).count_ones();
            if union == 0 {
                1.0
            } else {
                (t.mask() & p.mask()).count_ones() as f64 / union as f64
            }
        })
        .sum();
    Ok(total / y_true.len() as f64)
}

/// Label ranking average precision.
pub fn lrap(y_true: &[LabelVector], scores: &[ScoreVector]) -> Result<f64> {
    check_shapes(y_true.len(), scores.len())?;
    let mut total = 0.0;
    for (truth, s) in y_true.iter().zip(scores) {
        let s = s.values();
        let relevant: Vec<usize> = (0..NUM_LABELS).filter(|&j| truth.bits()[j]).collect();
        if relevant.is_empty() {
            total += 1.0;
            continue;
        }
        let mut sample = 0.0;
        for &l in &relevant {
            let rank = s.iter().filter(|&&v| v >= s[l]).count();
            let above = relevant.iter().filter(|&&j| s[j] >= s[l]).count();
            sample += above as f64 / rank as f64;
        }
        total += sample / relevant.len() as f64;
    }
    Ok(total / y_true.len() as f64)
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

impl Counts {
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

/// Returns `(macro, micro)` F1.
pub fn f1_scores(y_true: &[LabelVector], y_pred: &[LabelVector]) -> Result<(f64, f64)> {
    check_shapes(y_true.len(), y_pred.len())?;
    let mut per_label = [Counts::default(); NUM_LABELS];
    for (t, p) in y_true.iter().zip(y_pred) {
        for (c, (&tb, &pb)) in per_label.iter_mut().zip(t.bits().iter().zip(p.bits())) {
            match (tb, pb) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let macro_f1 = per_label.iter().map(Counts::f1).sum::<f64>() / NUM_LABELS as f64;
    let pooled = per_label.iter().fold(Counts::default(), |a, c| Counts {
        tp: a.tp + c.tp,
        fp: a.fp + c.fp,
        fn_: a.fn_ + c.fn_,
    });
    Ok((macro_f1, pooled.f1()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_id: String,
    pub dataset_fingerprint: String,
    pub threshold: f32,
    pub samples: usize,
    pub hamming_loss: f64,
    pub jaccard_score: f64,
    pub lrap: f64,
    pub f1_macro: f64,
    pub f1_micro: f64,
}

impl MetricsReport {
    /// Scores all five measures for one set of predictions.
    pub fn compute(
        model_id: &str,
        dataset_fingerprint: &str,
        threshold: f32,
        y_true: &[LabelVector],
        scores: &[ScoreVector],
    ) -> Result<Self> {
        crate::labels::check_threshold(threshold)?;
        let y_pred: Vec<LabelVector> = scores.iter().map(|s| s.threshold(threshold)).collect();
        let (f1_macro, f1_micro) = f1_scores(y_true, &y_pred)?;
        Ok(MetricsReport {
            model_id: model_id.to_string(),
            dataset_fingerprint: dataset_fingerprint.to_string(),
            threshold,
            samples: y_true.len(),
            hamming_loss: hamming_loss(y_true, &y_pred)?,
            jaccard_score: jaccard_samples(y_true, &y_pred)?,
            lrap: lrap(y_true, scores)?,
            f1_macro,
            f1_micro,
        })
    }

    pub fn values(&self) -> [(&'static str, f64); 5] {
        [
            ("hamming_loss", self.hamming_loss),
            ("jaccard_score", self.jaccard_score),
            ("lrap", self.lrap),
            ("f1_macro", self.f1_macro),
            ("f1_micro", self.f1_micro),
        ]
    }
}

/// One row per metric, one column per model.
pub fn write_comparison_csv<W: Write>(reports: &[MetricsReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["metric".to_string()];
    header.extend(reports.iter().map(|r| r.model_id.clone()));
    w.write_record(&header)?;
    for (i, (name, _)) in MetricsReport::values(&reports[0]).iter().enumerate() {
        let mut row = vec![name.to_string()];
        row.extend(reports.iter().map(|r| format!("{:.6}", r.values()[i].1)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_comparison_csv(reports: &[MetricsReport], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Data("no reports to compare".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_comparison_csv(reports, file)
}

/// Anything that maps texts to per-label scores.
pub trait ScoreModel {
    fn model_id(&self) -> String;
    fn score(&self, texts: &[String]) -> Result<Vec<ScoreVector>>;
}

/// Scores `model` on a labelled test set.
pub fn evaluate(model: &dyn ScoreModel, test: &[LabeledTweet], threshold: f32) -> Result<MetricsReport> {
    let texts: Vec<String> = test.iter().map(|t| t.text.clone()).collect();
    let y_true: Vec<LabelVector> = test.iter().map(|t| t.labels).collect();
    let scores = model.score(&texts)?;
    MetricsReport::compute(&model.model_id(), &fingerprint(test), threshold, &y_true, &scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::SentimentLabel::*;
    use proptest::prelude::*;

    fn lv(labels: &[crate::labels::SentimentLabel]) -> LabelVector {
        LabelVector::from_labels(labels.iter().copied())
    }

    #[test]
    fn hamming_examples() {
        let y = vec![lv(&[Sad]), lv(&[])];
        assert_eq!(hamming_loss(&y, &y).unwrap(), 0.0);
        assert!((hamming_loss(&[lv(&[Sad])], &[lv(&[])]).unwrap() - 0.1).abs() < 1e-12);
        assert!(hamming_loss(&y, &y[..1]).is_err());
        assert!(hamming_loss(&[], &[]).is_err());
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard_samples(&[lv(&[Sad])], &[lv(&[Sad])]).unwrap(), 1.0);
        let j = jaccard_samples(&[lv(&[Optimistic, Sad])], &[lv(&[Optimistic])]).unwrap();
        assert!((j - 0.5).abs() < 1e-12);
        assert_eq!(jaccard_samples(&[lv(&[])], &[lv(&[])]).unwrap(), 1.0);
    }

    fn scores(v: [f32; 10]) -> ScoreVector {
        ScoreVector::new(v).unwrap()
    }

    #[test]
    fn lrap_examples() {
        // true labels ranked 1st and 3rd
        let s = scores([0.9, 0.8, 0.7, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let v = lrap(&[lv(&[Optimistic, Empathetic])], &[s]).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-12);
        let v = lrap(&[lv(&[Optimistic, Thankful])], &[s]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(lrap(&[lv(&[])], &[s]).unwrap(), 1.0);
    }

    #[test]
    fn lrap_ties_take_the_largest_rank() {
        // the true label ties with two others at the top: rank 3, precision 1/3
        let s = scores([0.5, 0.5, 0.5, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let v = lrap(&[lv(&[Thankful])], &[s]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn f1_examples() {
        let t = vec![lv(&[Optimistic]), lv(&[Optimistic, Thankful])];
        let p = vec![lv(&[Optimistic]), lv(&[Optimistic])];
        let (ma, mi) = f1_scores(&t, &p).unwrap();
        assert!((ma - 0.1).abs() < 1e-12);
        assert!((mi - 0.8).abs() < 1e-12);
        let all: Vec<_> = (0..10).map(|i| LabelVector::from_mask(1 << i)).collect();
        assert_eq!(f1_scores(&all, &all).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn comparison_csv_layout() {
        let r = MetricsReport {
            model_id: "roberta".into(),
            dataset_fingerprint: "x".into(),
            threshold: 0.5,
            samples: 1,
            hamming_loss: 0.135,
            jaccard_score: 0.519,
            lrap: 0.774,
            f1_macro: 0.533,
            f1_micro: 0.591,
        };
        let mut buf = Vec::new();
        write_comparison_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("metric,roberta\nhamming_loss,0.135000\n"));
        assert_eq!(s.lines().count(), 6);
    }

    fn matrices() -> impl Strategy<Value = (Vec<u16>, Vec<u16>, Vec<[u8; 10]>)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(0u16..1024, n),
                prop::collection::vec(0u16..1024, n),
                prop::collection::vec(prop::array::uniform10(0u8..5), n),
            )
        })
    }

    proptest! {
        #[test]
        fn identity_properties((t, _, _) in matrices()) {
            let y: Vec<_> = t.iter().map(|&m| LabelVector::from_mask(m)).collect();
            prop_assert_eq!(hamming_loss(&y, &y).unwrap(), 0.0);
            prop_assert_eq!(jaccard_samples(&y, &y).unwrap(), 1.0);
        }

        #[test]
        fn lrap_depends_only_on_ranks((t, _, s) in matrices()) {
            let y: Vec<_> = t.iter().map(|&m| LabelVector::from_mask(m)).collect();
            let raw: Vec<_> = s.iter().map(|r| scores(r.map(|v| f32::from(v) / 4.0))).collect();
            // strictly increasing map of [0, 1] into itself
            let warped: Vec<_> = s
                .iter()
                .map(|r| scores(r.map(|v| (f32::from(v) / 4.0).powi(3) * 0.5 + 0.1)))
                .collect();
            prop_assert_eq!(lrap(&y, &raw).unwrap(), lrap(&y, &warped).unwrap());
        }

        #[test]
        fn sample_order_is_irrelevant((t, p, s) in matrices(), rot in 0usize..8) {
            let y: Vec<_> = t.iter().map(|&m| LabelVector::from_mask(m)).collect();
            let yp: Vec<_> = p.iter().map(|&m| LabelVector::from_mask(m)).collect();
            let sc: Vec<_> = s.iter().map(|r| scores(r.map(|v| f32::from(v) / 4.0))).collect();
            let k = rot % y.len();
            let (mut y2, mut yp2, mut sc2) = (y.clone(), yp.clone(), sc.clone());
            y2.rotate_left(k);
            yp2.rotate_left(k);
            sc2.rotate_left(k);
            let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
            prop_assert!(close(hamming_loss(&y, &yp).unwrap(), hamming_loss(&y2, &yp2).unwrap()));
            prop_assert!(close(jaccard_samples(&y, &yp).unwrap(), jaccard_samples(&y2, &yp2).unwrap()));
            prop_assert!(close(lrap(&y, &sc).unwrap(), lrap(&y2, &sc2).unwrap()));
            let (a, b) = f1_scores(&y, &yp).unwrap();
            let (c, d) = f1_scores(&y2, &yp2).unwrap();
            prop_assert!(close(a, c) && close(b, d));
        }
    }

    struct Perfect(Vec<LabeledTweet>);
    impl ScoreModel for Perfect {
        fn model_id(&self) -> String {
            "perfect".into()
        }
        fn score(&self, texts: &[String]) -> Result<Vec<ScoreVector>> {
            texts
                .iter()
                .map(|t| {
                    let l = self.0.iter().find(|x| &x.text == t).unwrap().labels;
                    ScoreVector::new(l.bits().map(|b| if b { 0.9 } else { 0.1 }))
                })
                .collect()
        }
    }

    struct Zero;
    impl ScoreModel for Zero {
        fn model_id(&self) -> String {
            "zero".into()
        }
        fn score(&self, texts: &[String]) -> Result<Vec<ScoreVector>> {
            Ok(texts
                .iter()
                .map(|_| ScoreVector::new([0.0; NUM_LABELS]).unwrap())
                .collect())
        }
    }

    #[test]
    fn evaluate_mock_models() {
        let test = vec![
            LabeledTweet {
                text: "a".into(),
                labels: lv(&[Optimistic]),
            },
            LabeledTweet {
                text: "b".into(),
                labels: lv(&[Sad, Annoyed]),
            },
        ];
        let perfect = evaluate(&Perfect(test.clone()), &test, 0.5).unwrap();
        assert_eq!(perfect.hamming_loss, 0.0);
        assert_eq!(perfect.jaccard_score, 1.0);
        assert_eq!(perfect.lrap, 1.0);
        assert_eq!(perfect.f1_micro, 1.0);
        let zero = evaluate(&Zero, &test, 0.5).unwrap();
        assert!((zero.hamming_loss - 0.15).abs() < 1e-12);
        assert_eq!(zero.jaccard_score, 0.0);
        assert_eq!(zero.f1_micro, 0.0);
        assert_eq!(zero.model_id, "zero");
        assert_eq!(zero.dataset_fingerprint, perfect.dataset_fingerprint);
    }
}
