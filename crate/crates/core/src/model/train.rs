//! Fine-tuning loop.

use candle_nn::{AdamW, Optimizer, ParamsAdamW};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{Classifier, HEAD_BIAS, HEAD_WEIGHT};
use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::senwave::LabeledTweet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub batches: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStats>,
}

impl TrainTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mean_loss)
    }
}

/// Fine-tunes `model` on `data` with AdamW, in the order given by a
/// seeded shuffle per epoch. `on_epoch` sees each epoch's statistics.
pub fn train(
    model: &mut Classifier,
    data: &[LabeledTweet],
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainTrace> {
    if data.is_empty() {
        return Err(Error::Data("no training examples".into()));
    }
    let cfg = model.train_config().clone();
    cfg.validate()?;
    let vars = if cfg.freeze_encoder {
        [HEAD_WEIGHT, HEAD_BIAS].iter().filter_map(|n| model.var(n)).collect()
    } else {
        model.varmap().all_vars()
    };
    let mut opt = AdamW::new(
        vars,
        ParamsAdamW {
            lr: cfg.learning_rate,
            weight_decay: cfg.weight_decay,
            ..ParamsAdamW::default()
        },
    )?;

    let encoded = data.iter().map(|t| model.encode(&t.text)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut trace = TrainTrace::default();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let seqs: Vec<Vec<u32>> = idx.iter().map(|&i| encoded[i].clone()).collect();
            let targets: Vec<LabelVector> = idx.iter().map(|&i| data[i].labels).collect();
            let batch = model.batch(&seqs)?;
            let loss = model.loss(&batch, &targets, Some(&mut dropout_rng))?;
            let value = loss.to_dtype(candle_core::DType::F64)?.to_scalar::<f64>()?;
            if !value.is_finite() {
                return Err(Error::Diverged(format!(
                    "loss {value} at epoch {epoch} batch {b} (examples {idx:?}) with learning rate {}",
                    cfg.learning_rate
                )));
            }
            opt.backward_step(&loss)?;
            total += value;
            batches += 1;
        }
        let stats = EpochStats {
            epoch,
            mean_loss: total / batches as f64,
            batches,
        };
        log::info!("epoch {epoch}: mean loss {:.5} over {batches} batches", stats.mean_loss);
        on_epoch(&stats);
        trace.epochs.push(stats);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::SentimentLabel;
    use crate::model::{Classifier, EncoderFamily, EncoderSource, Precision, ScratchDims, TrainConfig};

    fn toy() -> Vec<LabeledTweet> {
        let mut out = Vec::new();
        for i in 0..24 {
            let (text, label) = if i % 2 == 0 {
                ("so happy and hopeful today", SentimentLabel::Optimistic)
            } else {
                ("scared and worried about the virus", SentimentLabel::Anxious)
            };
            out.push(LabeledTweet {
                text: text.into(),
                labels: LabelVector::from_labels([label]),
            });
        }
        out
    }

    fn model(lr: f64, freeze: bool) -> Classifier {
        let data = toy();
        let cfg = TrainConfig {
            max_seq_len: 16,
            stride: 4,
            epochs: 3,
            learning_rate: lr,
            freeze_encoder: freeze,
            ..TrainConfig::new(EncoderFamily::BertBaseUncased)
        };
        let source = EncoderSource::Scratch {
            dims: ScratchDims {
                hidden_size: 16,
                layers: 1,
                heads: 2,
                intermediate_size: 32,
            },
            vocab_words: 50,
            texts: data.iter().map(|t| t.text.clone()).collect(),
        };
        Classifier::build(source, cfg, Precision::F32).unwrap()
    }

    #[test]
    fn loss_decreases_and_is_reproducible() {
        let data = toy();
        let mut a = model(1e-2, false);
        let ta = train(&mut a, &data, |_| {}).unwrap();
        let l = ta.losses();
        assert!(l[2] < l[0], "{l:?}");
        let mut b = model(1e-2, false);
        assert_eq!(train(&mut b, &data, |_| {}).unwrap(), ta);
    }

    #[test]
    fn frozen_encoder_keeps_encoder_weights() {
        let data = toy();
        let mut m = model(1e-2, true);
        let name = "bert.encoder.layer.0.attention.self.query.weight";
        let before = m.var(name).unwrap().as_tensor().to_vec2::<f32>().unwrap();
        let head_before = m.var(HEAD_WEIGHT).unwrap().as_tensor().to_vec2::<f32>().unwrap();
        train(&mut m, &data, |_| {}).unwrap();
        assert_eq!(m.var(name).unwrap().as_tensor().to_vec2::<f32>().unwrap(), before);
        assert_ne!(
            m.var(HEAD_WEIGHT).unwrap().as_tensor().to_vec2::<f32>().unwrap(),
            head_before
        );
    }

    #[test]
    fn absurd_learning_rate_reports_divergence() {
        let data = toy();
        let mut m = model(1e38, false);
        match train(&mut m, &data, |_| {}) {
            Err(Error::Diverged(msg)) => assert!(msg.contains("learning rate 100000")),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
