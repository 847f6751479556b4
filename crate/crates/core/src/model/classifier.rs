//! Encoder plus a ten-way sigmoid head.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use candle_core::{DType, Device, Module, Tensor, Var};
use candle_nn::{Linear, VarMap};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{resolve_checkpoint, EncoderConfig, EncoderFamily, ScratchDims, TrainConfig};
use super::encoder::{dropout, EncodedBatch, Encoder};
use super::params::{Init, ParamStore};
use super::tokenizer::TextTokenizer;
use crate::error::{Error, Result};
use crate::labels::{LabelVector, ScoreVector, SentimentLabel, NUM_LABELS};

pub const HEAD_WEIGHT: &str = "classifier.weight";
pub const HEAD_BIAS: &str = "classifier.bias";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub fn dtype(self) -> DType {
        match self {
            Precision::F32 => DType::F32,
            Precision::F64 => DType::F64,
        }
    }
}

/// Where encoder weights and vocabulary come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderSource {
    /// Published checkpoint found through the model cache.
    Pretrained,
    /// Checkpoint directory given explicitly.
    Checkpoint(PathBuf),
    /// Seeded random encoder with a vocabulary built from `texts`.
    Scratch {
        dims: ScratchDims,
        vocab_words: usize,
        texts: Vec<String>,
    },
}

/// Metadata written next to saved weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    pub model_id: String,
    /// Output order of the classification head.
    pub labels: Vec<String>,
    pub train_config: TrainConfig,
    /// Fingerprint of the training set, when the model was fine-tuned.
    pub dataset_fingerprint: Option<String>,
    pub encoder_parameters: usize,
    pub weights_sha256: String,
    pub scratch: bool,
}

pub struct Classifier {
    encoder: Encoder,
    head: Linear,
    tokenizer: TextTokenizer,
    varmap: VarMap,
    encoder_config: EncoderConfig,
    train_config: TrainConfig,
    device: Device,
    dtype: DType,
    scratch: bool,
}

fn load_weights(path: &Path, device: &Device) -> Result<HashMap<String, Tensor>> {
    if !path.is_file() {
        return Err(Error::Environment(format!("weights file {} not found", path.display())));
    }
    Ok(candle_core::safetensors::load(path, device)?)
}

impl Classifier {
    pub fn build(source: EncoderSource, train_config: TrainConfig, precision: Precision) -> Result<Self> {
        train_config.validate()?;
        let device = Device::Cpu;
        let dtype = precision.dtype();
        let family = train_config.encoder_family;
        let (encoder_config, tokenizer, weights, scratch) = match source {
            EncoderSource::Pretrained => {
                let dir = resolve_checkpoint(family)?;
                let (c, t, w) = Self::read_checkpoint(&dir, &device)?;
                (c, t, w, false)
            }
            EncoderSource::Checkpoint(dir) => {
                let (c, t, w) = Self::read_checkpoint(&dir, &device)?;
                (c, t, w, false)
            }
            EncoderSource::Scratch {
                dims,
                vocab_words,
                texts,
            } => {
                let tokenizer = TextTokenizer::build_wordpiece(&texts, vocab_words)?;
                let config = EncoderConfig::scratch(family, tokenizer.vocab_size(), dims, train_config.max_seq_len);
                (config, tokenizer, HashMap::new(), true)
            }
        };
        Self::assemble(encoder_config, tokenizer, weights, train_config, dtype, device, scratch)
    }

    fn read_checkpoint(dir: &Path, device: &Device) -> Result<(EncoderConfig, TextTokenizer, HashMap<String, Tensor>)> {
        for file in ["config.json", "tokenizer.json", "model.safetensors"] {
            if !dir.join(file).is_file() {
                return Err(Error::Environment(format!("{file} missing from {}", dir.display())));
            }
        }
        let config = EncoderConfig::from_json_file(&dir.join("config.json"))?;
        let tokenizer = TextTokenizer::from_file(&dir.join("tokenizer.json"))?;
        let weights = load_weights(&dir.join("model.safetensors"), device)?;
        Ok((config, tokenizer, weights))
    }

    fn assemble(
        encoder_config: EncoderConfig,
        tokenizer: TextTokenizer,
        weights: HashMap<String, Tensor>,
        train_config: TrainConfig,
        dtype: DType,
        device: Device,
        scratch: bool,
    ) -> Result<Self> {
        if train_config.max_seq_len > encoder_config.max_tokens() {
            return Err(Error::Config(format!(
                "max_seq_len {} exceeds the encoder's {} positions",
                train_config.max_seq_len,
                encoder_config.max_tokens()
            )));
        }
        let had_weights = !weights.is_empty();
        let mut store = ParamStore::new(weights, train_config.seed, dtype, device.clone());
        let prefix = train_config.encoder_family.weight_prefix();
        let encoder = Encoder::new(&mut store, prefix, &encoder_config)?;
        if had_weights && store.from_checkpoint() == 0 {
            return Err(Error::Data(format!("checkpoint holds no `{prefix}` encoder weights")));
        }
        let h = encoder_config.hidden_size;
        let w = store.get(HEAD_WEIGHT, &[NUM_LABELS, h], Init::Normal(0.02))?;
        let b = store.get(HEAD_BIAS, &[NUM_LABELS], Init::Zeros)?;
        Ok(Classifier {
            encoder,
            head: Linear::new(w, Some(b)),
            tokenizer,
            varmap: store.into_varmap(),
            encoder_config,
            train_config,
            device,
            dtype,
            scratch,
        })
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.train_config
    }

    pub fn encoder_config(&self) -> &EncoderConfig {
        &self.encoder_config
    }

    pub fn tokenizer(&self) -> &TextTokenizer {
        &self.tokenizer
    }

    pub fn family(&self) -> EncoderFamily {
        self.train_config.encoder_family
    }

    pub fn is_scratch(&self) -> bool {
        self.scratch
    }

    pub fn model_id(&self) -> String {
        let base = self.family().hub_id();
        if self.scratch {
            format!("{base}-scratch")
        } else {
            base.to_string()
        }
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub(crate) fn varmap(&self) -> &VarMap {
        &self.varmap
    }

    /// Named trainable variable, e.g. [`HEAD_WEIGHT`].
    pub fn var(&self, name: &str) -> Option<Var> {
        self.varmap.data().lock().expect("var map lock").get(name).cloned()
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .varmap
            .data()
            .lock()
            .expect("var map lock")
            .keys()
            .cloned()
            .collect();
        names.sort();
        names
    }

    pub fn encoder_parameter_count(&self) -> usize {
        self.encoder_config.parameter_count()
    }

    /// Token ids of `text` with special tokens, at most `max_seq_len` long.
    pub fn encode(&self, text: &str) -> Result<Vec<u32>> {
        self.tokenizer.encode(text, self.train_config.max_seq_len)
    }

    pub fn batch(&self, sequences: &[Vec<u32>]) -> Result<EncodedBatch> {
        self.encoder.batch(sequences, &self.device)
    }

    /// Raw logits `(batch, 10)`; dropout is active only when `rng` is given.
    pub fn logits(&self, batch: &EncodedBatch, mut rng: Option<&mut ChaCha8Rng>) -> Result<Tensor> {
        let pooled = self.encoder.forward(batch, rng.as_deref_mut())?;
        let pooled = dropout(&pooled, self.train_config.dropout_rate, rng)?;
        Ok(self.head.forward(&pooled)?)
    }

    /// Mean binary cross-entropy of the logits against `targets`.
    pub fn loss(&self, batch: &EncodedBatch, targets: &[LabelVector], rng: Option<&mut ChaCha8Rng>) -> Result<Tensor> {
        let logits = self.logits(batch, rng)?;
        let y: Vec<f64> = targets
            .iter()
            .flat_map(|t| t.bits().map(|b| if b { 1.0 } else { 0.0 }))
            .collect();
        let y = Tensor::from_vec(y, (targets.len(), NUM_LABELS), &self.device)?.to_dtype(self.dtype)?;
        bce_with_logits(&logits, &y)
    }

    /// Sigmoid scores of already encoded sequences, in input order.
    pub fn score_sequences(&self, sequences: &[Vec<u32>]) -> Result<Vec<ScoreVector>> {
        let mut out = Vec::with_capacity(sequences.len());
        for chunk in sequences.chunks(self.train_config.batch_size.max(1)) {
            let batch = self.batch(chunk)?;
            let probs = candle_nn::ops::sigmoid(&self.logits(&batch, None)?)?
                .to_dtype(DType::F32)?
                .to_vec2::<f32>()?;
            for row in probs {
                let clamped: Vec<f32> = row.iter().map(|v| v.clamp(0.0, 1.0)).collect();
                out.push(ScoreVector::from_slice(&clamped)?);
            }
        }
        Ok(out)
    }

    /// Scores of short texts, each truncated to `max_seq_len` tokens.
    pub fn predict_scores<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<ScoreVector>> {
        let seqs = texts
            .iter()
            .map(|t| self.encode(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.score_sequences(&seqs)
    }

    /// Writes `config.json`, `model.safetensors`, `tokenizer.json` and
    /// `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path, dataset_fingerprint: Option<&str>) -> Result<ArtifactManifest> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let config_path = dir.join("config.json");
        let text = serde_json::to_string_pretty(&self.encoder_config)?;
        std::fs::write(&config_path, text).map_err(|e| Error::io(&config_path, e))?;
        let weights = dir.join("model.safetensors");
        self.varmap.save(&weights)?;
        self.tokenizer.save(&dir.join("tokenizer.json"))?;
        let bytes = std::fs::read(&weights).map_err(|e| Error::io(&weights, e))?;
        let manifest = ArtifactManifest {
            model_id: self.model_id(),
            labels: SentimentLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
            train_config: self.train_config.clone(),
            dataset_fingerprint: dataset_fingerprint.map(str::to_string),
            encoder_parameters: self.encoder_parameter_count(),
            weights_sha256: hex::encode(Sha256::digest(&bytes)),
            scratch: self.scratch,
        };
        let manifest_path = dir.join("manifest.json");
        std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
            .map_err(|e| Error::io(&manifest_path, e))?;
        Ok(manifest)
    }

    /// Loads a directory written by [`Classifier::save`]. Inference settings
    /// such as the threshold come from the saved manifest unless overridden
    /// afterwards with [`Classifier::set_inference`].
    pub fn load(dir: &Path, precision: Precision) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: ArtifactManifest =
            serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", manifest_path.display())))?;
        let expected: Vec<&str> = SentimentLabel::ALL.iter().map(|l| l.name()).collect();
        if manifest.labels != expected {
            return Err(Error::Data(format!(
                "{} uses label order {:?}, expected {expected:?}",
                manifest_path.display(),
                manifest.labels
            )));
        }
        let device = Device::Cpu;
        let (config, tokenizer, weights) = Self::read_checkpoint(dir, &device)?;
        let expected = [HEAD_WEIGHT, HEAD_BIAS];
        if expected.iter().any(|k| !weights.contains_key(*k)) {
            return Err(Error::Data(format!("{} has no classification head", dir.display())));
        }
        Self::assemble(
            config,
            tokenizer,
            weights,
            manifest.train_config,
            precision.dtype(),
            device,
            manifest.scratch,
        )
    }

    pub fn set_inference(&mut self, threshold: f32, stride: usize, argmax_fallback: bool) -> Result<()> {
        let cfg = TrainConfig {
            threshold,
            stride,
            argmax_fallback,
            ..self.train_config.clone()
        };
        cfg.validate()?;
        self.train_config = cfg;
        Ok(())
    }
}

/// Numerically stable `mean(max(z, 0) - z*y + log(1 + exp(-|z|)))`.
pub fn bce_with_logits(logits: &Tensor, targets: &Tensor) -> Result<Tensor> {
    let pos = logits.relu()?;
    let soft = (logits.abs()?.neg()?.exp()? + 1.0)?.log()?;
    let per = ((pos - logits.mul(targets)?)? + soft)?;
    Ok(per.mean_all()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch_source() -> EncoderSource {
        EncoderSource::Scratch {
            dims: ScratchDims {
                hidden_size: 16,
                layers: 1,
                heads: 2,
                intermediate_size: 32,
            },
            vocab_words: 50,
            texts: vec!["stay safe at home".into(), "worried about the virus".into()],
        }
    }

    #[test]
    fn stable_bce_matches_direct_formula() {
        let z = Tensor::new(&[[-30.0f64, 0.0, 2.0]], &Device::Cpu).unwrap();
        let y = Tensor::new(&[[0.0f64, 1.0, 1.0]], &Device::Cpu).unwrap();
        let got = bce_with_logits(&z, &y).unwrap().to_scalar::<f64>().unwrap();
        let direct = |z: f64, y: f64| {
            let p = 1.0 / (1.0 + (-z).exp());
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        };
        let want = (direct(-30.0, 0.0) + direct(0.0, 1.0) + direct(2.0, 1.0)) / 3.0;
        assert!((got - want).abs() < 1e-12);
        let big = Tensor::new(&[[1000.0f64, -1000.0]], &Device::Cpu).unwrap();
        let t = Tensor::new(&[[0.0f64, 1.0]], &Device::Cpu).unwrap();
        assert!((bce_with_logits(&big, &t).unwrap().to_scalar::<f64>().unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn scratch_build_is_seeded_and_scores_are_probabilities() {
        let cfg = TrainConfig {
            max_seq_len: 32,
            stride: 8,
            ..TrainConfig::new(EncoderFamily::RobertaBase)
        };
        let a = Classifier::build(scratch_source(), cfg.clone(), Precision::F32).unwrap();
        let b = Classifier::build(scratch_source(), cfg, Precision::F32).unwrap();
        let texts = ["stay safe", "the virus is worrying and long"];
        let sa = a.predict_scores(&texts).unwrap();
        assert_eq!(sa, b.predict_scores(&texts).unwrap());
        assert!(sa.iter().all(|s| s.values().iter().all(|v| (0.0..=1.0).contains(v))));
        // padding must not change a sequence's scores
        let alone = a.predict_scores(&texts[..1]).unwrap();
        for (x, y) in alone[0].values().iter().zip(sa[0].values()) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn save_and_load_reproduce_scores() {
        let cfg = TrainConfig {
            max_seq_len: 32,
            stride: 8,
            ..TrainConfig::new(EncoderFamily::BertBaseUncased)
        };
        let model = Classifier::build(scratch_source(), cfg, Precision::F32).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = model.save(dir.path(), Some("abc")).unwrap();
        assert_eq!(manifest.labels[8], "official_report");
        assert_eq!(manifest.model_id, "bert-base-uncased-scratch");
        let back = Classifier::load(dir.path(), Precision::F32).unwrap();
        let texts = ["stay safe at home"];
        assert_eq!(
            model.predict_scores(&texts).unwrap(),
            back.predict_scores(&texts).unwrap()
        );
    }

    #[test]
    fn missing_checkpoint_is_environment_error() {
        let err = Classifier::build(
            EncoderSource::Checkpoint("/nonexistent/model".into()),
            TrainConfig::new(EncoderFamily::BertBaseUncased),
            Precision::F32,
        )
        .err()
        .unwrap();
        assert_eq!(err.category(), crate::ErrorCategory::Environment);
    }
}
