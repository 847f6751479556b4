use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming the directory that holds pretrained encoders,
/// one sub-directory per family (`bert-base-uncased/`, `roberta-base/`).
pub const MODEL_CACHE_ENV: &str = "MEDIASENT_MODEL_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderFamily {
    BertBaseUncased,
    RobertaBase,
}

impl EncoderFamily {
    pub fn hub_id(self) -> &'static str {
        match self {
            EncoderFamily::BertBaseUncased => "bert-base-uncased",
            EncoderFamily::RobertaBase => "roberta-base",
        }
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            EncoderFamily::BertBaseUncased => 1e-5,
            EncoderFamily::RobertaBase => 2e-5,
        }
    }

    /// Prefix of encoder weights inside a checkpoint.
    pub fn weight_prefix(self) -> &'static str {
        match self {
            EncoderFamily::BertBaseUncased => "bert",
            EncoderFamily::RobertaBase => "roberta",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "bert_base_uncased" | "bert" => Ok(EncoderFamily::BertBaseUncased),
            "roberta_base" | "roberta" => Ok(EncoderFamily::RobertaBase),
            other => Err(Error::Config(format!("unknown encoder family `{other}`"))),
        }
    }

    /// Architecture of the published base checkpoint.
    pub fn base_config(self) -> EncoderConfig {
        match self {
            EncoderFamily::BertBaseUncased => EncoderConfig {
                model_type: "bert".into(),
                vocab_size: 30522,
                hidden_size: 768,
                num_hidden_layers: 12,
                num_attention_heads: 12,
                intermediate_size: 3072,
                max_position_embeddings: 512,
                type_vocab_size: 2,
                layer_norm_eps: 1e-12,
                pad_token_id: 0,
                hidden_dropout_prob: 0.1,
            },
            EncoderFamily::RobertaBase => EncoderConfig {
                model_type: "roberta".into(),
                vocab_size: 50265,
                hidden_size: 768,
                num_hidden_layers: 12,
                num_attention_heads: 12,
                intermediate_size: 3072,
                max_position_embeddings: 514,
                type_vocab_size: 1,
                layer_norm_eps: 1e-5,
                pad_token_id: 1,
                hidden_dropout_prob: 0.1,
            },
        }
    }
}

/// Subset of a Hugging Face `config.json` needed to build the encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default = "default_model_type")]
    pub model_type: String,
    pub vocab_size: usize,
    pub hidden_size: usize,
    pub num_hidden_layers: usize,
    pub num_attention_heads: usize,
    pub intermediate_size: usize,
    pub max_position_embeddings: usize,
    #[serde(default = "default_type_vocab")]
    pub type_vocab_size: usize,
    #[serde(default = "default_ln_eps")]
    pub layer_norm_eps: f64,
    #[serde(default)]
    pub pad_token_id: u32,
    #[serde(default = "default_dropout")]
    pub hidden_dropout_prob: f64,
}

fn default_model_type() -> String {
    "bert".into()
}
fn default_type_vocab() -> usize {
    2
}
fn default_ln_eps() -> f64 {
    1e-12
}
fn default_dropout() -> f64 {
    0.1
}

impl EncoderConfig {
    /// Small randomly initialised encoder with the family's conventions,
    /// for desk-scale runs where no pretrained checkpoint is available.
    pub fn scratch(family: EncoderFamily, vocab_size: usize, dims: ScratchDims, max_seq_len: usize) -> Self {
        let base = family.base_config();
        let offset = if base.model_type == "roberta" {
            base.pad_token_id as usize + 1
        } else {
            0
        };
        EncoderConfig {
            vocab_size,
            hidden_size: dims.hidden_size,
            num_hidden_layers: dims.layers,
            num_attention_heads: dims.heads,
            intermediate_size: dims.intermediate_size,
            max_position_embeddings: max_seq_len + offset,
            pad_token_id: 0,
            ..base
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: EncoderConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 || self.num_attention_heads == 0 {
            return Err(Error::Config("encoder needs non-zero width and heads".into()));
        }
        if !self.hidden_size.is_multiple_of(self.num_attention_heads) {
            return Err(Error::Config(format!(
                "hidden size {} not divisible by {} heads",
                self.hidden_size, self.num_attention_heads
            )));
        }
        Ok(())
    }

    pub fn is_roberta(&self) -> bool {
        self.model_type == "roberta"
    }

    /// First position id used for real tokens (RoBERTa skips past padding).
    pub fn position_offset(&self) -> usize {
        if self.is_roberta() {
            self.pad_token_id as usize + 1
        } else {
            0
        }
    }

    /// Longest token sequence the position table can hold.
    pub fn max_tokens(&self) -> usize {
        self.max_position_embeddings - self.position_offset()
    }

    /// Encoder parameter count (embeddings, layers, pooler), no head.
    pub fn parameter_count(&self) -> usize {
        let h = self.hidden_size;
        let i = self.intermediate_size;
        let embeddings = (self.vocab_size + self.max_position_embeddings + self.type_vocab_size) * h + 2 * h;
        let attention = 4 * (h * h + h) + 2 * h;
        let ffn = (h * i + i) + (i * h + h) + 2 * h;
        let pooler = h * h + h;
        embeddings + self.num_hidden_layers * (attention + ffn) + pooler
    }
}

/// Learning rate used for scratch encoders when none is given; the
/// published rates are tuned for pretrained weights.
pub const SCRATCH_LEARNING_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScratchDims {
    pub hidden_size: usize,
    pub layers: usize,
    pub heads: usize,
    pub intermediate_size: usize,
}

impl Default for ScratchDims {
    fn default() -> Self {
        ScratchDims {
            hidden_size: 128,
            layers: 2,
            heads: 4,
            intermediate_size: 256,
        }
    }
}

/// Fine-tuning and inference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub encoder_family: EncoderFamily,
    pub max_seq_len: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout_rate: f64,
    pub seed: u64,
    pub threshold: f32,
    /// Tokens shared by consecutive chunks of a long document.
    pub stride: usize,
    /// Train only the classification head.
    pub freeze_encoder: bool,
    /// Give empty predictions their highest-scoring label.
    pub argmax_fallback: bool,
}

impl TrainConfig {
    pub fn new(family: EncoderFamily) -> Self {
        TrainConfig {
            encoder_family: family,
            max_seq_len: 200,
            batch_size: 8,
            epochs: 4,
            learning_rate: family.default_learning_rate(),
            weight_decay: 0.01,
            dropout_rate: 0.3,
            seed: 42,
            threshold: 0.5,
            stride: 50,
            freeze_encoder: false,
            argmax_fallback: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::labels::check_threshold(self.threshold)?;
        if self.max_seq_len < 16 {
            return Err(Error::Config(format!("max_seq_len {} < 16", self.max_seq_len)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} invalid", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout {} not in [0, 1)", self.dropout_rate)));
        }
        if self.stride >= self.max_seq_len - 2 {
            return Err(Error::Config(format!(
                "stride {} must be smaller than the chunk window {}",
                self.stride,
                self.max_seq_len - 2
            )));
        }
        Ok(())
    }
}

/// Directory of the pretrained checkpoint for `family` inside the model cache.
pub fn resolve_checkpoint(family: EncoderFamily) -> Result<PathBuf> {
    let hint = format!(
        "download it with `huggingface-cli download {id} config.json model.safetensors tokenizer.json --local-dir $%s/{id}`",
        id = family.hub_id()
    )
    .replace("%s", MODEL_CACHE_ENV);
    let root = std::env::var_os(MODEL_CACHE_ENV).ok_or_else(|| {
        Error::Environment(format!(
            "{MODEL_CACHE_ENV} is not set, so no {} checkpoint is available; {hint}",
            family.hub_id()
        ))
    })?;
    let dir = PathBuf::from(root).join(family.hub_id());
    for file in ["config.json", "model.safetensors", "tokenizer.json"] {
        if !dir.join(file).is_file() {
            return Err(Error::Environment(format!(
                "{} missing from {}; {hint}",
                file,
                dir.display()
            )));
        }
    }
    Ok(dir)
}
