//! BERT/RoBERTa style transformer encoder built from differentiable candle
//! ops, with weight names matching Hugging Face checkpoints.

use candle_core::{DType, Device, Module, Tensor, D};
use candle_nn::{Embedding, Linear};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::EncoderConfig;
use super::params::{Init, ParamStore};
use crate::error::Result;

const INIT_STD: f64 = 0.02;

/// Inverted dropout with a mask drawn from `rng`. Identity when `rng` is
/// `None` (evaluation) or `p == 0`.
pub fn dropout(xs: &Tensor, p: f64, rng: Option<&mut ChaCha8Rng>) -> Result<Tensor> {
    let Some(rng) = rng else {
        return Ok(xs.clone());
    };
    if p <= 0.0 {
        return Ok(xs.clone());
    }
    let scale = (1.0 / (1.0 - p)) as f32;
    let mask: Vec<f32> = (0..xs.elem_count())
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { scale })
        .collect();
    let mask = Tensor::from_vec(mask, xs.shape(), xs.device())?.to_dtype(xs.dtype())?;
    Ok(xs.mul(&mask)?)
}

struct LayerNorm {
    weight: Tensor,
    bias: Tensor,
    eps: f64,
}

impl LayerNorm {
    fn new(store: &mut ParamStore, name: &str, size: usize, eps: f64) -> Result<Self> {
        Ok(LayerNorm {
            weight: store.get(&format!("{name}.weight"), &[size], Init::Ones)?,
            bias: store.get(&format!("{name}.bias"), &[size], Init::Zeros)?,
            eps,
        })
    }

    fn forward(&self, xs: &Tensor) -> Result<Tensor> {
        Ok(candle_nn::ops::layer_norm_slow(
            xs,
            &self.weight,
            &self.bias,
            self.eps as f32,
        )?)
    }
}

fn linear(store: &mut ParamStore, name: &str, input: usize, output: usize) -> Result<Linear> {
    let w = store.get(&format!("{name}.weight"), &[output, input], Init::Normal(INIT_STD))?;
    let b = store.get(&format!("{name}.bias"), &[output], Init::Zeros)?;
    Ok(Linear::new(w, Some(b)))
}

struct Layer {
    query: Linear,
    key: Linear,
    value: Linear,
    attn_out: Linear,
    attn_norm: LayerNorm,
    intermediate: Linear,
    output: Linear,
    out_norm: LayerNorm,
}

pub struct Encoder {
    word: Embedding,
    position: Embedding,
    token_type: Embedding,
    embed_norm: LayerNorm,
    layers: Vec<Layer>,
    pooler: Linear,
    config: EncoderConfig,
}

/// Token ids and attention mask of one padded batch.
pub struct EncodedBatch {
    pub ids: Tensor,
    pub mask: Tensor,
    pub positions: Tensor,
    pub lengths: Vec<usize>,
}

impl Encoder {
    pub fn new(store: &mut ParamStore, prefix: &str, config: &EncoderConfig) -> Result<Self> {
        config.validate()?;
        let h = config.hidden_size;
        let emb = |store: &mut ParamStore, name: &str, rows: usize| -> Result<Embedding> {
            let w = store.get(
                &format!("{prefix}.embeddings.{name}.weight"),
                &[rows, h],
                Init::Normal(INIT_STD),
            )?;
            Ok(Embedding::new(w, h))
        };
        let word = emb(store, "word_embeddings", config.vocab_size)?;
        let position = emb(store, "position_embeddings", config.max_position_embeddings)?;
        let token_type = emb(store, "token_type_embeddings", config.type_vocab_size)?;
        let embed_norm = LayerNorm::new(
            store,
            &format!("{prefix}.embeddings.LayerNorm"),
            h,
            config.layer_norm_eps,
        )?;
        let mut layers = Vec::with_capacity(config.num_hidden_layers);
        for i in 0..config.num_hidden_layers {
            let p = format!("{prefix}.encoder.layer.{i}");
            layers.push(Layer {
                query: linear(store, &format!("{p}.attention.self.query"), h, h)?,
                key: linear(store, &format!("{p}.attention.self.key"), h, h)?,
                value: linear(store, &format!("{p}.attention.self.value"), h, h)?,
                attn_out: linear(store, &format!("{p}.attention.output.dense"), h, h)?,
                attn_norm: LayerNorm::new(
                    store,
                    &format!("{p}.attention.output.LayerNorm"),
                    h,
                    config.layer_norm_eps,
                )?,
                intermediate: linear(store, &format!("{p}.intermediate.dense"), h, config.intermediate_size)?,
                output: linear(store, &format!("{p}.output.dense"), config.intermediate_size, h)?,
                out_norm: LayerNorm::new(store, &format!("{p}.output.LayerNorm"), h, config.layer_norm_eps)?,
            });
        }
        let pooler = linear(store, &format!("{prefix}.pooler.dense"), h, h)?;
        Ok(Encoder {
            word,
            position,
            token_type,
            embed_norm,
            layers,
            pooler,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    /// Right-pads `sequences` with the pad id and builds mask and position ids.
    pub fn batch(&self, sequences: &[Vec<u32>], device: &Device) -> Result<EncodedBatch> {
        let len = sequences.iter().map(Vec::len).max().unwrap_or(1).max(1);
        let pad = self.config.pad_token_id;
        let offset = self.config.position_offset() as u32;
        let mut ids = Vec::with_capacity(sequences.len() * len);
        let mut mask = Vec::with_capacity(sequences.len() * len);
        let mut positions = Vec::with_capacity(sequences.len() * len);
        for seq in sequences {
            for i in 0..len {
                let real = i < seq.len();
                ids.push(if real { seq[i] } else { pad });
                mask.push(if real { 1f32 } else { 0f32 });
                positions.push(match (real, self.config.is_roberta()) {
                    (true, _) => i as u32 + offset,
                    (false, true) => pad,
                    (false, false) => i as u32,
                });
            }
        }
        let b = sequences.len();
        Ok(EncodedBatch {
            ids: Tensor::from_vec(ids, (b, len), device)?,
            mask: Tensor::from_vec(mask, (b, len), device)?,
            positions: Tensor::from_vec(positions, (b, len), device)?,
            lengths: sequences.iter().map(Vec::len).collect(),
        })
    }

    /// Pooled `[CLS]` representation, shape `(batch, hidden)`.
    pub fn forward(&self, batch: &EncodedBatch, mut rng: Option<&mut ChaCha8Rng>) -> Result<Tensor> {
        let p = self.config.hidden_dropout_prob;
        let dtype = self.word.embeddings().dtype();
        let (b, len) = batch.ids.dims2()?;
        let types = Tensor::zeros((b, len), DType::U32, batch.ids.device())?;
        let x = self
            .word
            .forward(&batch.ids)?
            .add(&self.position.forward(&batch.positions)?)?
            .add(&self.token_type.forward(&types)?)?;
        let mut x = dropout(&self.embed_norm.forward(&x)?, p, rng.as_deref_mut())?;

        // additive mask: 0 for real tokens, -1e4 for padding; (b, 1, 1, len)
        let bias = ((batch.mask.to_dtype(dtype)? - 1.0)? * 10_000.0)?.reshape((b, 1, 1, len))?;
        let heads = self.config.num_attention_heads;
        let head_dim = self.config.hidden_size / heads;
        let scale = 1.0 / (head_dim as f64).sqrt();
        for layer in &self.layers {
            let split = |t: Tensor| -> Result<Tensor> {
                Ok(t.reshape((b, len, heads, head_dim))?.transpose(1, 2)?.contiguous()?)
            };
            let q = split(layer.query.forward(&x)?)?;
            let k = split(layer.key.forward(&x)?)?;
            let v = split(layer.value.forward(&x)?)?;
            let scores = (q.matmul(&k.t()?.contiguous()?)? * scale)?.broadcast_add(&bias)?;
            let probs = candle_nn::ops::softmax(&scores, D::Minus1)?;
            let ctx = probs
                .matmul(&v)?
                .transpose(1, 2)?
                .contiguous()?
                .reshape((b, len, self.config.hidden_size))?;
            let attn = dropout(&layer.attn_out.forward(&ctx)?, p, rng.as_deref_mut())?;
            x = layer.attn_norm.forward(&(attn + &x)?)?;
            let ff = layer.intermediate.forward(&x)?.gelu_erf()?;
            let ff = dropout(&layer.output.forward(&ff)?, p, rng.as_deref_mut())?;
            x = layer.out_norm.forward(&(ff + &x)?)?;
        }
        let cls = x.narrow(1, 0, 1)?.squeeze(1)?;
        Ok(self.pooler.forward(&cls)?.tanh()?)
    }
}
