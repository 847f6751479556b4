//! Named trainable tensors: pretrained values when a checkpoint provides
//! them, seeded random initialisation otherwise.

use std::collections::HashMap;

use candle_core::{DType, Device, Tensor, Var};
use candle_nn::VarMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum Init {
    Normal(f64),
    Zeros,
    Ones,
}

pub struct ParamStore {
    varmap: VarMap,
    loaded: HashMap<String, Tensor>,
    rng: ChaCha8Rng,
    dtype: DType,
    device: Device,
    /// Names resolved from `loaded` rather than initialised.
    from_checkpoint: usize,
}

impl ParamStore {
    pub fn new(loaded: HashMap<String, Tensor>, seed: u64, dtype: DType, device: Device) -> Self {
        ParamStore {
            varmap: VarMap::new(),
            loaded,
            rng: ChaCha8Rng::seed_from_u64(seed),
            dtype,
            device,
            from_checkpoint: 0,
        }
    }

    /// Looks `name` up in the checkpoint (also without its first path segment
    /// and with the old `gamma`/`beta` layer-norm spelling).
    fn lookup(&self, name: &str) -> Option<&Tensor> {
        let mut candidates = vec![name.to_string()];
        if let Some((_, rest)) = name.split_once('.') {
            candidates.push(rest.to_string());
        }
        for c in candidates.clone() {
            if let Some(stem) = c.strip_suffix("LayerNorm.weight") {
                candidates.push(format!("{stem}LayerNorm.gamma"));
            }
            if let Some(stem) = c.strip_suffix("LayerNorm.bias") {
                candidates.push(format!("{stem}LayerNorm.beta"));
            }
        }
        candidates.iter().find_map(|c| self.loaded.get(c))
    }

    pub fn get(&mut self, name: &str, shape: &[usize], init: Init) -> Result<Tensor> {
        let tensor = match self.lookup(name).cloned() {
            Some(t) => {
                if t.dims() != shape {
                    return Err(Error::Data(format!(
                        "checkpoint tensor {name} has shape {:?}, expected {shape:?}",
                        t.dims()
                    )));
                }
                self.from_checkpoint += 1;
                t.to_dtype(self.dtype)?.to_device(&self.device)?
            }
            None => {
                let n: usize = shape.iter().product();
                let values: Vec<f64> = match init {
                    Init::Zeros => vec![0.0; n],
                    Init::Ones => vec![1.0; n],
                    Init::Normal(std) => {
                        let dist = Normal::new(0.0, std).expect("positive std");
                        (0..n).map(|_| dist.sample(&mut self.rng)).collect()
                    }
                };
                Tensor::from_vec(values, shape, &self.device)?.to_dtype(self.dtype)?
            }
        };
        let var = Var::from_tensor(&tensor)?;
        let out = var.as_tensor().clone();
        self.varmap
            .data()
            .lock()
            .expect("var map lock")
            .insert(name.to_string(), var);
        Ok(out)
    }

    pub fn from_checkpoint(&self) -> usize {
        self.from_checkpoint
    }

    pub fn into_varmap(self) -> VarMap {
        self.varmap
    }
}
