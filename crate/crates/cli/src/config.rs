//! JSON configuration file, one section per pipeline module. Command-line
//! flags take precedence over every key here.

use std::path::{Path, PathBuf};

use mediasent_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub corpus: CorpusSection,
    pub textprep: TextprepSection,
    pub ngram: NgramSection,
    pub model: ModelSection,
    pub metrics: MetricsSection,
    pub analytics: AnalyticsSection,
    pub report: ReportSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub articles: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub sections: Option<Vec<String>>,
    pub excluded_sections: Option<Vec<String>>,
    /// `pre_pandemic`, `pandemic`, `study` or `YYYY-MM-DD:YYYY-MM-DD`.
    pub window: Option<String>,
    pub deaths: Option<PathBuf>,
    pub region: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub extra_stopwords: Option<PathBuf>,
    pub apply_extra_stopwords: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramSection {
    pub n: Option<usize>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub encoder: Option<String>,
    pub max_seq_len: Option<usize>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub dropout_rate: Option<f64>,
    pub seed: Option<u64>,
    pub threshold: Option<f32>,
    pub stride: Option<usize>,
    pub freeze_encoder: Option<bool>,
    pub argmax_fallback: Option<bool>,
    pub split_ratio: Option<f64>,
    pub subset: Option<usize>,
    /// Randomly initialised small encoder instead of a pretrained one.
    pub scratch: Option<bool>,
    pub scratch_hidden_size: Option<usize>,
    pub scratch_layers: Option<usize>,
    pub scratch_heads: Option<usize>,
    pub scratch_intermediate_size: Option<usize>,
    pub scratch_vocab_words: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub threshold: Option<f32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticsSection {
    pub weights: Option<PathBuf>,
    /// `normalized_absolute` or `scaled_by_max_weight`.
    pub strategy: Option<String>,
    pub exclude_official_report: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// `svg` or `png`.
    pub format: Option<String>,
    pub kinds: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let ok: ConfigFile = serde_json::from_str(r#"{"model": {"epochs": 2}}"#).unwrap();
        assert_eq!(ok.model.epochs, Some(2));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"model": {"epoch": 2}}"#).is_err());
    }
}
