//! Transformer encoder classifier: configuration, weights, tokenisation,
//! fine-tuning and chunked document inference.

pub mod chunk;
pub mod classifier;
pub mod config;
pub mod encoder;
pub mod params;
pub mod tokenizer;
pub mod train;

pub use chunk::{chunk_spans, predict_articles, predict_document, ArticlePredictions};
pub use classifier::{bce_with_logits, ArtifactManifest, Classifier, EncoderSource, Precision, HEAD_BIAS, HEAD_WEIGHT};
pub use config::{
    resolve_checkpoint, EncoderConfig, EncoderFamily, ScratchDims, TrainConfig, MODEL_CACHE_ENV, SCRATCH_LEARNING_RATE,
};
pub use tokenizer::TextTokenizer;
pub use train::{train, EpochStats, TrainTrace};

impl crate::metrics::ScoreModel for Classifier {
    fn model_id(&self) -> String {
        Classifier::model_id(self)
    }

    fn score(&self, texts: &[String]) -> crate::Result<Vec<crate::ScoreVector>> {
        self.predict_scores(texts)
    }
}
