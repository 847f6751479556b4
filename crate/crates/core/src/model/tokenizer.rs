//! Subword tokenisation: a pretrained `tokenizer.json`, or a WordPiece
//! vocabulary built from the training text for scratch encoders.

use std::collections::HashMap;
use std::path::Path;

use tokenizers::models::bpe::Vocab;
use tokenizers::models::wordpiece::WordPiece;
use tokenizers::normalizers::BertNormalizer;
use tokenizers::pre_tokenizers::bert::BertPreTokenizer;
use tokenizers::Tokenizer;

use crate::error::{Error, Result};

pub const SCRATCH_SPECIALS: [&str; 5] = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];

pub struct TextTokenizer {
    inner: Tokenizer,
    cls: u32,
    sep: u32,
    pad: u32,
}

impl std::fmt::Debug for TextTokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextTokenizer")
            .field("vocab_size", &self.vocab_size())
            .field("cls", &self.cls)
            .field("sep", &self.sep)
            .field("pad", &self.pad)
            .finish()
    }
}

impl TextTokenizer {
    fn wrap_inner(inner: Tokenizer) -> Result<Self> {
        let find = |names: &[&str]| names.iter().find_map(|n| inner.token_to_id(n));
        let (Some(cls), Some(sep), Some(pad)) = (
            find(&["[CLS]", "<s>"]),
            find(&["[SEP]", "</s>"]),
            find(&["[PAD]", "<pad>"]),
        ) else {
            return Err(Error::Config(
                "tokenizer lacks classification, separator or padding tokens".into(),
            ));
        };
        Ok(TextTokenizer { inner, cls, sep, pad })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Environment(format!(
                "tokenizer file {} not found",
                path.display()
            )));
        }
        let inner = Tokenizer::from_file(path).map_err(|e| Error::Tokenizer(format!("{}: {e}", path.display())))?;
        Self::wrap_inner(inner)
    }

    /// WordPiece vocabulary of the special tokens, every character seen (as
    /// word start and continuation) and the `max_words` most frequent words.
    pub fn build_wordpiece<S: AsRef<str>>(texts: &[S], max_words: usize) -> Result<Self> {
        let mut words: HashMap<String, u64> = HashMap::new();
        let mut chars = std::collections::BTreeSet::new();
        for text in texts {
            for w in text.as_ref().to_lowercase().split_whitespace() {
                for piece in split_punctuation(w) {
                    chars.extend(piece.chars());
                    *words.entry(piece.to_string()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(String, u64)> = words.into_iter().filter(|(w, _)| w.chars().count() > 1).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut tokens: Vec<String> = SCRATCH_SPECIALS.iter().map(|s| s.to_string()).collect();
        for c in &chars {
            tokens.push(c.to_string());
            tokens.push(format!("##{c}"));
        }
        tokens.extend(ranked.into_iter().take(max_words).map(|(w, _)| w));
        let vocab: Vocab = tokens.into_iter().enumerate().map(|(i, t)| (t, i as u32)).collect();

        let model = WordPiece::builder()
            .vocab(vocab)
            .unk_token("[UNK]".into())
            .build()
            .map_err(|e| Error::Tokenizer(e.to_string()))?;
        let mut inner = Tokenizer::new(model);
        inner
            .with_normalizer(Some(BertNormalizer::new(true, true, None, true)))
            .map_err(|e| Error::Tokenizer(e.to_string()))?;
        inner.with_pre_tokenizer(Some(BertPreTokenizer));
        Self::wrap_inner(inner)
    }

    pub fn vocab_size(&self) -> usize {
        self.inner.get_vocab_size(true)
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    /// Content token ids without special tokens.
    pub fn encode_content(&self, text: &str) -> Result<Vec<u32>> {
        let enc = self.inner.encode(text, false)?;
        Ok(enc.get_ids().to_vec())
    }

    /// Adds the classification and separator tokens around `content`.
    pub fn wrap(&self, content: &[u32]) -> Vec<u32> {
        let mut ids = Vec::with_capacity(content.len() + 2);
        ids.push(self.cls);
        ids.extend_from_slice(content);
        ids.push(self.sep);
        ids
    }

    /// Model input for `text`, truncated to `max_seq_len` tokens including
    /// the special tokens.
    pub fn encode(&self, text: &str, max_seq_len: usize) -> Result<Vec<u32>> {
        let mut content = self.encode_content(text)?;
        content.truncate(max_seq_len.saturating_sub(2));
        Ok(self.wrap(&content))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.inner
            .save(path, false)
            .map_err(|e| Error::Tokenizer(format!("{}: {e}", path.display())))
    }
}

fn split_punctuation(word: &str) -> impl Iterator<Item = &str> {
    word.split_inclusive(|c: char| c.is_ascii_punctuation())
        .flat_map(|s| match s.char_indices().last() {
            Some((i, c)) if c.is_ascii_punctuation() => [&s[..i], &s[i..]],
            _ => [s, ""],
        })
        .filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scratch_vocab_round_trips_through_json() {
        let texts = ["stay safe everyone", "stay home and stay safe", "it's fine"];
        let tok = TextTokenizer::build_wordpiece(&texts, 100).unwrap();
        let ids = tok.encode("Stay safe", 16).unwrap();
        assert_eq!(ids.first(), Some(&2));
        assert_eq!(ids.last(), Some(&3));
        assert_eq!(ids.len(), 4);
        assert_eq!(tok.encode_content("it's").unwrap().len(), 3);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tokenizer.json");
        tok.save(&path).unwrap();
        let back = TextTokenizer::from_file(&path).unwrap();
        assert_eq!(
            back.encode("stay home zebra", 16).unwrap(),
            tok.encode("stay home zebra", 16).unwrap()
        );
        assert_eq!(back.vocab_size(), tok.vocab_size());
    }

    #[test]
    fn truncation_keeps_special_tokens() {
        let tok = TextTokenizer::build_wordpiece(&["a b c d e f g h"], 10).unwrap();
        let ids = tok.encode("a b c d e f g h", 5).unwrap();
        assert_eq!(ids.len(), 5);
        assert_eq!(ids[4], 3);
    }

    #[test]
    fn unknown_characters_map_to_unk() {
        let tok = TextTokenizer::build_wordpiece(&["abc"], 10).unwrap();
        assert_eq!(tok.encode_content("xyz").unwrap(), vec![1]);
    }
}
