//! Bigram and trigram frequency tables.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelVector, SentimentLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GramSize {
    Bigram,
    Trigram,
}

impl GramSize {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        match self {
            GramSize::Bigram => 2,
            GramSize::Trigram => 3,
        }
    }
}

impl TryFrom<usize> for GramSize {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            2 => Ok(GramSize::Bigram),
            3 => Ok(GramSize::Trigram),
            _ => Err(Error::Config(format!("n-gram size must be 2 or 3, got {n}"))),
        }
    }
}

/// Contiguous windows of `n` tokens, in order.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], n: GramSize) -> Vec<Vec<String>> {
    tokens
        .windows(n.len())
        .map(|w| w.iter().map(|t| t.as_ref().to_string()).collect())
        .collect()
}

pub type GramCounts = HashMap<Vec<String>, u64>;

/// Counts grams per document (windows never cross documents) and merges.
pub fn count_ngrams<S: AsRef<str> + Sync>(docs: &[Vec<S>], n: GramSize) -> GramCounts {
    docs.par_iter()
        .fold(GramCounts::new, |mut acc, doc| {
            for w in doc.windows(n.len()) {
                let gram: Vec<String> = w.iter().map(|t| t.as_ref().to_string()).collect();
                *acc.entry(gram).or_default() += 1;
            }
            acc
        })
        .reduce(GramCounts::new, |mut a, b| {
            for (g, c) in b {
                *a.entry(g).or_default() += c;
            }
            a
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramTable {
    pub n: usize,
    pub entries: Vec<(Vec<String>, u64)>,
}

impl NGramTable {
    /// Sorted by count descending, ties by the space-joined gram.
    pub fn from_counts(n: GramSize, counts: GramCounts, k: usize) -> Self {
        let mut entries: Vec<(String, Vec<String>, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(g, c)| (g.join(" "), g, c))
            .collect();
        entries.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(k);
        NGramTable {
            n: n.len(),
            entries: entries.into_iter().map(|(_, g, c)| (g, c)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn count_of(&self, gram: &str) -> Option<u64> {
        self.entries.iter().find(|(g, _)| g.join(" ") == gram).map(|(_, c)| *c)
    }

    pub fn grams(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.iter().map(|(g, _)| g.join(" "))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gram", "count"])?;
        for (g, c) in &self.entries {
            w.write_record([g.join(" "), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let gram: Vec<String> = rec.get(0).unwrap_or("").split(' ').map(str::to_string).collect();
            let count: u64 = rec
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::Data(format!("bad count in {}", path.display())))?;
            entries.push((gram, count));
        }
        let n = entries.first().map_or(2, |(g, _)| g.len());
        Ok(NGramTable { n, entries })
    }
}

pub fn top_k<S: AsRef<str> + Sync>(docs: &[Vec<S>], n: GramSize, k: usize) -> Result<NGramTable> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    Ok(NGramTable::from_counts(n, count_ngrams(docs, n), k))
}

/// [`top_k`] over the documents whose prediction shares at least one label
/// with `targets`.
pub fn sentiment_conditioned_ngrams(
    predictions: &HashMap<String, LabelVector>,
    docs: &[(String, Vec<String>)],
    targets: &BTreeSet<SentimentLabel>,
    n: GramSize,
    k: usize,
) -> Result<NGramTable> {
    let target = LabelVector::from_labels(targets.iter().copied());
    let mut selected = Vec::new();
    for (id, tokens) in docs {
        let labels = predictions
            .get(id)
            .ok_or_else(|| Error::Consistency(format!("no prediction for document `{id}`")))?;
        if labels.intersects(&target) {
            selected.push(tokens.clone());
        }
    }
    top_k(&selected, n, k)
}
