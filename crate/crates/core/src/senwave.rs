//! Expert-labelled tweet dataset used for fine-tuning.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::labels::{LabelVector, SentimentLabel, NUM_LABELS};
use crate::textprep::clean_tweet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTweet {
    pub text: String,
    pub labels: LabelVector,
}

/// Header names for the text column and the ten label columns, in canonical
/// label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenwaveColumns {
    pub text: String,
    pub labels: [String; NUM_LABELS],
}

impl Default for SenwaveColumns {
    fn default() -> Self {
        SenwaveColumns {
            text: "Tweet".into(),
            labels: [
                "Optimistic",
                "Thankful",
                "Empathetic",
                "Pessimistic",
                "Anxious",
                "Sad",
                "Annoyed",
                "Denial",
                "Official report",
                "Joking",
            ]
            .map(String::from),
        }
    }
}

impl SenwaveColumns {
    /// Canonical snake_case names, as written by [`write_senwave_csv`].
    pub fn canonical() -> Self {
        SenwaveColumns {
            text: "text".into(),
            labels: SentimentLabel::ALL.map(|l| l.name().to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedTweets {
    pub tweets: Vec<LabeledTweet>,
    /// Rows whose text was empty after cleaning.
    pub dropped_empty: usize,
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
}

/// Loads a labelled CSV. Column lookup is case-insensitive; if the configured
/// headers are absent the canonical snake_case headers are tried.
pub fn load_senwave(path: &Path, columns: &SenwaveColumns) -> Result<LoadedTweets> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let resolve = |cols: &SenwaveColumns| -> Option<(usize, [usize; NUM_LABELS])> {
        let text = find_column(&headers, &cols.text)?;
        let mut idx = [0usize; NUM_LABELS];
        for (slot, name) in idx.iter_mut().zip(&cols.labels) {
            *slot = find_column(&headers, name)?;
        }
        Some((text, idx))
    };
    let (text_col, label_cols) = resolve(columns)
        .or_else(|| resolve(&SenwaveColumns::canonical()))
        .ok_or_else(|| {
            let missing: Vec<&str> = std::iter::once(&columns.text)
                .chain(&columns.labels)
                .filter(|n| find_column(&headers, n).is_none())
                .map(String::as_str)
                .collect();
            Error::Config(format!("{}: missing column(s) {}", path.display(), missing.join(", ")))
        })?;

    let mut tweets = Vec::new();
    let mut dropped_empty = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = [0i64; NUM_LABELS];
        for (v, &col) in values.iter_mut().zip(&label_cols) {
            let cell = record.get(col).unwrap_or("").trim();
            *v = match cell {
                "0" | "0.0" => 0,
                "1" | "1.0" => 1,
                other => {
                    return Err(Error::Data(format!(
                        "{} row {}: label cell `{other}` is not 0 or 1",
                        path.display(),
                        row + 2
                    )))
                }
            };
        }
        let text = clean_tweet(record.get(text_col).unwrap_or(""));
        if text.is_empty() {
            dropped_empty += 1;
            continue;
        }
        tweets.push(LabeledTweet {
            text,
            labels: LabelVector::try_from_ints(&values)?,
        });
    }
    if dropped_empty > 0 {
        log::warn!("{}: dropped {dropped_empty} rows empty after cleaning", path.display());
    }
    Ok(LoadedTweets { tweets, dropped_empty })
}

/// Writes tweets with canonical headers; text is written as-is.
pub fn write_senwave_csv(path: &Path, tweets: &[LabeledTweet]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let cols = SenwaveColumns::canonical();
    let mut header = vec![cols.text.clone()];
    header.extend(cols.labels.iter().cloned());
    w.write_record(&header)?;
    for t in tweets {
        let mut rec = vec![t.text.clone()];
        rec.extend(t.labels.to_ints().iter().map(|b| b.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Seeded uniform shuffle followed by a prefix/suffix cut;
/// `round(ratio * N)` items go to the first part.
pub fn split<T: Clone>(dataset: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (ratio * dataset.len() as f64).round() as usize;
    let train = order[..n_train].iter().map(|&i| dataset[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| dataset[i].clone()).collect();
    Ok((train, test))
}

/// Draws `n` tweets keeping each label-set stratum at its share of the data
/// (largest-remainder rounding). Output order follows the input order.
pub fn stratified_subset(dataset: &[LabeledTweet], n: usize, seed: u64) -> Vec<LabeledTweet> {
    if n >= dataset.len() {
        return dataset.to_vec();
    }
    let mut strata: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (i, t) in dataset.iter().enumerate() {
        strata.entry(t.labels.mask()).or_default().push(i);
    }
    let total = dataset.len() as f64;
    let mut quotas: Vec<(u16, usize, f64)> = strata
        .iter()
        .map(|(&k, v)| {
            let exact = v.len() as f64 * n as f64 / total;
            (k, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut remaining = n - quotas.iter().map(|q| q.1).sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        quotas[b]
            .2
            .partial_cmp(&quotas[a].2)
            .unwrap()
            .then(quotas[a].0.cmp(&quotas[b].0))
    });
    for i in by_remainder {
        if remaining == 0 {
            break;
        }
        quotas[i].1 += 1;
        remaining -= 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(n);
    for (key, quota, _) in quotas {
        let mut members = strata[&key].clone();
        members.shuffle(&mut rng);
        chosen.extend(members.into_iter().take(quota));
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| dataset[i].clone()).collect()
}

/// Share of tweets carrying each label.
pub fn label_prevalence(tweets: &[LabeledTweet]) -> [f64; NUM_LABELS] {
    let mut counts = [0f64; NUM_LABELS];
    for t in tweets {
        for (c, &b) in counts.iter_mut().zip(t.labels.bits()) {
            *c += f64::from(u8::from(b));
        }
    }
    let n = tweets.len().max(1) as f64;
    counts.map(|c| c / n)
}

/// SHA-256 over texts and labels, used to tie artifacts to their data.
pub fn fingerprint(tweets: &[LabeledTweet]) -> String {
    let mut h = Sha256::new();
    for t in tweets {
        h.update(t.text.as_bytes());
        h.update([0]);
        h.update(t.labels.mask().to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;
    use std::io::Write;

    fn csv_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "ID,Tweet,Optimistic,Thankful,Empathetic,Pessimistic,Anxious,Sad,Annoyed,Denial,Surprise,Official report,Joking\n";

    #[test]
    fn maps_columns_by_name_not_position() {
        let f = csv_file(&format!(
            "{HEADER}1,stay strong,1,0,0,0,0,0,0,0,1,0,0\n2,@someone,0,0,0,0,0,0,0,0,0,0,1\n"
        ));
        let loaded = load_senwave(f.path(), &SenwaveColumns::default()).unwrap();
        assert_eq!(loaded.tweets.len(), 1);
        assert_eq!(loaded.dropped_empty, 1);
        assert_eq!(loaded.tweets[0].text, "stay strong");
        // the Surprise column is not one of ours and is ignored
        assert_eq!(
            loaded.tweets[0].labels,
            LabelVector::from_labels([SentimentLabel::Optimistic])
        );
    }

    #[test]
    fn non_binary_cell_is_fatal() {
        let f = csv_file(&format!("{HEADER}1,hi,2,0,0,0,0,0,0,0,0,0,0\n"));
        assert!(matches!(
            load_senwave(f.path(), &SenwaveColumns::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let f = csv_file("Tweet,Optimistic\nhi,1\n");
        assert!(matches!(
            load_senwave(f.path(), &SenwaveColumns::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn canonical_csv_round_trip() {
        let tweets = vec![LabeledTweet {
            text: "masks work".into(),
            labels: LabelVector::from_labels([SentimentLabel::Optimistic, SentimentLabel::Joking]),
        }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_senwave_csv(&p, &tweets).unwrap();
        let back = load_senwave(&p, &SenwaveColumns::default()).unwrap();
        assert_eq!(back.tweets, tweets);
    }

    #[test]
    fn split_sizes() {
        let data: Vec<usize> = (0..10_000).collect();
        let (tr, te) = split(&data, 0.9, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (9000, 1000));
        let small: Vec<usize> = (0..10).collect();
        assert_eq!(split(&small, 0.9, 3).unwrap(), split(&small, 0.9, 3).unwrap());
        let (a, b) = split(&[1, 2, 3, 4], 0.5, 1).unwrap();
        assert_eq!((a.len(), b.len()), (2, 2));
        assert!(a.iter().all(|x| !b.contains(x)));
        assert!(split(&small, 1.0, 0).is_err());
        assert!(split(&small, 0.0, 0).is_err());
    }

    #[test]
    fn stratified_subset_keeps_proportions() {
        let mk = |mask: u16, i: usize| LabeledTweet {
            text: format!("t{i}"),
            labels: LabelVector::from_mask(mask),
        };
        let data: Vec<_> = (0..1000).map(|i| mk(if i % 4 == 0 { 1 } else { 2 }, i)).collect();
        let sub = stratified_subset(&data, 100, 5);
        assert_eq!(sub.len(), 100);
        assert_eq!(sub.iter().filter(|t| t.labels.mask() == 1).count(), 25);
        assert_eq!(sub, stratified_subset(&data, 100, 5));
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 0usize..60, ratio in 0.05f64..0.95, seed in any::<u64>()) {
            let data: Vec<usize> = (0..n).collect();
            let (a, b) = split(&data, ratio, seed).unwrap();
            let sa: BTreeSet<_> = a.iter().copied().collect();
            let sb: BTreeSet<_> = b.iter().copied().collect();
            prop_assert!(sa.is_disjoint(&sb));
            prop_assert_eq!(sa.len() + sb.len(), n);
            prop_assert_eq!(a.len(), (ratio * n as f64).round() as usize);
        }
    }
}
