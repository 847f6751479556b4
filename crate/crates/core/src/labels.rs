//! The ten sentiment categories and the fixed-width vectors indexed by them.
//!
//! Every vector in the crate (gold labels, predicted labels, scores, polarity
//! weights, report columns) uses the order of [`SentimentLabel::ALL`].

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const NUM_LABELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Optimistic,
    Thankful,
    Empathetic,
    Pessimistic,
    Anxious,
    Sad,
    Annoyed,
    Denial,
    OfficialReport,
    Joking,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; NUM_LABELS] = [
        SentimentLabel::Optimistic,
        SentimentLabel::Thankful,
        SentimentLabel::Empathetic,
        SentimentLabel::Pessimistic,
        SentimentLabel::Anxious,
        SentimentLabel::Sad,
        SentimentLabel::Annoyed,
        SentimentLabel::Denial,
        SentimentLabel::OfficialReport,
        SentimentLabel::Joking,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::Optimistic => "optimistic",
            SentimentLabel::Thankful => "thankful",
            SentimentLabel::Empathetic => "empathetic",
            SentimentLabel::Pessimistic => "pessimistic",
            SentimentLabel::Anxious => "anxious",
            SentimentLabel::Sad => "sad",
            SentimentLabel::Annoyed => "annoyed",
            SentimentLabel::Denial => "denial",
            SentimentLabel::OfficialReport => "official_report",
            SentimentLabel::Joking => "joking",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    /// Accepts canonical names plus the spaced/capitalised forms found in
    /// dataset headers ("Official report", "official COVID-19 report").
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let label = match key.as_str() {
            "optimistic" => SentimentLabel::Optimistic,
            "thankful" => SentimentLabel::Thankful,
            "empathetic" => SentimentLabel::Empathetic,
            "pessimistic" => SentimentLabel::Pessimistic,
            "anxious" => SentimentLabel::Anxious,
            "sad" => SentimentLabel::Sad,
            "annoyed" => SentimentLabel::Annoyed,
            "denial" => SentimentLabel::Denial,
            "official_report" | "official_covid_19_report" | "officialreport" => SentimentLabel::OfficialReport,
            "joking" => SentimentLabel::Joking,
            _ => return Err(Error::Config(format!("unknown sentiment label `{s}`"))),
        };
        Ok(label)
    }
}

/// Parses a comma separated label list such as `sad,annoyed,denial`.
pub fn parse_label_list(s: &str) -> Result<Vec<SentimentLabel>> {
    s.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(SentimentLabel::from_str)
        .collect()
}

/// Binary indicator per label. Serialised as ten 0/1 integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelVector([bool; NUM_LABELS]);

impl LabelVector {
    pub const EMPTY: LabelVector = LabelVector([false; NUM_LABELS]);

    pub fn new(bits: [bool; NUM_LABELS]) -> Self {
        LabelVector(bits)
    }

    pub fn from_labels<I: IntoIterator<Item = SentimentLabel>>(labels: I) -> Self {
        let mut bits = [false; NUM_LABELS];
        for label in labels {
            bits[label.index()] = true;
        }
        LabelVector(bits)
    }

    /// Builds a vector from the low ten bits of `mask` (bit i = label i).
    pub fn from_mask(mask: u16) -> Self {
        let mut bits = [false; NUM_LABELS];
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = mask & (1 << i) != 0;
        }
        LabelVector(bits)
    }

    pub fn mask(&self) -> u16 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| if b { acc | (1 << i) } else { acc })
    }

    pub fn try_from_ints(values: &[i64]) -> Result<Self> {
        if values.len() != NUM_LABELS {
            return Err(Error::Data(format!(
                "label vector needs {NUM_LABELS} entries, got {}",
                values.len()
            )));
        }
        let mut bits = [false; NUM_LABELS];
        for (bit, &v) in bits.iter_mut().zip(values) {
            *bit = match v {
                0 => false,
                1 => true,
                other => {
                    return Err(Error::Data(format!("label value {other} is not binary")));
                }
            };
        }
        Ok(LabelVector(bits))
    }

    pub fn get(&self, label: SentimentLabel) -> bool {
        self.0[label.index()]
    }

    pub fn set(&mut self, label: SentimentLabel, value: bool) {
        self.0[label.index()] = value;
    }

    pub fn bits(&self) -> &[bool; NUM_LABELS] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn labels(&self) -> impl Iterator<Item = SentimentLabel> + '_ {
        SentimentLabel::ALL.into_iter().filter(|l| self.get(*l))
    }

    pub fn intersects(&self, other: &LabelVector) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(&a, &b)| a && b)
    }

    pub fn to_ints(&self) -> [u8; NUM_LABELS] {
        self.0.map(u8::from)
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.labels().map(SentimentLabel::name).collect();
        f.write_str(&names.join(";"))
    }
}

impl Serialize for LabelVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_ints().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabelVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<i64>::deserialize(deserializer)?;
        LabelVector::try_from_ints(&values).map_err(D::Error::custom)
    }
}

/// Per-label probabilities produced by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ScoreVector([f32; NUM_LABELS]);

impl ScoreVector {
    pub fn new(values: [f32; NUM_LABELS]) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::Data(format!("score {bad} outside [0, 1]")));
        }
        Ok(ScoreVector(values))
    }

    pub fn from_slice(values: &[f32]) -> Result<Self> {
        let arr: [f32; NUM_LABELS] = values
            .try_into()
            .map_err(|_| Error::Data(format!("score vector needs {NUM_LABELS} entries, got {}", values.len())))?;
        Self::new(arr)
    }

    pub fn values(&self) -> &[f32; NUM_LABELS] {
        &self.0
    }

    pub fn get(&self, label: SentimentLabel) -> f32 {
        self.0[label.index()]
    }

    /// Labels with score ≥ `threshold`.
    pub fn threshold(&self, threshold: f32) -> LabelVector {
        LabelVector(self.0.map(|s| s >= threshold))
    }

    /// Weighted mean of several score vectors. Weights must be positive.
    pub fn weighted_mean(parts: &[(ScoreVector, f64)]) -> Result<ScoreVector> {
        let total: f64 = parts.iter().map(|(_, w)| *w).sum();
        if parts.is_empty() || total <= 0.0 || parts.iter().any(|(_, w)| *w <= 0.0) {
            return Err(Error::Data("weighted mean needs at least one positive weight".into()));
        }
        let mut acc = [0f64; NUM_LABELS];
        for (scores, w) in parts {
            for (a, s) in acc.iter_mut().zip(scores.0.iter()) {
                *a += *s as f64 * w;
            }
        }
        // rounding can push a mean of ones fractionally past 1
        ScoreVector::new(acc.map(|a| ((a / total) as f32).clamp(0.0, 1.0)))
    }
}

impl<'de> Deserialize<'de> for ScoreVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<f32>::deserialize(deserializer)?;
        ScoreVector::from_slice(&values).map_err(D::Error::custom)
    }
}

/// Binarises a score vector. `threshold` must lie strictly between 0 and 1.
pub fn threshold(scores: &ScoreVector, threshold: f32) -> Result<LabelVector> {
    check_threshold(threshold)?;
    Ok(scores.threshold(threshold))
}

pub fn check_threshold(threshold: f32) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold must lie in (0, 1), got {threshold}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_has_ten_distinct_labels() {
        assert_eq!(SentimentLabel::ALL.len(), 10);
        for (i, label) in SentimentLabel::ALL.iter().enumerate() {
            assert_eq!(label.index(), i);
            assert_eq!(SentimentLabel::from_index(i), Some(*label));
            assert_eq!(label.name().parse::<SentimentLabel>().unwrap(), *label);
        }
        assert_eq!(SentimentLabel::ALL[0], SentimentLabel::Optimistic);
        assert_eq!(SentimentLabel::ALL[8], SentimentLabel::OfficialReport);
        assert_eq!(SentimentLabel::ALL[9], SentimentLabel::Joking);
    }

    #[test]
    fn header_spellings_parse() {
        assert_eq!(
            "Official report".parse::<SentimentLabel>().unwrap(),
            SentimentLabel::OfficialReport
        );
        assert_eq!(" Joking ".parse::<SentimentLabel>().unwrap(), SentimentLabel::Joking);
        assert!("surprise".parse::<SentimentLabel>().is_err());
    }

    #[test]
    fn label_vector_serialises_as_ints() {
        let v = LabelVector::from_labels([SentimentLabel::Optimistic, SentimentLabel::Sad]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "[1,0,0,0,0,1,0,0,0,0]");
        let back: LabelVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<LabelVector>("[2,0,0,0,0,0,0,0,0,0]").is_err());
        assert!(serde_json::from_str::<LabelVector>("[1,0]").is_err());
    }

    #[test]
    fn mask_round_trips_every_subset() {
        for mask in 0u16..1024 {
            assert_eq!(LabelVector::from_mask(mask).mask(), mask);
        }
    }

    #[test]
    fn threshold_rules() {
        let high = ScoreVector::new([0.9; 10]).unwrap();
        let low = ScoreVector::new([0.1; 10]).unwrap();
        assert_eq!(threshold(&high, 0.5).unwrap().count(), 10);
        assert!(threshold(&low, 0.5).unwrap().is_empty());
        let mut edge = [0.0f32; 10];
        edge[3] = 0.5;
        let edge = ScoreVector::new(edge).unwrap();
        assert_eq!(
            threshold(&edge, 0.5).unwrap(),
            LabelVector::from_labels([SentimentLabel::Pessimistic])
        );
        assert!(threshold(&edge, 0.0).is_err());
        assert!(threshold(&edge, 1.0).is_err());
    }

    #[test]
    fn score_vector_rejects_out_of_range() {
        assert!(ScoreVector::new([1.5; 10]).is_err());
        assert!(ScoreVector::new([f32::NAN; 10]).is_err());
    }

    #[test]
    fn weighted_mean_of_equal_weights_is_average() {
        let a = ScoreVector::new([0.2; 10]).unwrap();
        let b = ScoreVector::new([0.6; 10]).unwrap();
        let m = ScoreVector::weighted_mean(&[(a, 5.0), (b, 5.0)]).unwrap();
        for v in m.values() {
            assert!((v - 0.4).abs() < 1e-6);
        }
    }
}
