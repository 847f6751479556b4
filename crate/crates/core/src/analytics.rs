//! Polarity scores, label distributions, quarterly aggregates, label
//! co-occurrence and alignment with external death counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, DeathSeries, Quarter};
use crate::error::{Error, Result};
use crate::labels::{LabelVector, SentimentLabel, NUM_LABELS};
use crate::prediction::Prediction;

/// Integer weight per label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarityWeights([i32; NUM_LABELS]);

impl Default for PolarityWeights {
    fn default() -> Self {
        // optimistic, thankful, empathetic, pessimistic, anxious,
        // sad, annoyed, denial, official_report, joking
        PolarityWeights([3, 2, 0, -3, -2, -2, -1, -4, 0, 1])
    }
}

impl PolarityWeights {
    pub fn new(weights: [i32; NUM_LABELS]) -> Self {
        PolarityWeights(weights)
    }

    pub fn get(&self, label: SentimentLabel) -> i32 {
        self.0[label.index()]
    }

    pub fn as_array(&self) -> &[i32; NUM_LABELS] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        PolarityWeights(self.0.map(|w| -w))
    }

    /// Reads a JSON object mapping every label name to an integer.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: BTreeMap<String, i32> =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("weights {}: {e}", path.display())))?;
        let mut weights = [None; NUM_LABELS];
        for (name, w) in map {
            let label: SentimentLabel = name.parse()?;
            weights[label.index()] = Some(w);
        }
        let mut out = [0; NUM_LABELS];
        for (i, w) in weights.into_iter().enumerate() {
            out[i] = w.ok_or_else(|| {
                Error::Config(format!(
                    "weights {}: no weight for `{}`",
                    path.display(),
                    SentimentLabel::ALL[i]
                ))
            })?;
        }
        Ok(PolarityWeights(out))
    }
}

impl Serialize for PolarityWeights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, i32> = SentimentLabel::ALL.iter().map(|l| (l.name(), self.get(*l))).collect();
        map.serialize(s)
    }
}

/// How a predicted label set and weights combine into a score in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityStrategy {
    /// Σw / Σ|w| over the predicted labels.
    #[default]
    NormalizedAbsolute,
    /// Σw / (|predicted| · max |w| over all labels).
    ScaledByMaxWeight,
}

pub fn polarity_score(labels: &LabelVector, weights: &PolarityWeights) -> f64 {
    polarity_score_with(labels, weights, PolarityStrategy::NormalizedAbsolute)
}

pub fn polarity_score_with(labels: &LabelVector, weights: &PolarityWeights, strategy: PolarityStrategy) -> f64 {
    let ws: Vec<i64> = labels.labels().map(|l| i64::from(weights.get(l))).collect();
    let sum: i64 = ws.iter().sum();
    let denom = match strategy {
        PolarityStrategy::NormalizedAbsolute => ws.iter().map(|w| w.abs()).sum::<i64>(),
        PolarityStrategy::ScaledByMaxWeight => {
            let max = weights.0.iter().map(|w| i64::from(*w).abs()).max().unwrap_or(0);
            ws.len() as i64 * max
        }
    };
    if denom == 0 {
        0.0
    } else {
        sum as f64 / denom as f64
    }
}

/// Named column of label counts, as written by [`write_distribution_csv`].
pub type DistributionColumn = (String, Vec<(SentimentLabel, u64)>);

/// Label-instance counts in canonical order. With `exclude_official_report`
/// the official-report entry is left out.
pub fn sentiment_distribution(predictions: &[Prediction], exclude_official_report: bool) -> Vec<(SentimentLabel, u64)> {
    let mut counts = [0u64; NUM_LABELS];
    for p in predictions {
        for l in p.labels.labels() {
            counts[l.index()] += 1;
        }
    }
    SentimentLabel::ALL
        .iter()
        .filter(|l| !(exclude_official_report && **l == SentimentLabel::OfficialReport))
        .map(|l| (*l, counts[l.index()]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterlySentiment {
    pub quarter: Quarter,
    pub section: String,
    pub label_counts: [u64; NUM_LABELS],
    pub article_count: u64,
    pub mean_polarity: f64,
}

impl QuarterlySentiment {
    pub fn negative_count(&self, negative: &BTreeSet<SentimentLabel>) -> u64 {
        negative.iter().map(|l| self.label_counts[l.index()]).sum()
    }
}

/// Groups predictions by (section, quarter of publication), ordered by
/// section then quarter.
pub fn quarterly_aggregate(
    predictions: &[Prediction],
    articles: &[Article],
    weights: &PolarityWeights,
    strategy: PolarityStrategy,
) -> Result<Vec<QuarterlySentiment>> {
    let by_id: HashMap<&str, &Article> = articles.iter().map(|a| (a.id.as_str(), a)).collect();
    #[derive(Default)]
    struct Acc {
        counts: [u64; NUM_LABELS],
        n: u64,
        polarity_sum: f64,
    }
    let mut groups: BTreeMap<(String, Quarter), Acc> = BTreeMap::new();
    for p in predictions {
        let article = by_id
            .get(p.article_id.as_str())
            .ok_or_else(|| Error::Consistency(format!("prediction `{}` has no matching article", p.article_id)))?;
        let acc = groups.entry((article.section.clone(), article.quarter())).or_default();
        for l in p.labels.labels() {
            acc.counts[l.index()] += 1;
        }
        acc.n += 1;
        acc.polarity_sum += polarity_score_with(&p.labels, weights, strategy);
    }
    Ok(groups
        .into_iter()
        .map(|((section, quarter), acc)| QuarterlySentiment {
            quarter,
            section,
            label_counts: acc.counts,
            article_count: acc.n,
            mean_polarity: acc.polarity_sum / acc.n as f64,
        })
        .collect())
}

pub fn write_quarterly_csv<W: Write>(rows: &[QuarterlySentiment], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["quarter".to_string(), "section".to_string()];
    header.extend(SentimentLabel::ALL.iter().map(|l| l.name().to_string()));
    header.push("article_count".into());
    header.push("mean_polarity".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.quarter.to_string(), r.section.clone()];
        rec.extend(r.label_counts.iter().map(u64::to_string));
        rec.push(r.article_count.to_string());
        rec.push(format!("{:.6}", r.mean_polarity));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_quarterly_csv(path: &Path) -> Result<Vec<QuarterlySentiment>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = || Error::Data(format!("malformed quarterly row in {}", path.display()));
        if rec.len() != NUM_LABELS + 4 {
            return Err(bad());
        }
        let mut label_counts = [0u64; NUM_LABELS];
        for (i, c) in label_counts.iter_mut().enumerate() {
            *c = rec[i + 2].parse().map_err(|_| bad())?;
        }
        out.push(QuarterlySentiment {
            quarter: rec[0].parse()?,
            section: rec[1].to_string(),
            label_counts,
            article_count: rec[NUM_LABELS + 2].parse().map_err(|_| bad())?,
            mean_polarity: rec[NUM_LABELS + 3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Pearson correlation; `None` when either series has zero variance or
/// fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooccurrenceMatrix(pub [[f64; NUM_LABELS]; NUM_LABELS]);

impl CooccurrenceMatrix {
    pub fn get(&self, a: SentimentLabel, b: SentimentLabel) -> f64 {
        self.0[a.index()][b.index()]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::from("label")];
        header.extend(SentimentLabel::ALL.iter().map(|l| l.name().to_string()));
        w.write_record(&header)?;
        for (l, row) in SentimentLabel::ALL.iter().zip(&self.0) {
            let mut rec = vec![l.name().to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut m = [[0.0; NUM_LABELS]; NUM_LABELS];
        let mut rows = 0;
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if i >= NUM_LABELS || rec.len() != NUM_LABELS + 1 {
                return Err(Error::Data(format!("{} is not a 10x10 matrix", path.display())));
            }
            for j in 0..NUM_LABELS {
                m[i][j] = rec[j + 1]
                    .parse()
                    .map_err(|_| Error::Data(format!("bad matrix cell in {}", path.display())))?;
            }
            rows += 1;
        }
        if rows != NUM_LABELS {
            return Err(Error::Data(format!("{} is not a 10x10 matrix", path.display())));
        }
        Ok(CooccurrenceMatrix(m))
    }
}

/// Phi coefficients between label indicator columns. Zero-variance labels get
/// a zero row and column with 1 on the diagonal.
pub fn cooccurrence_matrix(predictions: &[Prediction]) -> Result<CooccurrenceMatrix> {
    if predictions.len() < 2 {
        return Err(Error::Data(format!(
            "co-occurrence needs at least 2 predictions, got {}",
            predictions.len()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..NUM_LABELS)
        .map(|j| {
            predictions
                .iter()
                .map(|p| if p.labels.bits()[j] { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut m = [[0.0; NUM_LABELS]; NUM_LABELS];
    for i in 0..NUM_LABELS {
        m[i][i] = 1.0;
        for j in (i + 1)..NUM_LABELS {
            let r = pearson(&columns[i], &columns[j]).unwrap_or(0.0);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(CooccurrenceMatrix(m))
}

/// Default "negative" labels used when comparing with death counts.
pub fn negative_labels() -> BTreeSet<SentimentLabel> {
    use SentimentLabel::*;
    [Pessimistic, Anxious, Sad, Annoyed, Denial].into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeathAlignmentRow {
    pub quarter: Quarter,
    pub article_count: u64,
    pub negative_label_count: u64,
    pub deaths: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeathAlignment {
    pub region: String,
    pub rows: Vec<DeathAlignmentRow>,
    /// Pearson r between deaths and negative label counts, when defined.
    pub negative_correlation: Option<f64>,
    /// Pearson r between deaths and article counts, when defined.
    pub article_correlation: Option<f64>,
}

/// Inner join of quarterly rows (summed over sections) with a death series.
pub fn align_with_deaths(
    quarterly: &[QuarterlySentiment],
    deaths: &DeathSeries,
    negative: &BTreeSet<SentimentLabel>,
) -> DeathAlignment {
    let mut per_quarter: BTreeMap<Quarter, (u64, u64)> = BTreeMap::new();
    for q in quarterly {
        let e = per_quarter.entry(q.quarter).or_default();
        e.0 += q.article_count;
        e.1 += q.negative_count(negative);
    }
    let rows: Vec<DeathAlignmentRow> = per_quarter
        .into_iter()
        .filter_map(|(quarter, (articles, neg))| {
            deaths.get(quarter).map(|d| DeathAlignmentRow {
                quarter,
                article_count: articles,
                negative_label_count: neg,
                deaths: d,
            })
        })
        .collect();
    if rows.is_empty() {
        log::warn!("no quarters in common with the {} death series", deaths.region);
    }
    let deaths_col: Vec<f64> = rows.iter().map(|r| r.deaths as f64).collect();
    let neg_col: Vec<f64> = rows.iter().map(|r| r.negative_label_count as f64).collect();
    let art_col: Vec<f64> = rows.iter().map(|r| r.article_count as f64).collect();
    DeathAlignment {
        region: deaths.region.clone(),
        negative_correlation: pearson(&deaths_col, &neg_col),
        article_correlation: pearson(&deaths_col, &art_col),
        rows,
    }
}

impl DeathAlignment {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["quarter", "article_count", "negative_label_count", "deaths"])?;
        for r in &self.rows {
            w.write_record([
                r.quarter.to_string(),
                r.article_count.to_string(),
                r.negative_label_count.to_string(),
                r.deaths.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path, region: &str) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        let d: Vec<f64> = rows.iter().map(|r: &DeathAlignmentRow| r.deaths as f64).collect();
        let n: Vec<f64> = rows.iter().map(|r| r.negative_label_count as f64).collect();
        let a: Vec<f64> = rows.iter().map(|r| r.article_count as f64).collect();
        Ok(DeathAlignment {
            region: region.to_string(),
            negative_correlation: pearson(&d, &n),
            article_correlation: pearson(&d, &a),
            rows,
        })
    }
}

pub fn write_distribution_csv<W: Write>(columns: &[DistributionColumn], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    w.write_record(&header)?;
    let labels: Vec<SentimentLabel> = columns
        .first()
        .map(|(_, c)| c.iter().map(|(l, _)| *l).collect())
        .unwrap_or_default();
    for (i, l) in labels.iter().enumerate() {
        let mut rec = vec![l.name().to_string()];
        rec.extend(columns.iter().map(|(_, c)| c[i].1.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Reads a table written by [`write_distribution_csv`].
pub fn read_distribution_csv(path: &Path) -> Result<Vec<DistributionColumn>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let mut columns: Vec<(String, Vec<(SentimentLabel, u64)>)> =
        headers.iter().skip(1).map(|h| (h.to_string(), Vec::new())).collect();
    for rec in r.records() {
        let rec = rec?;
        let label: SentimentLabel = rec.get(0).unwrap_or("").parse()?;
        for (c, col) in columns.iter_mut().enumerate() {
            let raw = rec.get(c + 1).unwrap_or("");
            let v = raw
                .parse()
                .map_err(|_| Error::Data(format!("{}: count `{raw}` is not an integer", path.display())))?;
            col.1.push((label, v));
        }
    }
    Ok(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_article_date;
    use crate::labels::SentimentLabel::*;

    fn lv(labels: &[SentimentLabel]) -> LabelVector {
        LabelVector::from_labels(labels.iter().copied())
    }

    fn pred(id: &str, labels: &[SentimentLabel]) -> Prediction {
        Prediction::from_labels(id, lv(labels))
    }

    fn article(id: &str, date: &str, section: &str) -> Article {
        Article {
            id: id.into(),
            publication_date: parse_article_date(date).unwrap(),
            section: section.into(),
            title: String::new(),
            body: "b".into(),
        }
    }

    #[test]
    fn default_weights_follow_label_order() {
        let w = PolarityWeights::default();
        assert_eq!(w.get(Optimistic), 3);
        assert_eq!(w.get(Denial), -4);
        assert_eq!(w.get(OfficialReport), 0);
        assert_eq!(w.get(Joking), 1);
    }

    #[test]
    fn polarity_examples() {
        let w = PolarityWeights::default();
        assert_eq!(polarity_score(&lv(&[Optimistic]), &w), 1.0);
        assert_eq!(polarity_score(&lv(&[]), &w), 0.0);
        assert_eq!(polarity_score(&lv(&[Empathetic]), &w), 0.0);
        assert_eq!(polarity_score(&lv(&[Optimistic, Pessimistic]), &w), 0.0);
        assert_eq!(polarity_score(&lv(&[Sad, Joking]), &w), -1.0 / 3.0);
    }

    #[test]
    fn polarity_bounds_and_sign_equivariance_over_all_subsets() {
        let w = PolarityWeights::default();
        for strategy in [
            PolarityStrategy::NormalizedAbsolute,
            PolarityStrategy::ScaledByMaxWeight,
        ] {
            for mask in 0u16..1024 {
                let l = LabelVector::from_mask(mask);
                let s = polarity_score_with(&l, &w, strategy);
                assert!((-1.0..=1.0).contains(&s));
                assert_eq!(polarity_score_with(&l, &w.negated(), strategy), -s);
            }
        }
    }

    #[test]
    fn weights_file_must_be_complete() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.json");
        let full = serde_json::to_string(&PolarityWeights::default()).unwrap();
        std::fs::write(&p, &full).unwrap();
        assert_eq!(PolarityWeights::from_json_file(&p).unwrap(), PolarityWeights::default());
        std::fs::write(&p, r#"{"optimistic": 3}"#).unwrap();
        assert!(PolarityWeights::from_json_file(&p).is_err());
    }

    #[test]
    fn distribution_exclusion() {
        let preds = vec![pred("1", &[Sad]), pred("2", &[Sad]), pred("3", &[Sad])];
        let d = sentiment_distribution(&preds, false);
        assert_eq!(d[Sad.index()], (Sad, 3));
        assert_eq!(d.iter().map(|x| x.1).sum::<u64>(), 3);
        let d = sentiment_distribution(&[pred("1", &[OfficialReport, Sad])], true);
        assert_eq!(d.len(), 9);
        assert!(d.iter().all(|(l, _)| *l != OfficialReport));
        assert_eq!(d.iter().map(|x| x.1).sum::<u64>(), 1);
    }

    #[test]
    fn quarterly_examples() {
        let w = PolarityWeights::default();
        let arts = vec![article("a", "2020-02-01", "World news")];
        let rows = quarterly_aggregate(&[pred("a", &[Optimistic])], &arts, &w, Default::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].quarter.to_string(), "2020-Q1");
        assert_eq!(rows[0].mean_polarity, 1.0);

        let arts = vec![
            article("a", "2020-02-01", "UK news"),
            article("b", "2020-03-01", "UK news"),
        ];
        let preds = vec![pred("a", &[Optimistic]), pred("b", &[Pessimistic])];
        let rows = quarterly_aggregate(&preds, &arts, &w, Default::default()).unwrap();
        assert_eq!(rows[0].mean_polarity, 0.0);
        assert_eq!(rows[0].article_count, 2);

        assert!(matches!(
            quarterly_aggregate(&[pred("zz", &[])], &arts, &w, Default::default()),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn quarterly_csv_round_trip() {
        let arts = vec![
            article("a", "2020-02-01", "World news"),
            article("b", "2021-05-01", "Opinion"),
        ];
        let preds = vec![pred("a", &[Sad, Anxious]), pred("b", &[Joking])];
        let rows = quarterly_aggregate(&preds, &arts, &PolarityWeights::default(), Default::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.csv");
        write_quarterly_csv(&rows, std::fs::File::create(&p).unwrap()).unwrap();
        let back = read_quarterly_csv(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].label_counts, rows[1].label_counts);
        assert!((back[0].mean_polarity - rows[0].mean_polarity).abs() < 1e-6);
    }

    #[test]
    fn cooccurrence_fixtures() {
        // sad and anxious always together, optimistic varies
        let preds = vec![
            pred("1", &[Sad, Anxious, Optimistic]),
            pred("2", &[Sad, Anxious]),
            pred("3", &[Sad, Anxious, Optimistic]),
            pred("4", &[Sad, Anxious, Joking]),
        ];
        let m = cooccurrence_matrix(&preds).unwrap();
        // both columns constant: zero variance → off-diagonal 0, diagonal 1
        assert_eq!(m.get(Sad, Anxious), 0.0);
        assert_eq!(m.get(Sad, Sad), 1.0);

        let preds = vec![
            pred("1", &[Sad, Anxious]),
            pred("2", &[]),
            pred("3", &[Sad, Anxious, Joking]),
            pred("4", &[Joking]),
        ];
        let m = cooccurrence_matrix(&preds).unwrap();
        assert!((m.get(Sad, Anxious) - 1.0).abs() < 1e-12);

        // never together, each in half the articles
        let preds = vec![
            pred("1", &[Sad]),
            pred("2", &[Joking]),
            pred("3", &[Sad]),
            pred("4", &[Joking]),
        ];
        let m = cooccurrence_matrix(&preds).unwrap();
        assert!((m.get(Sad, Joking) + 1.0).abs() < 1e-12);
        for i in 0..NUM_LABELS {
            for j in 0..NUM_LABELS {
                assert_eq!(m.0[i][j], m.0[j][i]);
            }
        }
        assert!(cooccurrence_matrix(&preds[..1]).is_err());
    }

    #[test]
    fn death_alignment_inner_join() {
        let q = |s: &str| s.parse::<Quarter>().unwrap();
        let row = |quarter: &str, n: u64| QuarterlySentiment {
            quarter: q(quarter),
            section: "Australia news".into(),
            label_counts: [0, 0, 0, 1, 0, 2, 0, 0, 5, 0],
            article_count: n,
            mean_polarity: 0.0,
        };
        let deaths = DeathSeries::new("AU", vec![(q("2020-Q2"), 10), (q("2020-Q3"), 20)]).unwrap();
        let a = align_with_deaths(&[row("2020-Q1", 3), row("2020-Q2", 4)], &deaths, &negative_labels());
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a.rows[0].quarter, q("2020-Q2"));
        assert_eq!(a.rows[0].negative_label_count, 3);
        assert_eq!(a.negative_correlation, None);

        let flat = DeathSeries::new("AU", vec![(q("2020-Q1"), 5), (q("2020-Q2"), 5)]).unwrap();
        let a = align_with_deaths(&[row("2020-Q1", 3), row("2020-Q2", 4)], &flat, &negative_labels());
        assert_eq!(a.article_correlation, None);

        let none = DeathSeries::new("AU", vec![(q("2019-Q1"), 5)]).unwrap();
        assert!(align_with_deaths(&[row("2020-Q1", 3)], &none, &negative_labels())
            .rows
            .is_empty());
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
    }
}
