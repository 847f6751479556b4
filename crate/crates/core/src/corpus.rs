//! Newspaper article ingestion, section/date filtering, quarter bucketing and
//! the external death-count series.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sections analysed by default.
pub const STUDIED_SECTIONS: [&str; 4] = ["World news", "Opinion", "Australia news", "UK news"];

/// Sections dropped even when requested: sport coverage carries little
/// pandemic sentiment.
pub const EXCLUDED_SECTIONS: [&str; 2] = ["Football", "Sport"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub publication_date: NaiveDate,
    pub section: String,
    pub title: String,
    pub body: String,
}

impl Article {
    pub fn quarter(&self) -> Quarter {
        assign_quarter(self.publication_date)
    }
}

/// Calendar quarter, ordered by (year, index) and rendered as `YYYY-Qn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quarter {
    year: i32,
    index: u8,
}

impl Quarter {
    pub fn new(year: i32, index: u8) -> Result<Self> {
        if !(1..=4).contains(&index) {
            return Err(Error::Data(format!("quarter index {index} not in 1..=4")));
        }
        Ok(Quarter { year, index })
    }

    pub fn of(date: NaiveDate) -> Self {
        Quarter {
            year: date.year(),
            index: (date.month0() / 3 + 1) as u8,
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn next(self) -> Self {
        if self.index == 4 {
            Quarter {
                year: self.year + 1,
                index: 1,
            }
        } else {
            Quarter {
                year: self.year,
                index: self.index + 1,
            }
        }
    }

    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, u32::from(self.index - 1) * 3 + 1, 1).expect("quarter start is a valid date")
    }

    /// Every quarter from `first` to `last`, both inclusive.
    pub fn range_inclusive(first: Quarter, last: Quarter) -> Vec<Quarter> {
        let mut out = Vec::new();
        let mut q = first;
        while q <= last {
            out.push(q);
            q = q.next();
        }
        out
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-Q{}", self.year, self.index)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Data(format!("`{s}` is not a quarter of the form YYYY-Qn"));
        let (year, q) = s.split_once("-Q").ok_or_else(bad)?;
        let year: i32 = year.parse().map_err(|_| bad())?;
        let index: u8 = q.parse().map_err(|_| bad())?;
        Quarter::new(year, index).map_err(|_| bad())
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Month 1–3 → Q1, 4–6 → Q2, 7–9 → Q3, 10–12 → Q4.
pub fn assign_quarter(date: NaiveDate) -> Quarter {
    Quarter::of(date)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    PrePandemic,
    Pandemic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    start: NaiveDate,
    end: NaiveDate,
    name: WindowName,
}

impl DateWindow {
    pub fn pre_pandemic() -> Self {
        DateWindow {
            start: ymd(2018, 1, 1),
            end: ymd(2019, 12, 31),
            name: WindowName::PrePandemic,
        }
    }

    pub fn pandemic() -> Self {
        DateWindow {
            start: ymd(2020, 1, 1),
            end: ymd(2022, 3, 31),
            name: WindowName::Pandemic,
        }
    }

    /// Both study windows back to back (2018-01-01 .. 2022-03-31).
    pub fn study() -> Self {
        DateWindow {
            start: ymd(2018, 1, 1),
            end: ymd(2022, 3, 31),
            name: WindowName::Custom,
        }
    }

    pub fn custom(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("window start {start} is after end {end}")));
        }
        Ok(DateWindow {
            start,
            end,
            name: WindowName::Custom,
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.trim().to_lowercase().replace('-', "_").as_str() {
            "pre_pandemic" => Ok(Self::pre_pandemic()),
            "pandemic" => Ok(Self::pandemic()),
            "study" | "all" => Ok(Self::study()),
            other => Err(Error::Config(format!("unknown date window `{other}`"))),
        }
    }

    /// A window name or `YYYY-MM-DD:YYYY-MM-DD`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((a, b)) => {
                let date = |x: &str| {
                    NaiveDate::parse_from_str(x.trim(), "%Y-%m-%d")
                        .map_err(|_| Error::Config(format!("window date `{x}` is not YYYY-MM-DD")))
                };
                Self::custom(date(a)?, date(b)?)
            }
            None => Self::by_name(s),
        }
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn name(&self) -> WindowName {
        self.name
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn quarters(&self) -> Vec<Quarter> {
        Quarter::range_inclusive(Quarter::of(self.start), Quarter::of(self.end))
    }
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid constant date")
}

/// Section tags compare equal after trimming and case folding.
pub fn normalize_section(section: &str) -> String {
    section.trim().to_lowercase()
}

/// Non-empty set of normalised section tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionSet(BTreeSet<String>);

impl SectionSet {
    pub fn new<I, S>(sections: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = sections
            .into_iter()
            .map(|s| normalize_section(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::Config("section set must not be empty".into()));
        }
        Ok(SectionSet(set))
    }

    pub fn studied() -> Self {
        SectionSet::new(STUDIED_SECTIONS).expect("non-empty constant")
    }

    pub fn contains(&self, section: &str) -> bool {
        self.0.contains(&normalize_section(section))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Articles whose section is in `sections` and whose date lies in `window`,
/// in input order.
pub fn filter_articles(articles: &[Article], sections: &SectionSet, window: &DateWindow) -> Vec<Article> {
    articles
        .iter()
        .filter(|a| sections.contains(&a.section) && window.contains(a.publication_date))
        .cloned()
        .collect()
}

/// Section/date selection used by the pipeline: requested sections minus the
/// always-excluded ones, inside one date window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSelection {
    pub sections: Vec<String>,
    pub excluded_sections: Vec<String>,
    pub window: DateWindow,
}

impl Default for CorpusSelection {
    fn default() -> Self {
        CorpusSelection {
            sections: STUDIED_SECTIONS.iter().map(|s| s.to_string()).collect(),
            excluded_sections: EXCLUDED_SECTIONS.iter().map(|s| s.to_string()).collect(),
            window: DateWindow::study(),
        }
    }
}

impl CorpusSelection {
    pub fn with_sections<I, S>(sections: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CorpusSelection {
            sections: sections.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn select(&self, articles: &[Article]) -> Result<Vec<Article>> {
        let requested = SectionSet::new(&self.sections)?;
        let excluded: BTreeSet<String> = self.excluded_sections.iter().map(|s| normalize_section(s)).collect();
        let allowed: Vec<&str> = requested.iter().filter(|s| !excluded.contains(*s)).collect();
        if allowed.is_empty() {
            return Ok(Vec::new());
        }
        Ok(filter_articles(articles, &SectionSet::new(allowed)?, &self.window))
    }
}

/// Column names for the article dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMap {
    /// Falls back to the 1-based row number when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub date: String,
    pub section: String,
    pub title: String,
    pub body: String,
}

impl SchemaMap {
    /// Columns written by [`write_articles_csv`].
    pub fn canonical() -> Self {
        SchemaMap {
            id: Some("id".into()),
            date: "date".into(),
            section: "section".into(),
            title: "title".into(),
            body: "body".into(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("schema map {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub malformed_row: usize,
    pub bad_date: usize,
    pub empty_body: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.malformed_row + self.bad_date + self.empty_body
    }
}

#[derive(Debug, Clone)]
pub struct LoadedArticles {
    pub articles: Vec<Article>,
    pub skipped: SkipCounts,
}

/// Writes articles with the [`SchemaMap::canonical`] columns.
pub fn write_articles_csv(path: &Path, articles: &[Article]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "date", "section", "title", "body"])?;
    for a in articles {
        let date = a.publication_date.format("%Y-%m-%d").to_string();
        w.write_record([a.id.as_str(), &date, &a.section, &a.title, &a.body])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses `YYYY-MM-DD`, dropping any `THH:MM:SS…` (or space separated) time.
pub fn parse_article_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let date_part = match raw.char_indices().nth(10) {
        Some((i, 'T')) | Some((i, ' ')) => &raw[..i],
        Some(_) => return None,
        None => raw,
    };
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()
}

pub fn load_articles(path: &Path, schema: &SchemaMap) -> Result<LoadedArticles> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name.trim())
            .ok_or_else(|| Error::Config(format!("schema column `{name}` not present in {}", path.display())))
    };
    let id_col = schema.id.as_deref().map(column).transpose()?;
    let date_col = column(&schema.date)?;
    let section_col = column(&schema.section)?;
    let title_col = column(&schema.title)?;
    let body_col = column(&schema.body)?;

    let mut articles = Vec::new();
    let mut skipped = SkipCounts::default();
    for (row_no, record) in reader.records().enumerate() {
        let Ok(record) = record else {
            skipped.malformed_row += 1;
            continue;
        };
        let field = |i: usize| record.get(i);
        let (Some(date), Some(section), Some(title), Some(body)) =
            (field(date_col), field(section_col), field(title_col), field(body_col))
        else {
            skipped.malformed_row += 1;
            continue;
        };
        let Some(publication_date) = parse_article_date(date) else {
            skipped.bad_date += 1;
            continue;
        };
        if body.trim().is_empty() {
            skipped.empty_body += 1;
            continue;
        }
        let id = match id_col.and_then(field) {
            Some(id) if !id.trim().is_empty() => id.trim().to_string(),
            _ => format!("row-{}", row_no + 1),
        };
        articles.push(Article {
            id,
            publication_date,
            section: section.trim().to_string(),
            title: title.trim().to_string(),
            body: body.to_string(),
        });
    }
    if skipped.total() > 0 {
        log::warn!("{}: skipped {} rows ({:?})", path.display(), skipped.total(), skipped);
    }
    Ok(LoadedArticles { articles, skipped })
}

/// Article counts per section, largest first (ties by name).
pub fn section_counts(articles: &[Article]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for a in articles {
        *counts.entry(a.section.clone()).or_default() += 1;
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Article counts per quarter.
pub fn quarter_counts(articles: &[Article]) -> BTreeMap<Quarter, usize> {
    let mut counts = BTreeMap::new();
    for a in articles {
        *counts.entry(a.quarter()).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeathSeries {
    pub region: String,
    points: Vec<(Quarter, u64)>,
}

impl DeathSeries {
    /// Sorts by quarter; duplicate quarters are an error.
    pub fn new(region: impl Into<String>, mut points: Vec<(Quarter, u64)>) -> Result<Self> {
        points.sort_by_key(|p| p.0);
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Data(format!("duplicate quarter {} in death series", w[0].0)));
        }
        Ok(DeathSeries {
            region: region.into(),
            points,
        })
    }

    pub fn points(&self) -> &[(Quarter, u64)] {
        &self.points
    }

    pub fn get(&self, quarter: Quarter) -> Option<u64> {
        self.points
            .binary_search_by_key(&quarter, |p| p.0)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Reads `quarter,deaths[,region]` rows. With a `region` column only rows
/// matching `region` (case-insensitive) are kept.
pub fn load_death_series(path: &Path, region: &str) -> Result<DeathSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let quarter_col =
        find("quarter").ok_or_else(|| Error::Config(format!("{}: missing `quarter` column", path.display())))?;
    let deaths_col =
        find("deaths").ok_or_else(|| Error::Config(format!("{}: missing `deaths` column", path.display())))?;
    let region_col = find("region");

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        if let Some(col) = region_col {
            if !record.get(col).unwrap_or("").eq_ignore_ascii_case(region.trim()) {
                continue;
            }
        }
        let quarter: Quarter = record.get(quarter_col).unwrap_or("").parse()?;
        let raw = record.get(deaths_col).unwrap_or("");
        let deaths: i64 = raw
            .parse()
            .map_err(|_| Error::Data(format!("deaths value `{raw}` for {quarter} is not an integer")))?;
        if deaths < 0 {
            return Err(Error::Data(format!("negative deaths ({deaths}) for {quarter}")));
        }
        points.push((quarter, deaths as u64));
    }
    DeathSeries::new(region.trim(), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn article(id: &str, date: &str, section: &str) -> Article {
        Article {
            id: id.into(),
            publication_date: parse_article_date(date).unwrap(),
            section: section.into(),
            title: String::new(),
            body: "text".into(),
        }
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn schema() -> SchemaMap {
        SchemaMap {
            id: Some("id".into()),
            date: "date".into(),
            section: "section".into(),
            title: "title".into(),
            body: "body".into(),
        }
    }

    #[test]
    fn quarter_month_rule() {
        assert_eq!(assign_quarter(ymd(2020, 1, 1)).to_string(), "2020-Q1");
        assert_eq!(assign_quarter(ymd(2021, 10, 15)).to_string(), "2021-Q4");
        assert_eq!(assign_quarter(ymd(2020, 6, 30)).to_string(), "2020-Q2");
        assert_eq!(assign_quarter(ymd(2020, 7, 1)).to_string(), "2020-Q3");
    }

    #[test]
    fn quarter_parse_and_order() {
        let a: Quarter = "2020-Q4".parse().unwrap();
        let b: Quarter = "2021-Q1".parse().unwrap();
        assert!(a < b);
        assert_eq!(a.next(), b);
        assert!("2020-Q5".parse::<Quarter>().is_err());
        assert!("2020Q1".parse::<Quarter>().is_err());
        assert_eq!(b.first_day(), ymd(2021, 1, 1));
    }

    #[test]
    fn pandemic_window_has_nine_quarters() {
        let qs = DateWindow::pandemic().quarters();
        assert_eq!(qs.len(), 9);
        assert_eq!(qs[0].to_string(), "2020-Q1");
        assert_eq!(qs[8].to_string(), "2022-Q1");
        assert_eq!(DateWindow::pre_pandemic().quarters().len(), 8);
    }

    #[test]
    fn window_bounds_are_inclusive() {
        let sections = SectionSet::new(["World news"]).unwrap();
        let arts = vec![
            article("a", "2019-12-31", "World news"),
            article("b", "2022-04-01", "World news"),
            article("c", "2022-03-31", "World news"),
        ];
        let pre = filter_articles(&arts, &sections, &DateWindow::pre_pandemic());
        assert_eq!(pre.len(), 1);
        assert_eq!(pre[0].id, "a");
        let during = filter_articles(&arts, &sections, &DateWindow::pandemic());
        assert_eq!(during.iter().map(|a| a.id.as_str()).collect::<Vec<_>>(), ["c"]);
    }

    #[test]
    fn section_match_trims_and_folds_case() {
        let sections = SectionSet::new(["UK news"]).unwrap();
        assert!(sections.contains("  uk NEWS "));
        assert!(!sections.contains("UK news extra"));
        assert!(SectionSet::new(Vec::<String>::new()).is_err());
        assert!(SectionSet::new(["  "]).is_err());
    }

    #[test]
    fn football_is_excluded_by_default_selection() {
        let arts = vec![article("f", "2020-03-01", "Football")];
        let sel = CorpusSelection::with_sections(["Football"]);
        assert!(sel.select(&arts).unwrap().is_empty());
    }

    #[test]
    fn date_parsing_truncates_time() {
        assert_eq!(parse_article_date("2020-03-15"), Some(ymd(2020, 3, 15)));
        assert_eq!(parse_article_date("2020-03-15T23:59:59"), Some(ymd(2020, 3, 15)));
        assert_eq!(parse_article_date("2020-03-15T23:59:59Z"), Some(ymd(2020, 3, 15)));
        assert_eq!(parse_article_date("2020-02-30"), None);
        assert_eq!(parse_article_date("15/03/2020"), None);
        assert_eq!(parse_article_date("2020-03-15x"), None);
    }

    #[test]
    fn load_maps_fields_and_counts_skips() {
        let f = write_tmp(
            "id,date,section,title,body\n\
             1,2020-03-15,World news,T,Some body\n\
             2,2020-03-16,World news,T,\n\
             3,not-a-date,World news,T,body\n\
             4,2020-03-17T10:00:00,Opinion,T2,\"multi\nline\"\n\
             5,2020-03-18\n",
        );
        let loaded = load_articles(f.path(), &schema()).unwrap();
        assert_eq!(loaded.articles.len(), 2);
        assert_eq!(loaded.articles[0].publication_date, ymd(2020, 3, 15));
        assert_eq!(loaded.articles[0].section, "World news");
        assert_eq!(loaded.articles[1].body, "multi\nline");
        assert_eq!(loaded.skipped.empty_body, 1);
        assert_eq!(loaded.skipped.bad_date, 1);
        assert_eq!(loaded.skipped.malformed_row, 1);
    }

    #[test]
    fn load_errors() {
        let missing = load_articles(Path::new("/definitely/not/here.csv"), &schema());
        assert!(matches!(missing, Err(Error::Io { .. })));
        let f = write_tmp("date,section,title,text\n2020-01-01,a,b,c\n");
        assert!(matches!(load_articles(f.path(), &schema()), Err(Error::Config(_))));
    }

    #[test]
    fn death_series_sorted_and_validated() {
        let f = write_tmp("quarter,deaths\n2020-Q2,9\n2020-Q1,5\n");
        let s = load_death_series(f.path(), "AU").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[0], ("2020-Q1".parse().unwrap(), 5));
        assert_eq!(s.get("2020-Q2".parse().unwrap()), Some(9));

        let dup = write_tmp("quarter,deaths\n2020-Q1,5\n2020-Q1,7\n");
        assert!(matches!(load_death_series(dup.path(), "AU"), Err(Error::Data(_))));
        let neg = write_tmp("quarter,deaths\n2020-Q1,-5\n");
        assert!(matches!(load_death_series(neg.path(), "AU"), Err(Error::Data(_))));
    }

    #[test]
    fn death_series_region_column_filters() {
        let f = write_tmp("region,quarter,deaths\nAU,2020-Q1,5\nUK,2020-Q1,500\nau,2020-Q2,7\n");
        let s = load_death_series(f.path(), "AU").unwrap();
        assert_eq!(s.points().iter().map(|p| p.1).collect::<Vec<_>>(), [5, 7]);
    }

    #[test]
    fn section_counts_are_ordered() {
        let arts = vec![
            article("1", "2020-01-01", "Opinion"),
            article("2", "2020-01-01", "World news"),
            article("3", "2020-01-01", "World news"),
        ];
        assert_eq!(
            section_counts(&arts),
            vec![("World news".to_string(), 2), ("Opinion".to_string(), 1)]
        );
    }
}
