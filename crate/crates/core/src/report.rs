//! Figures rendered from persisted tables, run manifests and article
//! sampling for qualitative inspection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::NaiveDate;
use plotters::coord::Shift;
use plotters::prelude::*;
use plotters::style::text_anchor::{HPos, Pos, VPos};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{CooccurrenceMatrix, DeathAlignment, QuarterlySentiment};
use crate::corpus::{Article, Quarter};
use crate::error::{Error, Result};
use crate::labels::{LabelVector, SentimentLabel, NUM_LABELS};
use crate::ngram::NGramTable;
use crate::prediction::Prediction;

/// Overrides the font used for raster and vector figures.
pub const FONT_ENV: &str = "MEDIASENT_FONT";

const FONT_CANDIDATES: &[&str] = &[
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/truetype/liberation/LiberationSans-Regular.ttf",
    "/Library/Fonts/Arial.ttf",
    "/System/Library/Fonts/Supplemental/Arial.ttf",
    "C:\\Windows\\Fonts\\arial.ttf",
];

static FONT: OnceLock<std::result::Result<(), String>> = OnceLock::new();

/// Registers a TrueType font as `sans-serif`, once per process.
fn ensure_font() -> Result<()> {
    FONT.get_or_init(|| {
        let env = std::env::var_os(FONT_ENV).map(PathBuf::from);
        let path = env
            .into_iter()
            .chain(FONT_CANDIDATES.iter().map(PathBuf::from))
            .find(|p| p.is_file())
            .ok_or_else(|| format!("no TrueType font found; set {FONT_ENV} to a .ttf file"))?;
        let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
        plotters::style::register_font("sans-serif", FontStyle::Normal, bytes)
            .map_err(|_| format!("{} is not a usable font", path.display()))
    })
    .clone()
    .map_err(Error::Environment)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Svg,
    Png,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Svg => "svg",
            ImageFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Ngrams,
    Distribution,
    Polarity,
    Cooccurrence,
    Deaths,
}

impl FigureKind {
    pub const ALL: [FigureKind; 5] = [
        FigureKind::Ngrams,
        FigureKind::Distribution,
        FigureKind::Polarity,
        FigureKind::Cooccurrence,
        FigureKind::Deaths,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "ngrams" | "ngram" => Ok(FigureKind::Ngrams),
            "distribution" | "distributions" => Ok(FigureKind::Distribution),
            "polarity" => Ok(FigureKind::Polarity),
            "cooccurrence" | "heatmap" => Ok(FigureKind::Cooccurrence),
            "deaths" => Ok(FigureKind::Deaths),
            other => Err(Error::Config(format!("unknown figure kind `{other}`"))),
        }
    }
}

/// Tables a report can draw from; absent tables are skipped.
#[derive(Debug, Clone, Default)]
pub struct FigureTables {
    /// Named n-gram tables, e.g. `world_news_2020-Q1_bigrams`.
    pub ngrams: Vec<(String, NGramTable)>,
    /// Label counts per column (e.g. pre-pandemic, pandemic).
    pub distribution: Vec<(String, Vec<(SentimentLabel, u64)>)>,
    pub quarterly: Vec<QuarterlySentiment>,
    pub cooccurrence: Option<CooccurrenceMatrix>,
    pub deaths: Option<DeathAlignment>,
}

/// Draws each requested figure into `out_dir`, returning the written
/// image paths. Figures whose table is missing or empty are skipped with a
/// warning.
pub fn render_figures(
    tables: &FigureTables,
    kinds: &BTreeSet<FigureKind>,
    out_dir: &Path,
    format: ImageFormat,
) -> Result<Vec<PathBuf>> {
    ensure_font()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for kind in kinds {
        match kind {
            FigureKind::Ngrams => {
                if tables.ngrams.iter().all(|(_, t)| t.entries.is_empty()) {
                    log::warn!("no n-gram rows; n-gram figure skipped");
                }
                for (name, table) in &tables.ngrams {
                    if table.entries.is_empty() {
                        log::warn!("n-gram table {name} is empty; skipped");
                        continue;
                    }
                    let path = out_dir.join(format!("{name}.{}", format.extension()));
                    draw(&path, format, (900, 600), Figure::Ngrams(name, table))?;
                    written.push(path);
                }
            }
            FigureKind::Distribution => {
                if tables.distribution.is_empty() || tables.distribution.iter().all(|(_, c)| c.is_empty()) {
                    log::warn!("no distribution table; figure skipped");
                    continue;
                }
                let path = out_dir.join(format!("sentiment_distribution.{}", format.extension()));
                draw(&path, format, (1000, 600), Figure::Distribution(&tables.distribution))?;
                written.push(path);
            }
            FigureKind::Polarity => {
                if tables.quarterly.is_empty() {
                    log::warn!("no quarterly table; polarity figure skipped");
                    continue;
                }
                let path = out_dir.join(format!("quarterly_polarity.{}", format.extension()));
                draw(&path, format, (1000, 600), Figure::Polarity(&tables.quarterly))?;
                written.push(path);
            }
            FigureKind::Cooccurrence => {
                let Some(m) = &tables.cooccurrence else {
                    log::warn!("no co-occurrence table; heatmap skipped");
                    continue;
                };
                let path = out_dir.join(format!("cooccurrence.{}", format.extension()));
                draw(&path, format, (800, 760), Figure::Cooccurrence(m))?;
                written.push(path);
            }
            FigureKind::Deaths => {
                let Some(d) = tables.deaths.as_ref().filter(|d| !d.rows.is_empty()) else {
                    log::warn!("no death alignment rows; figure skipped");
                    continue;
                };
                let path = out_dir.join(format!("deaths_{}.{}", slug(&d.region), format.extension()));
                draw(&path, format, (1000, 600), Figure::Deaths(d))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.trim().to_lowercase().chars() {
        if c.is_ascii_alphanumeric() || c == '-' {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

type DrawResult = std::result::Result<(), Box<dyn std::error::Error>>;

enum Figure<'a> {
    Ngrams(&'a str, &'a NGramTable),
    Distribution(&'a [(String, Vec<(SentimentLabel, u64)>)]),
    Polarity(&'a [QuarterlySentiment]),
    Cooccurrence(&'a CooccurrenceMatrix),
    Deaths(&'a DeathAlignment),
}

fn paint<DB: DrawingBackend>(root: &DrawingArea<DB, Shift>, figure: &Figure<'_>) -> DrawResult
where
    DB::ErrorType: 'static,
{
    match figure {
        Figure::Ngrams(name, table) => ngram_chart(root, name, table),
        Figure::Distribution(columns) => distribution_chart(root, columns),
        Figure::Polarity(rows) => polarity_chart(root, rows),
        Figure::Cooccurrence(m) => heatmap(root, m),
        Figure::Deaths(d) => deaths_chart(root, d),
    }
}

fn draw(path: &Path, format: ImageFormat, size: (u32, u32), figure: Figure<'_>) -> Result<()> {
    let render = |e: Box<dyn std::error::Error>| Error::Render(format!("{}: {e}", path.display()));
    match format {
        ImageFormat::Svg => {
            let root = SVGBackend::new(path, size).into_drawing_area();
            paint(&root, &figure).map_err(render)?;
            root.present().map_err(|e| render(Box::new(e)))?;
        }
        ImageFormat::Png => {
            let root = BitMapBackend::new(path, size).into_drawing_area();
            paint(&root, &figure).map_err(render)?;
            root.present().map_err(|e| render(Box::new(e)))?;
        }
    }
    Ok(())
}

/// Index of an axis tick that sits on an integer in `0..n`.
fn index_label(v: f64, n: usize) -> Option<usize> {
    let i = v.round();
    ((v - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < n).then_some(i as usize)
}

fn label_title(l: SentimentLabel) -> String {
    l.name().replace('_', " ")
}

fn ngram_chart<DB: DrawingBackend>(root: &DrawingArea<DB, Shift>, name: &str, table: &NGramTable) -> DrawResult
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE)?;
    let n = table.entries.len();
    let max = table.entries.iter().map(|e| e.1).max().unwrap_or(1).max(1) as f64;
    let grams: Vec<String> = table.entries.iter().map(|(g, _)| g.join(" ")).collect();
    let mut chart = ChartBuilder::on(root)
        .caption(name.replace('_', " "), ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(220)
        .build_cartesian_2d(0.0..max * 1.05, -0.5..n as f64 - 0.5)?;
    // rank 0 is drawn at the top, at y = n - 1
    chart
        .configure_mesh()
        .disable_y_mesh()
        .light_line_style(TRANSPARENT)
        .y_labels(n)
        .y_label_formatter(&|y| index_label(*y, n).map_or_else(String::new, |i| grams[n - 1 - i].clone()))
        .x_desc("count")
        .draw()?;
    chart.draw_series(table.entries.iter().enumerate().map(|(i, (_, c))| {
        let y = (n - 1 - i) as f64;
        Rectangle::new([(0.0, y - 0.4), (*c as f64, y + 0.4)], BLUE.mix(0.7).filled())
    }))?;
    Ok(())
}

fn distribution_chart<DB: DrawingBackend>(
    root: &DrawingArea<DB, Shift>,
    columns: &[(String, Vec<(SentimentLabel, u64)>)],
) -> DrawResult
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE)?;
    let labels: Vec<SentimentLabel> = columns[0].1.iter().map(|(l, _)| *l).collect();
    let max = columns
        .iter()
        .flat_map(|(_, c)| c.iter().map(|(_, v)| *v))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let nl = labels.len();
    let mut chart = ChartBuilder::on(root)
        .caption("sentiment distribution", ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(60)
        .y_label_area_size(60)
        .build_cartesian_2d(-0.5..nl as f64 - 0.5, 0.0..max * 1.1)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .light_line_style(TRANSPARENT)
        .x_labels(nl)
        .x_label_formatter(&|x| index_label(*x, nl).map_or_else(String::new, |i| label_title(labels[i])))
        .y_label_formatter(&|v| format!("{v:.0}"))
        .y_desc("label count")
        .draw()?;
    let groups = columns.len() as f64;
    let width = 0.8 / groups;
    for (g, (name, counts)) in columns.iter().enumerate() {
        let color = Palette99::pick(g).mix(0.85);
        chart
            .draw_series(counts.iter().enumerate().map(move |(i, (_, v))| {
                let x0 = i as f64 - 0.4 + g as f64 * width;
                Rectangle::new([(x0, 0.0), (x0 + width, *v as f64)], color.filled())
            }))?
            .label(name.clone())
            .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], color.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    Ok(())
}

fn polarity_chart<DB: DrawingBackend>(root: &DrawingArea<DB, Shift>, rows: &[QuarterlySentiment]) -> DrawResult
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE)?;
    let quarters: Vec<Quarter> = rows
        .iter()
        .map(|r| r.quarter)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos: HashMap<Quarter, usize> = quarters.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let mut by_section: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        by_section
            .entry(r.section.as_str())
            .or_default()
            .push((pos[&r.quarter] as f64, r.mean_polarity));
    }
    let nq = quarters.len();
    let mut chart = ChartBuilder::on(root)
        .caption("quarterly polarity", ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(50)
        .y_label_area_size(60)
        .build_cartesian_2d(-0.5..(nq as f64 - 0.5), -1.0..1.0)?;
    chart
        .configure_mesh()
        .light_line_style(TRANSPARENT)
        .x_labels(nq)
        .x_label_formatter(&|x| index_label(*x, nq).map_or_else(String::new, |i| quarters[i].to_string()))
        .y_desc("mean polarity")
        .draw()?;
    for (k, (section, mut points)) in by_section.into_iter().enumerate() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))?
            .label(section.to_string())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
        chart.draw_series(points.into_iter().map(|p| Circle::new(p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    Ok(())
}

/// Diverging blue (−1) to white (0) to red (+1).
fn diverging(v: f64) -> RGBColor {
    let v = v.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    if v >= 0.0 {
        RGBColor(255, fade(v), fade(v))
    } else {
        RGBColor(fade(-v), fade(-v), 255)
    }
}

fn heatmap<DB: DrawingBackend>(root: &DrawingArea<DB, Shift>, m: &CooccurrenceMatrix) -> DrawResult
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE)?;
    let names: Vec<String> = SentimentLabel::ALL.iter().map(|l| label_title(*l)).collect();
    let n = NUM_LABELS as f64;
    let mut chart = ChartBuilder::on(root)
        .caption("label co-occurrence", ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(110)
        .y_label_area_size(130)
        .build_cartesian_2d(-0.5..n - 0.5, -0.5..n - 0.5)?;
    // row i of the matrix is drawn at y = n - 1 - i
    chart
        .configure_mesh()
        .disable_mesh()
        .x_labels(0)
        .y_labels(NUM_LABELS)
        .y_label_formatter(&|y| {
            index_label(*y, NUM_LABELS).map_or_else(String::new, |i| names[NUM_LABELS - 1 - i].clone())
        })
        .draw()?;
    // column names run downwards from the axis; the mesh would centre them on the tick
    let style = ("sans-serif", 12)
        .into_font()
        .transform(FontTransform::Rotate90)
        .into_text_style(root)
        .pos(Pos::new(HPos::Left, VPos::Center));
    for (j, name) in names.iter().enumerate() {
        let (px, py) = chart.backend_coord(&(j as f64, -0.5));
        root.draw(&Text::new(name.clone(), (px, py + 6), style.clone()))?;
    }
    let cells = (0..NUM_LABELS).flat_map(|i| (0..NUM_LABELS).map(move |j| (i, j)));
    chart.draw_series(cells.clone().map(|(i, j)| {
        let (x, y) = (j as f64, n - i as f64 - 1.0);
        Rectangle::new([(x - 0.5, y - 0.5), (x + 0.5, y + 0.5)], diverging(m.0[i][j]).filled())
    }))?;
    chart.draw_series(cells.map(|(i, j)| {
        let (x, y) = (j as f64 - 0.2, n - i as f64 - 0.9);
        Text::new(format!("{:.2}", m.0[i][j]), (x, y), ("sans-serif", 11).into_font())
    }))?;
    Ok(())
}

fn deaths_chart<DB: DrawingBackend>(root: &DrawingArea<DB, Shift>, d: &DeathAlignment) -> DrawResult
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE)?;
    let n = d.rows.len();
    let max_articles = d
        .rows
        .iter()
        .map(|r| r.article_count.max(r.negative_label_count))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let max_deaths = d.rows.iter().map(|r| r.deaths).max().unwrap_or(1).max(1) as f64;
    let quarters: Vec<String> = d.rows.iter().map(|r| r.quarter.to_string()).collect();
    let caption = match d.negative_correlation {
        Some(r) => format!("{}: articles and deaths (r = {r:.2})", d.region),
        None => format!("{}: articles and deaths", d.region),
    };
    let mut chart = ChartBuilder::on(root)
        .caption(caption, ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(50)
        .y_label_area_size(70)
        .right_y_label_area_size(70)
        .build_cartesian_2d(-0.5..n as f64 - 0.5, 0.0..max_articles * 1.1)?
        .set_secondary_coord(-0.5..n as f64 - 0.5, 0.0..max_deaths * 1.1);
    chart
        .configure_mesh()
        .disable_x_mesh()
        .light_line_style(TRANSPARENT)
        .x_labels(n)
        .x_label_formatter(&|x| index_label(*x, n).map_or_else(String::new, |i| quarters[i].clone()))
        .y_label_formatter(&|v| format!("{v:.0}"))
        .y_desc("articles / negative labels")
        .draw()?;
    chart
        .configure_secondary_axes()
        .y_label_formatter(&|v| format!("{v:.0}"))
        .y_desc("deaths")
        .draw()?;
    let article_color = BLUE.mix(0.6);
    let negative_color = RED.mix(0.6);
    chart
        .draw_series(d.rows.iter().enumerate().map(|(i, r)| {
            let x = i as f64 - 0.4;
            Rectangle::new([(x, 0.0), (x + 0.25, r.article_count as f64)], article_color.filled())
        }))?
        .label("articles")
        .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], article_color.filled()));
    chart
        .draw_series(d.rows.iter().enumerate().map(|(i, r)| {
            let x = i as f64 - 0.125;
            Rectangle::new(
                [(x, 0.0), (x + 0.25, r.negative_label_count as f64)],
                negative_color.filled(),
            )
        }))?
        .label("negative labels")
        .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], negative_color.filled()));
    let death_color = BLACK.mix(0.5);
    chart
        .draw_secondary_series(d.rows.iter().enumerate().map(|(i, r)| {
            let x = i as f64 + 0.15;
            Rectangle::new([(x, 0.0), (x + 0.25, r.deaths as f64)], death_color.filled())
        }))?
        .label("deaths")
        .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], death_color.filled()));
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    Ok(())
}

/// Path and content hash of a file read or written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileRecord {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Record of one command-line run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Effective settings after merging the config file and flags.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileRecord>,
    pub artifacts: Vec<FileRecord>,
    pub started_at: String,
    pub finished_at: String,
    pub tool_version: String,
    pub status: String,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

/// One row of an article sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub article_id: String,
    pub date: NaiveDate,
    pub section: String,
    pub labels: String,
    pub excerpt: String,
}

pub const EXCERPT_CHARS: usize = 500;

/// Seeded sample of `k` articles whose predicted labels intersect
/// `filter` (any labelled article when `filter` is empty). Fewer matches
/// than `k` returns all of them with a warning. Rows follow article id
/// order within the sample.
pub fn sample_articles(
    predictions: &[Prediction],
    articles: &[Article],
    filter: &LabelVector,
    k: usize,
    seed: u64,
) -> Result<Vec<SampleRow>> {
    if k == 0 {
        return Err(Error::Config("sample size k must be at least 1".into()));
    }
    let by_id: HashMap<&str, &Article> = articles.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut matches: Vec<(&Prediction, &Article)> = Vec::new();
    for p in predictions {
        let article = by_id
            .get(p.article_id.as_str())
            .ok_or_else(|| Error::Consistency(format!("prediction for unknown article `{}`", p.article_id)))?;
        if filter.is_empty() || p.labels.intersects(filter) {
            matches.push((p, article));
        }
    }
    matches.sort_by(|a, b| a.0.article_id.cmp(&b.0.article_id));
    if matches.len() < k {
        log::warn!("only {} articles match the label filter (asked for {k})", matches.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(&Prediction, &Article)> = matches.choose_multiple(&mut rng, k).copied().collect();
    chosen.sort_by(|a, b| a.0.article_id.cmp(&b.0.article_id));
    Ok(chosen
        .into_iter()
        .map(|(p, a)| SampleRow {
            article_id: a.id.clone(),
            date: a.publication_date,
            section: a.section.clone(),
            labels: p.labels.labels().map(|l| l.name()).collect::<Vec<_>>().join(";"),
            excerpt: a.body.chars().take(EXCERPT_CHARS).collect(),
        })
        .collect())
}

pub fn write_sample_csv(path: &Path, rows: &[SampleRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
